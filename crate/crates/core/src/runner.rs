//! Executes a [`RunConfig`] and assembles the JSON report and CSV profiles.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{build_hamiltonian, ChainSpec};
use crate::config::{Experiment, RunConfig};
use crate::currents::{current_profile, CurrentProfile};
use crate::driving::{build_lindblad_set, DrivingConfig, Orientation};
use crate::error::{Error, Result};
use crate::liouvillian::{assemble, steady_state_with, validate_state, StateDiagnostics, SteadyStateResult};
use crate::pauli::DenseOperator;
use crate::symmetry::{matching_family, measure_mapping, steady_state_correspondence, verify_mapping, MappingReport};
use crate::uniqueness::{uniqueness_audit, UniquenessWitness};

/// Random states probed by the Liouvillian sanity sweep.
pub const SANITY_SAMPLES: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub orientation: Orientation,
    pub residual: f64,
    pub null_dim: Option<usize>,
    pub gap: Option<f64>,
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub warning: Option<String>,
    pub state: StateDiagnostics,
}

impl SolveDiagnostics {
    fn new(orientation: Orientation, ss: &SteadyStateResult) -> Self {
        SolveDiagnostics {
            orientation,
            residual: ss.residual,
            null_dim: ss.null_dim,
            gap: ss.gap,
            steps: ss.steps,
            warning: ss.warning.clone(),
            state: validate_state(&ss.rho),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrientedProfile {
    pub orientation: Orientation,
    pub profile: CurrentProfile,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OneWayComparison {
    /// `max_j |⟨J^E_j⟩ − ⟨J^E_j⟩_inv|`.
    pub energy_delta: f64,
    /// `⟨J^M_j⟩ + ⟨J^M_j⟩_inv` per bond.
    pub spin_sum: Vec<f64>,
    /// `⟨J^M_j⟩ − ⟨J^M_j⟩_inv` per bond.
    pub spin_difference: Vec<f64>,
    /// `max |U ρ U† − ρ_inv|`, reported when the chain matches the case's family.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub state_residual: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SanityReport {
    pub seed: u64,
    pub samples: usize,
    /// Largest `|tr L(ρ)|` over the random states.
    pub max_trace: f64,
    /// Largest entry of `|L(ρ) − L(ρ)†|` over the random Hermitian states.
    pub max_hermiticity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub experiment: Experiment,
    pub solves: Vec<SolveDiagnostics>,
    pub profiles: Vec<OrientedProfile>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub one_way_street: Option<OneWayComparison>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mapping: Option<MappingReport>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub uniqueness: Option<UniquenessWitness>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sanity: Option<SanityReport>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    /// Wall-clock milliseconds per phase.
    pub timings_ms: BTreeMap<String, f64>,
}

impl RunReport {
    fn empty(cfg: &RunConfig) -> Self {
        RunReport {
            config: cfg.normalized(),
            experiment: cfg.experiment(),
            solves: Vec::new(),
            profiles: Vec::new(),
            one_way_street: None,
            mapping: None,
            uniqueness: None,
            sanity: None,
            warnings: Vec::new(),
            error: None,
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Profiles as CSV with columns `index,kind,orientation,value`.
    pub fn profiles_csv(&self) -> String {
        let mut out = String::from("index,kind,orientation,value\n");
        for p in &self.profiles {
            let o = p.orientation.as_str();
            for (k, v) in p.profile.spin.iter().enumerate() {
                let _ = writeln!(out, "{},spin,{o},{v:e}", k + 1);
            }
            for (k, v) in p.profile.energy.iter().enumerate() {
                let _ = writeln!(out, "{},energy,{o},{v:e}", k + 2);
            }
            if let Some(m) = &p.profile.magnetic {
                for (k, v) in m.iter().enumerate() {
                    let _ = writeln!(out, "{},magnetic,{o},{v:e}", k + 2);
                }
            }
        }
        out
    }
}

/// A failed run together with whatever was computed before the failure.
#[derive(Debug)]
pub struct RunError {
    pub error: Error,
    pub partial: Option<Box<RunReport>>,
}

impl From<Error> for RunError {
    fn from(error: Error) -> Self {
        RunError { error, partial: None }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for RunError {}

struct Timer<'a> {
    timings: &'a mut BTreeMap<String, f64>,
}

impl Timer<'_> {
    fn time<T>(&mut self, phase: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.timings.entry(phase.to_string()).or_default() += start.elapsed().as_secs_f64() * 1e3;
        out
    }
}

fn solve_one(spec: &ChainSpec, cfg: &DrivingConfig, run: &RunConfig) -> Result<(SteadyStateResult, CurrentProfile)> {
    let n = spec.n();
    let h = build_hamiltonian(spec)?;
    let sop = assemble(&h, &build_lindblad_set(cfg, n)?, n, run.solver_mode())?;
    let ss = steady_state_with(&sop, &run.solver_options())?;
    let profile = current_profile(&ss.rho, spec)?;
    Ok((ss, profile))
}

fn sanity_sweep(spec: &ChainSpec, cfg: &DrivingConfig, run: &RunConfig) -> Result<SanityReport> {
    let n = spec.n();
    let h = build_hamiltonian(spec)?;
    let sop = assemble(&h, &build_lindblad_set(cfg, n)?, n, run.solver_mode())?;
    let mut rng = ChaCha8Rng::seed_from_u64(run.seed());
    let d = 1usize << n;
    let (mut max_trace, mut max_herm): (f64, f64) = (0.0, 0.0);
    for _ in 0..SANITY_SAMPLES {
        let m = DMatrix::from_fn(d, d, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        });
        let rho = DenseOperator::new(n, m)?.hermitian_part();
        let out = sop.apply(&rho)?;
        max_trace = max_trace.max(out.trace().norm());
        max_herm = max_herm.max(out.max_abs_diff(&out.adjoint()));
    }
    Ok(SanityReport {
        seed: run.seed(),
        samples: SANITY_SAMPLES,
        max_trace,
        max_hermiticity: max_herm,
    })
}

fn fail(report: RunReport, error: Error) -> RunError {
    let mut partial = report;
    partial.error = Some(error.to_string());
    RunError {
        error,
        partial: Some(Box::new(partial)),
    }
}

/// Runs the configured experiment.
pub fn run(config: &RunConfig) -> std::result::Result<RunReport, RunError> {
    let total = Instant::now();
    config.validate()?;
    let spec = config.chain_spec()?;
    let driving = config.driving_config()?;
    let experiment = config.experiment();
    let mut report = RunReport::empty(config);
    let mut timings = BTreeMap::new();
    let family_matches = spec.kind() == matching_family(driving.case);

    macro_rules! attempt {
        ($e:expr) => {
            match $e {
                Ok(v) => v,
                Err(err) => {
                    report.timings_ms = timings;
                    return Err(fail(report, err));
                }
            }
        };
    }

    {
        let mut t = Timer { timings: &mut timings };
        report.sanity = Some(attempt!(t.time("sanity", || sanity_sweep(&spec, &driving, config))));

        if experiment == Experiment::SteadyState {
            let (ss, profile) = attempt!(t.time("steady_state", || solve_one(&spec, &driving, config)));
            report.solves.push(SolveDiagnostics::new(driving.orientation, &ss));
            report.profiles.push(OrientedProfile {
                orientation: driving.orientation,
                profile,
            });
        }

        if experiment.includes(Experiment::OneWayStreet) {
            let normal_cfg = driving.clone().with_orientation(Orientation::Normal);
            let corr = attempt!(t.time("one_way_street", || steady_state_correspondence(
                &spec,
                &normal_cfg,
                config.solver_mode(),
                &config.solver_options()
            )));
            report.solves.push(SolveDiagnostics::new(Orientation::Normal, &corr.normal));
            report.solves.push(SolveDiagnostics::new(Orientation::Inverted, &corr.inverted));
            let spin_sum = corr
                .normal_profile
                .spin
                .iter()
                .zip(&corr.inverted_profile.spin)
                .map(|(a, b)| a + b)
                .collect();
            let spin_difference = corr
                .normal_profile
                .spin
                .iter()
                .zip(&corr.inverted_profile.spin)
                .map(|(a, b)| a - b)
                .collect();
            report.one_way_street = Some(OneWayComparison {
                energy_delta: corr.energy_delta,
                spin_sum,
                spin_difference,
                state_residual: family_matches.then_some(corr.state_residual),
            });
            report.profiles.push(OrientedProfile {
                orientation: Orientation::Normal,
                profile: corr.normal_profile,
            });
            report.profiles.push(OrientedProfile {
                orientation: Orientation::Inverted,
                profile: corr.inverted_profile,
            });
        }

        if experiment.includes(Experiment::SymmetryAudit) {
            let mapping = if family_matches {
                attempt!(t.time("symmetry_audit", || verify_mapping(&spec, &driving)))
            } else {
                report.warnings.push(format!(
                    "{} is stated for the {} chain; mapping residuals on {} are measured, not asserted",
                    driving.case,
                    matching_family(driving.case).as_str(),
                    spec.kind().as_str()
                ));
                attempt!(t.time("symmetry_audit", || measure_mapping(&spec, &driving)))
            };
            report.mapping = Some(mapping);
        }

        if experiment.includes(Experiment::UniquenessAudit) {
            report.uniqueness = Some(attempt!(t.time("uniqueness_audit", || uniqueness_audit(&spec, &driving))));
        }
    }

    for s in &report.solves {
        if let Some(w) = &s.warning {
            report.warnings.push(format!("{}: {w}", s.orientation.as_str()));
        }
    }
    timings.insert("total".into(), total.elapsed().as_secs_f64() * 1e3);
    report.timings_ms = timings;
    Ok(report)
}

/// Destination paths for the report and profiles, after an optional `--out` override.
pub fn output_paths(config: &RunConfig, out_dir: Option<&Path>) -> (Option<PathBuf>, Option<PathBuf>) {
    let out = config.output.clone().unwrap_or_default();
    match out_dir {
        Some(dir) => {
            let name = |p: Option<PathBuf>, default: &str| {
                let file = p
                    .as_deref()
                    .and_then(Path::file_name)
                    .map(PathBuf::from)
                    .unwrap_or_else(|| PathBuf::from(default));
                Some(dir.join(file))
            };
            (name(out.report, "report.json"), name(out.profiles_csv, "profiles.csv"))
        }
        None => (out.report, out.profiles_csv),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| Error::Io {
            path: parent.display().to_string(),
            source,
        })?;
    }
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes the report JSON and the profile CSV where requested.
pub fn write_outputs(report: &RunReport, report_path: Option<&Path>, csv_path: Option<&Path>) -> Result<()> {
    if let Some(p) = report_path {
        let mut json = report.to_json_string();
        json.push('\n');
        write_file(p, &json)?;
    }
    if let Some(p) = csv_path {
        write_file(p, &report.profiles_csv())?;
    }
    Ok(())
}
