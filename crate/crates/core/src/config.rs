//! JSON run configuration.
//!
//! Optional keys stay `None` after parsing so that re-serializing a parsed
//! document yields the same keys; [`RunConfig::normalized`] fills defaults.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::chain::{ChainSpec, ModelKind};
use crate::driving::{DrivingCase, DrivingConfig, OrthoAmplitudes, Orientation, AMP_KEYS};
use crate::error::{Error, Result};
use crate::liouvillian::{SolverMode, SolverOptions, DEFAULT_MAX_STEPS, DEFAULT_TOL};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Experiment {
    #[default]
    SteadyState,
    OneWayStreet,
    SymmetryAudit,
    UniquenessAudit,
    All,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::SteadyState,
        Experiment::OneWayStreet,
        Experiment::SymmetryAudit,
        Experiment::UniquenessAudit,
        Experiment::All,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Experiment::SteadyState => "STEADY_STATE",
            Experiment::OneWayStreet => "ONE_WAY_STREET",
            Experiment::SymmetryAudit => "SYMMETRY_AUDIT",
            Experiment::UniquenessAudit => "UNIQUENESS_AUDIT",
            Experiment::All => "ALL",
        }
    }

    /// Accepts the canonical names, case-insensitively, with `-` for `_`.
    pub fn parse(name: &str) -> Result<Experiment> {
        let key = name.trim().to_ascii_uppercase().replace('-', "_");
        Experiment::ALL
            .into_iter()
            .find(|e| e.as_str() == key)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.as_str()).collect();
                Error::Config(format!("unknown experiment `{name}`, expected one of {}", names.join(", ")))
            })
    }

    pub fn includes(self, other: Experiment) -> bool {
        self == other || self == Experiment::All
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub n: usize,
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields_z: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivingSection {
    pub case: DrivingCase,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp_l_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp_l_minus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp_v_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp_v_minus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp_w_plus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amp_w_minus: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation: Option<Orientation>,
}

impl DrivingSection {
    fn amps(&self) -> [Option<f64>; 6] {
        [
            self.amp_l_plus,
            self.amp_l_minus,
            self.amp_v_plus,
            self.amp_v_minus,
            self.amp_w_plus,
            self.amp_w_minus,
        ]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<SolverMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profiles_csv: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub chain: ChainSection,
    pub driving: DrivingSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<Experiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn cfg_err(key: &str, msg: impl fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

impl RunConfig {
    /// Parses and validates a JSON document.
    pub fn from_json_str(text: &str) -> Result<RunConfig> {
        let cfg: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {} column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        RunConfig::from_json_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn experiment(&self) -> Experiment {
        self.experiment.unwrap_or_default()
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn solver_mode(&self) -> SolverMode {
        self.solver.as_ref().and_then(|s| s.mode).unwrap_or_default()
    }

    pub fn solver_options(&self) -> SolverOptions {
        let s = self.solver.clone().unwrap_or_default();
        SolverOptions {
            tol: s.tol.unwrap_or(DEFAULT_TOL),
            max_steps: s.max_steps.unwrap_or(DEFAULT_MAX_STEPS),
        }
    }

    pub fn orientation(&self) -> Orientation {
        self.driving.orientation.unwrap_or_default()
    }

    pub fn chain_spec(&self) -> Result<ChainSpec> {
        let c = &self.chain;
        let bonds = c.n.saturating_sub(1);
        let spec = match c.kind {
            ModelKind::Xxz => {
                if c.alphas.is_some() {
                    return Err(cfg_err("chain.alphas", "applies only to kind XXX; use chain.alpha"));
                }
                let alpha = c.alpha.unwrap_or(1.0);
                let deltas = c
                    .deltas
                    .clone()
                    .ok_or_else(|| cfg_err("chain.deltas", "required for kind XXZ"))?;
                if deltas.len() != bonds {
                    return Err(cfg_err(
                        "chain.deltas",
                        format!("expected {bonds} entries for n = {}, got {}", c.n, deltas.len()),
                    ));
                }
                ChainSpec::xxz(c.n, alpha, deltas)
            }
            ModelKind::Xxx => {
                if c.alpha.is_some() || c.deltas.is_some() {
                    return Err(cfg_err("chain", "alpha and deltas apply only to kind XXZ; use chain.alphas"));
                }
                let alphas = c
                    .alphas
                    .clone()
                    .ok_or_else(|| cfg_err("chain.alphas", "required for kind XXX"))?;
                if alphas.len() != bonds {
                    return Err(cfg_err(
                        "chain.alphas",
                        format!("expected {bonds} entries for n = {}, got {}", c.n, alphas.len()),
                    ));
                }
                ChainSpec::xxx(c.n, alphas)
            }
        }
        .map_err(|e| cfg_err("chain", e))?;
        match &c.fields_z {
            Some(b) if b.len() != c.n => Err(cfg_err(
                "chain.fields_z",
                format!("expected {} entries, got {}", c.n, b.len()),
            )),
            Some(b) => spec.with_fields(b.clone()).map_err(|e| cfg_err("chain.fields_z", e)),
            None => Ok(spec),
        }
    }

    pub fn driving_config(&self) -> Result<DrivingConfig> {
        let d = &self.driving;
        let cfg = if d.case.is_theta() {
            if let Some(k) = AMP_KEYS.iter().zip(d.amps()).find(|(_, a)| a.is_some()).map(|(k, _)| k) {
                return Err(cfg_err(&format!("driving.{k}"), format!("does not apply to {}", d.case)));
            }
            let need = |key: &str, v: Option<f64>| v.ok_or_else(|| cfg_err(&format!("driving.{key}"), format!("required for {}", d.case)));
            DrivingConfig::theta_case(d.case, need("gamma", d.gamma)?, need("f", d.f)?, need("theta", d.theta)?)
        } else {
            if d.gamma.is_some() || d.f.is_some() || d.theta.is_some() {
                return Err(cfg_err("driving", format!("gamma, f and theta do not apply to {}", d.case)));
            }
            let a = d.amps().map(|v| v.unwrap_or(0.0));
            DrivingConfig::orthogonal(d.case, OrthoAmplitudes::new(a[0], a[1], a[2], a[3], a[4], a[5]))
        }
        .map_err(|e| cfg_err("driving", e))?;
        Ok(cfg.with_orientation(self.orientation()))
    }

    pub fn validate(&self) -> Result<()> {
        self.chain_spec()?;
        self.driving_config()?;
        let opts = self.solver_options();
        if !(opts.tol.is_finite() && opts.tol > 0.0) {
            return Err(cfg_err("solver.tol", format!("must be a positive number, got {}", opts.tol)));
        }
        if opts.max_steps == 0 {
            return Err(cfg_err("solver.max_steps", "must be at least 1"));
        }
        Ok(())
    }

    /// Every optional key filled with the value the run actually uses.
    pub fn normalized(&self) -> RunConfig {
        let mut out = self.clone();
        let c = &mut out.chain;
        if c.kind == ModelKind::Xxz && c.alpha.is_none() {
            c.alpha = Some(1.0);
        }
        if c.fields_z.is_none() {
            c.fields_z = Some(vec![0.0; c.n]);
        }
        let d = &mut out.driving;
        if d.case.is_orthogonal() {
            for slot in [
                &mut d.amp_l_plus,
                &mut d.amp_l_minus,
                &mut d.amp_v_plus,
                &mut d.amp_v_minus,
                &mut d.amp_w_plus,
                &mut d.amp_w_minus,
            ] {
                slot.get_or_insert(0.0);
            }
        }
        d.orientation.get_or_insert(Orientation::Normal);
        out.experiment = Some(self.experiment());
        let opts = self.solver_options();
        out.solver = Some(SolverSection {
            mode: Some(self.solver_mode()),
            tol: Some(opts.tol),
            max_steps: Some(opts.max_steps),
        });
        out.output.get_or_insert_with(OutputSection::default);
        out.seed = Some(self.seed());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    const BASE: &str = r#"{
        "chain": {"n": 4, "kind": "XXZ", "alpha": 1.0, "deltas": [0.5, 1.0, 1.5]},
        "driving": {"case": "X_XY_THETA", "gamma": 1.0, "f": 0.5, "theta": 0.7853981633974483},
        "experiment": "ONE_WAY_STREET",
        "solver": {"mode": "DENSE", "tol": 1e-10, "max_steps": 1000},
        "output": {"report": "report.json", "profiles_csv": "profiles.csv"},
        "seed": 7
    }"#;

    fn keys(v: &Value, prefix: &str, out: &mut Vec<String>) {
        if let Value::Object(m) = v {
            for (k, child) in m {
                let path = format!("{prefix}{k}");
                out.push(path.clone());
                keys(child, &format!("{path}."), out);
            }
        }
    }

    #[test]
    fn parses_full_document() {
        let cfg = RunConfig::from_json_str(BASE).unwrap();
        assert_eq!(cfg.experiment(), Experiment::OneWayStreet);
        assert_eq!(cfg.seed(), 7);
        assert_eq!(cfg.solver_options().max_steps, 1000);
        assert_eq!(cfg.chain_spec().unwrap().zz(3), 1.5);
        assert_eq!(cfg.driving_config().unwrap().case, DrivingCase::XXyTheta);
    }

    #[test]
    fn round_trip_keeps_keys() {
        for text in [
            BASE,
            r#"{"chain": {"n": 3, "kind": "XXX", "alphas": [0.5, 1.5]}, "driving": {"case": "XZ_ORTHO", "amp_l_plus": 1.0}}"#,
        ] {
            let cfg = RunConfig::from_json_str(text).unwrap();
            let again: Value = serde_json::from_str(&cfg.to_json_string()).unwrap();
            let orig: Value = serde_json::from_str(text).unwrap();
            let (mut a, mut b) = (Vec::new(), Vec::new());
            keys(&again, "", &mut a);
            keys(&orig, "", &mut b);
            a.sort();
            b.sort();
            assert_eq!(a, b);
            assert_eq!(RunConfig::from_json_str(&cfg.to_json_string()).unwrap(), cfg);
        }
    }

    #[test]
    fn normalized_config_is_stable() {
        let cfg = RunConfig::from_json_str(BASE).unwrap().normalized();
        let again = RunConfig::from_json_str(&cfg.to_json_string()).unwrap();
        assert_eq!(again.normalized(), cfg);
        assert_eq!(cfg.chain.fields_z, Some(vec![0.0; 4]));
    }

    #[test]
    fn unknown_keys_rejected_with_location() {
        let text = BASE.replace("\"seed\": 7", "\"seed\": 7, \"sed\": 1");
        let err = RunConfig::from_json_str(&text).unwrap_err().to_string();
        assert!(err.contains("unknown field `sed`") && err.contains("line 7"), "{err}");

        let text = BASE.replace("\"alpha\": 1.0", "\"alpha\": 1.0, \"beta\": 2");
        let err = RunConfig::from_json_str(&text).unwrap_err().to_string();
        assert!(err.contains("unknown field `beta`"), "{err}");
    }

    #[test]
    fn array_lengths_checked() {
        let text = BASE.replace("[0.5, 1.0, 1.5]", "[0.5, 1.5]");
        let err = RunConfig::from_json_str(&text).unwrap_err().to_string();
        assert!(err.contains("chain.deltas") && err.contains("expected 3"), "{err}");

        let text = BASE.replace("\"deltas\": [0.5, 1.0, 1.5]", "\"deltas\": [0.5, 1.0, 1.5], \"fields_z\": [1, 2]");
        let err = RunConfig::from_json_str(&text).unwrap_err().to_string();
        assert!(err.contains("chain.fields_z"), "{err}");
    }

    #[test]
    fn case_specific_keys() {
        let text = BASE.replace("\"theta\": 0.7853981633974483", "\"theta\": 0.78, \"amp_l_plus\": 1.0");
        assert!(RunConfig::from_json_str(&text).unwrap_err().to_string().contains("amp_l_plus"));
        let text = BASE.replace(", \"theta\": 0.7853981633974483", "");
        assert!(RunConfig::from_json_str(&text).unwrap_err().to_string().contains("driving.theta"));
        let text = r#"{"chain": {"n": 3, "kind": "XXX", "alphas": [1, 1]}, "driving": {"case": "XY_ORTHO", "gamma": 1}}"#;
        assert!(RunConfig::from_json_str(text).is_err());
        let text = r#"{"chain": {"n": 3, "kind": "XXX", "alphas": [1, 1], "deltas": [1, 1]}, "driving": {"case": "XY_ORTHO"}}"#;
        assert!(RunConfig::from_json_str(text).is_err());
    }

    #[test]
    fn physical_ranges_checked() {
        let text = BASE.replace("\"f\": 0.5", "\"f\": 1.5");
        assert!(RunConfig::from_json_str(&text).is_err());
        let text = BASE.replace("\"tol\": 1e-10", "\"tol\": -1");
        assert!(RunConfig::from_json_str(&text).unwrap_err().to_string().contains("solver.tol"));
        let text = BASE.replace("\"experiment\": \"ONE_WAY_STREET\"", "\"experiment\": \"SIDEWAYS\"");
        assert!(RunConfig::from_json_str(&text).is_err());
    }

    #[test]
    fn experiment_names() {
        assert_eq!(Experiment::parse("one-way-street").unwrap(), Experiment::OneWayStreet);
        assert_eq!(Experiment::parse("ALL").unwrap(), Experiment::All);
        assert!(Experiment::parse("nope").is_err());
        assert!(Experiment::All.includes(Experiment::SymmetryAudit));
        assert!(!Experiment::SteadyState.includes(Experiment::SymmetryAudit));
    }
}
