//! Witnesses for a unique steady state: the boundary operators reduce to a
//! ladder pair, the ladder recursions reach every site, the generators
//! close onto the full operator algebra, and the Liouvillian has a
//! one-dimensional null space.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{build_hamiltonian, ChainSpec};
use crate::driving::{build_lindblad_set, DrivingConfig, LindbladSet};
use crate::error::{Error, Result};
use crate::liouvillian::{assemble, SolverMode, Superoperator, NULL_THRESHOLD};
use crate::pauli::{OperatorSum, Pauli, Span};

/// Tolerance on Pauli coefficients for the ladder identities.
pub const LADDER_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ROUNDS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClosureReport {
    pub generated_dim: usize,
    pub target_dim: usize,
    pub iterations: usize,
    pub saturated: bool,
    /// False when `max_rounds` ran out while the span was still growing.
    pub stabilized: bool,
    /// Span dimension after each round, starting with the generators alone.
    pub history: Vec<usize>,
}

/// Span of all products of `gens`, grown one factor per round.
pub fn algebra_closure(gens: &[OperatorSum], n: usize, max_rounds: usize) -> Result<ClosureReport> {
    if gens.is_empty() {
        return Err(Error::spec("algebra closure needs at least one generator"));
    }
    if let Some(g) = gens.iter().find(|g| g.n() != n) {
        return Err(Error::Dimension {
            expected: n,
            found: g.n(),
        });
    }
    let target_dim = 1usize << (2 * n);
    let mut span = Span::new(n);
    let mut frontier = Vec::new();
    for g in gens {
        if span.insert(g)? {
            frontier.push(g.clone());
        }
    }
    let mut history = vec![span.rank()];
    let mut iterations = 0;
    let mut stabilized = frontier.is_empty() || span.rank() == target_dim;
    while !stabilized && iterations < max_rounds {
        iterations += 1;
        let mut next = Vec::new();
        'round: for b in &frontier {
            for g in gens {
                for prod in [g.mul(b)?, b.mul(g)?] {
                    if span.insert(&prod)? {
                        next.push(prod);
                        if span.rank() == target_dim {
                            break 'round;
                        }
                    }
                }
            }
        }
        history.push(span.rank());
        stabilized = next.is_empty() || span.rank() == target_dim;
        frontier = next;
    }
    let generated_dim = span.rank();
    Ok(ClosureReport {
        generated_dim,
        target_dim,
        iterations,
        saturated: generated_dim == target_dim,
        stabilized,
        history,
    })
}

/// Single-site operator pairs that reduce to `σ±`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LadderFamily {
    /// `(σˣ ± iσʸ)/2`.
    Sigma,
    /// `(σᶻ ± iσˣ)/2`.
    Gamma,
    /// `(σʸ ± iσᶻ)/2`.
    Pi,
}

impl LadderFamily {
    pub const ALL: [LadderFamily; 3] = [LadderFamily::Sigma, LadderFamily::Gamma, LadderFamily::Pi];

    fn member(self, n: usize, site: usize, sign: f64) -> Result<OperatorSum> {
        match self {
            LadderFamily::Sigma => OperatorSum::ladder(n, site, Pauli::X, Pauli::Y, sign),
            LadderFamily::Gamma => OperatorSum::gamma_pm(n, site, sign),
            LadderFamily::Pi => OperatorSum::pi_pm(n, site, sign),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReduction {
    pub site: usize,
    pub family: LadderFamily,
    /// Labels of the operators proportional to the family's `+` and `−` members.
    pub sources: [String; 2],
    #[serde(skip)]
    pub sigma_plus: Option<OperatorSum>,
    #[serde(skip)]
    pub sigma_minus: Option<OperatorSum>,
}

/// `c` with `op = c · target`, if one exists.
fn proportionality(op: &OperatorSum, target: &OperatorSum) -> Option<Complex64> {
    let norm = target.coeff_inner(target);
    let c = target.coeff_inner(op) / norm;
    if c.norm() < 1e-14 {
        return None;
    }
    let residual = (op - &(target * c)).max_coeff();
    (residual <= 1e-12 * c.norm().max(1.0)).then_some(c)
}

/// σ± on `site` from a recognized pair `(F⁺, F⁻)`.
fn sigma_pair(family: LadderFamily, fp: &OperatorSum, fm: &OperatorSum) -> Result<(OperatorSum, OperatorSum)> {
    let minus_i = Complex64::new(0.0, -1.0);
    let sum = fp + fm;
    let diff = (fp - fm).scale(minus_i);
    let comm = fp.commutator(fm)?;
    // (σˣ, σʸ) for each family.
    let (x, y) = match family {
        LadderFamily::Sigma => return Ok((fp.clone(), fm.clone())),
        // [Π⁺, Π⁻] = σˣ, Π⁺ + Π⁻ = σʸ.
        LadderFamily::Pi => (comm, sum),
        // −i(Γ⁺ − Γ⁻) = σˣ, [Γ⁺, Γ⁻] = σʸ.
        LadderFamily::Gamma => (diff, comm),
    };
    let iy = y.scale(Complex64::new(0.0, 1.0));
    Ok((&(&x + &iy) * 0.5, &(&x - &iy) * 0.5))
}

/// Every boundary site whose operators contain a σ±, Γ± or Π± pair.
pub fn reduce_boundaries(ls: &LindbladSet) -> Result<Vec<BoundaryReduction>> {
    let n = ls.n();
    let mut sites = vec![1];
    if n > 1 {
        sites.push(n);
    }
    let mut out = Vec::new();
    for site in sites {
        let ops: Vec<_> = ls.nonzero().filter(|l| l.site == site).collect();
        'family: for family in LadderFamily::ALL {
            let fp = family.member(n, site, 1.0)?;
            let fm = family.member(n, site, -1.0)?;
            let plus = ops.iter().find(|l| proportionality(&l.op, &fp).is_some());
            let minus = ops.iter().find(|l| proportionality(&l.op, &fm).is_some());
            if let (Some(p), Some(m)) = (plus, minus) {
                // Rebuild F± from the operators themselves.
                let cp = proportionality(&p.op, &fp).expect("checked");
                let cm = proportionality(&m.op, &fm).expect("checked");
                let fp_ = p.op.scale(cp.inv());
                let fm_ = m.op.scale(cm.inv());
                let (sp, sm) = sigma_pair(family, &fp_, &fm_)?;
                out.push(BoundaryReduction {
                    site,
                    family,
                    sources: [p.label.clone(), m.label.clone()],
                    sigma_plus: Some(sp),
                    sigma_minus: Some(sm),
                });
                break 'family;
            }
        }
    }
    Ok(out)
}

/// `σ⁺` and `σ⁻` on the first reducible boundary.
pub fn reduce_boundary_generators(ls: &LindbladSet) -> Result<Vec<OperatorSum>> {
    let found = reduce_boundaries(ls)?;
    let first = found.into_iter().next().ok_or_else(|| {
        Error::Reduction("no boundary carries a σ±, Γ± or Π± pair".into())
    })?;
    Ok(vec![
        first.sigma_plus.expect("set on construction"),
        first.sigma_minus.expect("set on construction"),
    ])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderIdentity {
    /// `"sigma+"` or `"sigma-"`.
    pub kind: String,
    /// Site whose ladder operator is produced.
    pub site: usize,
    pub holds: bool,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderReport {
    pub identities: Vec<LadderIdentity>,
}

impl LadderReport {
    pub fn all_hold(&self) -> bool {
        self.identities.iter().all(|i| i.holds)
    }
}

/// Checks the recursions that produce `σ±_j` for `j = 2..N` from `σ±_1` and `H`.
///
/// With bond couplings `α_i` in the hopping part:
///
/// ```text
/// σ⁺_2 = σᶻ_1 [σ⁺_1, [H, σᶻ_1]] / (4α_1)
/// σ⁺_j = (−α_{j−2} σ⁺_{j−2} − ½ σᶻ_{j−1} [σ⁻_{j−1}, σ⁺_{j−1} H σ⁺_{j−1}]) / α_{j−1}
/// σ⁻_2 = [σ⁻_1, [H, σᶻ_1]] σᶻ_1 / (4α_1)
/// σ⁻_j = (−α_{j−2} σ⁻_{j−2} + ½ [σ⁺_{j−1}, σ⁻_{j−1} H σ⁻_{j−1}] σᶻ_{j−1}) / α_{j−1}
/// ```
pub fn verify_ladder_recursion(spec: &ChainSpec) -> Result<LadderReport> {
    let n = spec.n();
    let h = build_hamiltonian(spec)?;
    let sp = |j| OperatorSum::sigma_plus(n, j);
    let sm = |j| OperatorSum::sigma_minus(n, j);
    let sz = |j| OperatorSum::site(n, j, Pauli::Z);
    let mut identities = Vec::new();
    let mut record = |kind: &str, site: usize, lhs: OperatorSum, rhs: OperatorSum| -> Result<()> {
        let residual = lhs.max_coeff_diff(&rhs)?;
        identities.push(LadderIdentity {
            kind: kind.to_string(),
            site,
            holds: residual <= LADDER_TOL,
            residual,
        });
        Ok(())
    };

    if n >= 2 {
        let a1 = spec.hopping(1);
        let h_z = h.commutator(&sz(1)?)?;
        let plus = sz(1)?.mul(&sp(1)?.commutator(&h_z)?)? * (0.25 / a1);
        record("sigma+", 2, plus, sp(2)?)?;
        let minus = sm(1)?.commutator(&h_z)?.mul(&sz(1)?)? * (0.25 / a1);
        record("sigma-", 2, minus, sm(2)?)?;
    }
    for j in 3..=n {
        let (a_far, a_near) = (spec.hopping(j - 2), spec.hopping(j - 1));
        let sandwich = sp(j - 1)?.mul(&h)?.mul(&sp(j - 1)?)?;
        let inner = sz(j - 1)?.mul(&sm(j - 1)?.commutator(&sandwich)?)?;
        let plus = &(&sp(j - 2)? * (-a_far)) - &(&inner * 0.5);
        record("sigma+", j, &plus * (1.0 / a_near), sp(j)?)?;

        let sandwich = sm(j - 1)?.mul(&h)?.mul(&sm(j - 1)?)?;
        let inner = sp(j - 1)?.commutator(&sandwich)?.mul(&sz(j - 1)?)?;
        let minus = &(&sm(j - 2)? * (-a_far)) + &(&inner * 0.5);
        record("sigma-", j, &minus * (1.0 / a_near), sm(j)?)?;
    }
    Ok(LadderReport { identities })
}

/// Number of generator eigenvalues with magnitude below `tol`.
pub fn null_space_dimension(sop: &Superoperator, tol: f64) -> Result<usize> {
    Ok(sop.spectrum()?.iter().filter(|l| l.norm() < tol).count())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniquenessWitness {
    pub reductions: Vec<BoundaryReduction>,
    pub ladder: LadderReport,
    /// Closure of `H` together with the nonzero Lindblad operators.
    pub closure: ClosureReport,
    pub null_dim: usize,
}

impl UniquenessWitness {
    /// All three witnesses point to a unique steady state.
    pub fn consistent(&self) -> bool {
        !self.reductions.is_empty() && self.ladder.all_hold() && self.closure.saturated && self.null_dim == 1
    }
}

pub fn uniqueness_audit(spec: &ChainSpec, cfg: &DrivingConfig) -> Result<UniquenessWitness> {
    let n = spec.n();
    let h = build_hamiltonian(spec)?;
    let ls = build_lindblad_set(cfg, n)?;
    let reductions = reduce_boundaries(&ls)?;
    let ladder = verify_ladder_recursion(spec)?;
    let mut gens = vec![h.clone()];
    gens.extend(ls.operators());
    let closure = algebra_closure(&gens, n, DEFAULT_MAX_ROUNDS)?;
    let sop = assemble(&h, &ls, n, SolverMode::Dense)?;
    let null_dim = null_space_dimension(&sop, NULL_THRESHOLD)?;
    Ok(UniquenessWitness {
        reductions,
        ladder,
        closure,
        null_dim,
    })
}
