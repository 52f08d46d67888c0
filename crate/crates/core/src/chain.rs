//! XXZ and Heisenberg (XXX) chain Hamiltonians.
//!
//! ```text
//! XXZ:  H = Σ_i α (σˣ_i σˣ_{i+1} + σʸ_i σʸ_{i+1}) + Δ_i σᶻ_i σᶻ_{i+1} + Σ_j B_j σᶻ_j
//! XXX:  H = Σ_i α_i (σˣ_i σˣ_{i+1} + σʸ_i σʸ_{i+1} + σᶻ_i σᶻ_{i+1}) + Σ_j B_j σᶻ_j
//! ```
//!
//! Bonds are indexed `1..=N-1`, bond `i` joining sites `i` and `i + 1`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{OperatorSum, Pauli};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    #[serde(rename = "XXZ")]
    Xxz,
    #[serde(rename = "XXX")]
    Xxx,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Xxz => "XXZ",
            ModelKind::Xxx => "XXX",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Couplings {
    /// Uniform hopping `alpha` and per-bond anisotropies `deltas`.
    Xxz { alpha: f64, deltas: Vec<f64> },
    /// Per-bond isotropic couplings.
    Xxx { alphas: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainSpec {
    n: usize,
    couplings: Couplings,
    fields_z: Vec<f64>,
}

impl ChainSpec {
    pub fn xxz(n: usize, alpha: f64, deltas: Vec<f64>) -> Result<Self> {
        let spec = ChainSpec {
            n,
            fields_z: vec![0.0; n],
            couplings: Couplings::Xxz { alpha, deltas },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn xxx(n: usize, alphas: Vec<f64>) -> Result<Self> {
        let spec = ChainSpec {
            n,
            fields_z: vec![0.0; n],
            couplings: Couplings::Xxx { alphas },
        };
        spec.validate()?;
        Ok(spec)
    }

    /// XXZ chain with `Δ_i` linearly spaced from `lo` to `hi`.
    pub fn graded_xxz(n: usize, alpha: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::xxz(n, alpha, linspace(lo, hi, n.saturating_sub(1)))
    }

    /// XXX chain with `α_i` linearly spaced from `lo` to `hi`.
    pub fn graded_xxx(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::xxx(n, linspace(lo, hi, n.saturating_sub(1)))
    }

    pub fn with_fields(mut self, fields_z: Vec<f64>) -> Result<Self> {
        self.fields_z = fields_z;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::spec(format!("chain needs N >= 2, got {}", self.n)));
        }
        let bonds = self.n - 1;
        let check = |name: &str, v: &[f64], len: usize| -> Result<()> {
            if v.len() != len {
                return Err(Error::spec(format!(
                    "{name} must have {len} entries for N = {}, got {}",
                    self.n,
                    v.len()
                )));
            }
            if let Some(x) = v.iter().find(|x| !x.is_finite()) {
                return Err(Error::spec(format!("{name} contains non-finite value {x}")));
            }
            Ok(())
        };
        match &self.couplings {
            Couplings::Xxz { alpha, deltas } => {
                if !alpha.is_finite() {
                    return Err(Error::spec(format!("alpha must be finite, got {alpha}")));
                }
                check("deltas", deltas, bonds)?;
            }
            Couplings::Xxx { alphas } => check("alphas", alphas, bonds)?,
        }
        check("fields_z", &self.fields_z, self.n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ModelKind {
        match self.couplings {
            Couplings::Xxz { .. } => ModelKind::Xxz,
            Couplings::Xxx { .. } => ModelKind::Xxx,
        }
    }

    pub fn couplings(&self) -> &Couplings {
        &self.couplings
    }

    pub fn fields_z(&self) -> &[f64] {
        &self.fields_z
    }

    pub fn has_field(&self) -> bool {
        self.fields_z.iter().any(|b| *b != 0.0)
    }

    /// XY-plane coupling of bond `i` (1-based).
    pub fn hopping(&self, bond: usize) -> f64 {
        match &self.couplings {
            Couplings::Xxz { alpha, .. } => *alpha,
            Couplings::Xxx { alphas } => alphas[bond - 1],
        }
    }

    /// σᶻσᶻ coupling of bond `i` (1-based): `Δ_i` or `α_i`.
    pub fn zz(&self, bond: usize) -> f64 {
        match &self.couplings {
            Couplings::Xxz { deltas, .. } => deltas[bond - 1],
            Couplings::Xxx { alphas } => alphas[bond - 1],
        }
    }

    /// The chain with sites relabeled `i → N + 1 − i`.
    pub fn mirrored(&self) -> ChainSpec {
        let couplings = match &self.couplings {
            Couplings::Xxz { alpha, deltas } => Couplings::Xxz {
                alpha: *alpha,
                deltas: deltas.iter().rev().copied().collect(),
            },
            Couplings::Xxx { alphas } => Couplings::Xxx {
                alphas: alphas.iter().rev().copied().collect(),
            },
        };
        ChainSpec {
            n: self.n,
            couplings,
            fields_z: self.fields_z.iter().rev().copied().collect(),
        }
    }

    pub(crate) fn check_bond(&self, bond: usize) -> Result<()> {
        if bond == 0 || bond >= self.n {
            return Err(Error::OutOfRange {
                what: "bond",
                index: bond,
                lo: 1,
                hi: self.n - 1,
            });
        }
        Ok(())
    }
}

pub(crate) fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

fn two_site(n: usize, i: usize, p: Pauli, coeff: f64) -> Result<OperatorSum> {
    OperatorSum::product_term(n, Complex64::new(coeff, 0.0), &[(i, p), (i + 1, p)])
}

/// Energy density of bond `i`, without field terms.
pub fn bond_hamiltonian(spec: &ChainSpec, bond: usize) -> Result<OperatorSum> {
    spec.check_bond(bond)?;
    let n = spec.n();
    let hop = spec.hopping(bond);
    Ok(&(&two_site(n, bond, Pauli::X, hop)? + &two_site(n, bond, Pauli::Y, hop)?)
        + &two_site(n, bond, Pauli::Z, spec.zz(bond))?)
}

/// `Σ_j B_j σᶻ_j`.
pub fn field_term(spec: &ChainSpec) -> Result<OperatorSum> {
    let n = spec.n();
    let mut h = OperatorSum::zero(n)?;
    for (j, b) in spec.fields_z().iter().enumerate() {
        if *b != 0.0 {
            h = &h + &(&OperatorSum::site(n, j + 1, Pauli::Z)? * *b);
        }
    }
    Ok(h)
}

pub fn build_hamiltonian(spec: &ChainSpec) -> Result<OperatorSum> {
    spec.validate()?;
    let mut h = field_term(spec)?;
    for bond in 1..spec.n() {
        h = &h + &bond_hamiltonian(spec, bond)?;
    }
    Ok(h)
}

/// The same Hamiltonian written through ladder operators,
/// `Σ_i α_i (2σ⁺_i σ⁻_{i+1} + 2σ⁻_i σ⁺_{i+1}) + zz_i σᶻ_i σᶻ_{i+1}` plus fields.
pub fn hamiltonian_as_ladder(spec: &ChainSpec) -> Result<OperatorSum> {
    spec.validate()?;
    let n = spec.n();
    let mut h = field_term(spec)?;
    for i in 1..n {
        let pm = OperatorSum::sigma_plus(n, i)?.mul(&OperatorSum::sigma_minus(n, i + 1)?)?;
        let mp = OperatorSum::sigma_minus(n, i)?.mul(&OperatorSum::sigma_plus(n, i + 1)?)?;
        let hop = &(&pm + &mp) * (2.0 * spec.hopping(i));
        h = &(&h + &hop) + &two_site(n, i, Pauli::Z, spec.zz(i))?;
    }
    Ok(h)
}
