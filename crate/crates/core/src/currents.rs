//! Spin and energy current operators and their steady-state profiles.
//!
//! Spin current on bond `j`: `J^M_j = 2α_j (σˣ_j σʸ_{j+1} − σʸ_j σˣ_{j+1})`.
//!
//! Energy current at interior site `j`, acting on `(j−1, j, j+1)`:
//!
//! ```text
//! J^E_j = 2 α_{j−1} α_j (σʸσᶻσˣ − σˣσᶻσʸ)
//!       + 2 Δ_{j−1} α_j (σᶻσˣσʸ − σᶻσʸσˣ)
//!       + 2 α_{j−1} Δ_j (σˣσʸσᶻ − σʸσˣσᶻ)
//! ```
//!
//! plus the field part `½ B_j (J^M_{j−1} + J^M_j)`. For the Heisenberg
//! chain `Δ_i = α_i` and the three brackets collapse into one triple product.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::ChainSpec;
use crate::error::{Error, Result};
use crate::pauli::{DenseOperator, OperatorSum, Pauli};

/// Imaginary parts above this are reported alongside the real value.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;

fn triple(n: usize, j: usize, letters: [Pauli; 3], coeff: f64) -> Result<OperatorSum> {
    OperatorSum::product_term(
        n,
        Complex64::new(coeff, 0.0),
        &[(j - 1, letters[0]), (j, letters[1]), (j + 1, letters[2])],
    )
}

pub fn spin_current_op(spec: &ChainSpec, bond: usize) -> Result<OperatorSum> {
    spec.check_bond(bond)?;
    let n = spec.n();
    let a = 2.0 * spec.hopping(bond);
    let xy = OperatorSum::product_term(n, Complex64::new(a, 0.0), &[(bond, Pauli::X), (bond + 1, Pauli::Y)])?;
    let yx = OperatorSum::product_term(n, Complex64::new(a, 0.0), &[(bond, Pauli::Y), (bond + 1, Pauli::X)])?;
    Ok(&xy - &yx)
}

fn check_site(spec: &ChainSpec, site: usize) -> Result<()> {
    let n = spec.n();
    if n < 3 || site < 2 || site > n - 1 {
        return Err(Error::OutOfRange {
            what: "interior site",
            index: site,
            lo: 2,
            hi: n.saturating_sub(1),
        });
    }
    Ok(())
}

/// Exchange part of the energy current at interior site `j`.
pub fn exchange_energy_current_op(spec: &ChainSpec, site: usize) -> Result<OperatorSum> {
    check_site(spec, site)?;
    use Pauli::*;
    let n = spec.n();
    let (a_l, a_r) = (spec.hopping(site - 1), spec.hopping(site));
    let (d_l, d_r) = (spec.zz(site - 1), spec.zz(site));
    let terms = [
        ([Y, Z, X], 2.0 * a_l * a_r),
        ([X, Z, Y], -2.0 * a_l * a_r),
        ([Z, X, Y], 2.0 * d_l * a_r),
        ([Z, Y, X], -2.0 * d_l * a_r),
        ([X, Y, Z], 2.0 * a_l * d_r),
        ([Y, X, Z], -2.0 * a_l * d_r),
    ];
    let mut out = OperatorSum::zero(n)?;
    for (letters, c) in terms {
        out = &out + &triple(n, site, letters, c)?;
    }
    Ok(out)
}

/// Field part `½ B_j (J^M_{j−1} + J^M_j)`.
pub fn magnetic_current_op(spec: &ChainSpec, site: usize) -> Result<OperatorSum> {
    check_site(spec, site)?;
    let b = spec.fields_z()[site - 1];
    let both = &spin_current_op(spec, site - 1)? + &spin_current_op(spec, site)?;
    Ok(&both * (0.5 * b))
}

/// Full energy current at interior site `j`, field part included when `B_j ≠ 0`.
pub fn energy_current_op(spec: &ChainSpec, site: usize) -> Result<OperatorSum> {
    let exchange = exchange_energy_current_op(spec, site)?;
    if spec.fields_z()[site - 1] == 0.0 {
        return Ok(exchange);
    }
    Ok(&exchange + &magnetic_current_op(spec, site)?)
}

/// `tr(ρ · op)` without forming the dense operator.
pub fn expectation_complex(rho: &DenseOperator, op: &OperatorSum) -> Result<Complex64> {
    if rho.n() != op.n() {
        return Err(Error::Dimension {
            expected: rho.n(),
            found: op.n(),
        });
    }
    let n = op.n();
    let m = rho.matrix();
    let dim = rho.dim();
    let mut total = Complex64::new(0.0, 0.0);
    for (w, c) in op.words() {
        let act = w.action(n);
        let mut acc = Complex64::new(0.0, 0.0);
        for b in 0..dim {
            acc += m[(b, b ^ act.flip)] * act.amp(b);
        }
        total += c * acc;
    }
    Ok(total)
}

/// Real expectation value; the imaginary residue is dropped, see
/// [`expectation_complex`] to inspect it.
pub fn expectation(rho: &DenseOperator, op: &OperatorSum) -> Result<f64> {
    Ok(expectation_complex(rho, op)?.re)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurrentProfile {
    /// Entry `j − 1` is bond `(j, j+1)`.
    pub spin: Vec<f64>,
    /// Entry `j − 2` is interior site `j`, field part included.
    pub energy: Vec<f64>,
    /// Field part of the energy current, present when any `B_j ≠ 0`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub magnetic: Option<Vec<f64>>,
    /// Largest imaginary part met while evaluating the profile.
    pub max_imag_residue: f64,
}

fn spread(v: &[f64]) -> f64 {
    match v.first() {
        Some(first) => v.iter().map(|x| (x - first).abs()).fold(0.0, f64::max),
        None => 0.0,
    }
}

impl CurrentProfile {
    pub fn spin_spread(&self) -> f64 {
        spread(&self.spin)
    }

    pub fn energy_spread(&self) -> f64 {
        spread(&self.energy)
    }

    pub fn max_abs_energy(&self) -> f64 {
        self.energy.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_spin(&self) -> f64 {
        self.spin.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn imaginary_residue_reported(&self) -> bool {
        self.max_imag_residue > IMAG_RESIDUE_TOL
    }
}

pub fn current_profile(rho: &DenseOperator, spec: &ChainSpec) -> Result<CurrentProfile> {
    let n = spec.n();
    let mut imag: f64 = 0.0;
    let mut eval = |op: OperatorSum| -> Result<f64> {
        let v = expectation_complex(rho, &op)?;
        imag = imag.max(v.im.abs());
        Ok(v.re)
    };
    let spin = (1..n)
        .map(|j| eval(spin_current_op(spec, j)?))
        .collect::<Result<Vec<_>>>()?;
    let energy = (2..n)
        .map(|j| eval(energy_current_op(spec, j)?))
        .collect::<Result<Vec<_>>>()?;
    let magnetic = if spec.has_field() {
        Some(
            (2..n)
                .map(|j| eval(magnetic_current_op(spec, j)?))
                .collect::<Result<Vec<_>>>()?,
        )
    } else {
        None
    };
    Ok(CurrentProfile {
        spin,
        energy,
        magnetic,
        max_imag_residue: imag,
    })
}
