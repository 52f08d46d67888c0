//! Local unitaries `A`, the global `U = A ⊗ … ⊗ A`, and the checks that
//! `U` fixes the Hamiltonian and the energy current while carrying the
//! NORMAL Lindblad set onto the INVERTED one.
//!
//! Conjugation acts letter by letter, so `U X U†` is computed in the Pauli
//! layer from the 3×3 rotation `R` with `A σ^a A† = Σ_b R[a][b] σ^b`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::chain::{build_hamiltonian, ChainSpec, ModelKind};
use crate::currents::{current_profile, energy_current_op, spin_current_op, CurrentProfile};
use crate::driving::{build_lindblad_set, invert_baths, DrivingCase, DrivingConfig};
use crate::error::{Error, Result};
use crate::liouvillian::{assemble, steady_state_with, SolverMode, SolverOptions, SteadyStateResult};
use crate::pauli::{DenseOperator, OperatorSum, Pauli, DEFAULT_DENSE_OPERATOR_LIMIT};

/// Coefficient tolerance for operator identities in the Pauli layer.
pub const SYMBOLIC_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LocalUnitary {
    pub case: DrivingCase,
    /// Present for the θ-parameterized cases.
    pub theta: Option<f64>,
    /// Row-major 2×2 entries.
    pub entries: [[Complex64; 2]; 2],
}

impl LocalUnitary {
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let e = &self.entries;
        DMatrix::from_row_slice(2, 2, &[e[0][0], e[0][1], e[1][0], e[1][1]])
    }

    /// Largest entry of `|A†A − I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let m = self.matrix();
        (m.adjoint() * &m - DMatrix::identity(2, 2))
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

/// The case-specific single-site unitary.
pub fn build_a(case: DrivingCase, theta: f64) -> Result<LocalUnitary> {
    let r = FRAC_1_SQRT_2;
    let i_r = c(0.0, r);
    let check_theta = || -> Result<f64> {
        if !(theta.is_finite() && (0.0..=FRAC_PI_2).contains(&theta)) {
            return Err(Error::spec(format!("theta must lie in [0, pi/2], got {theta}")));
        }
        Ok(theta)
    };
    let (entries, theta) = match case {
        DrivingCase::XXyTheta => {
            let t = check_theta()?;
            let e = c(0.0, t).exp();
            ([[ZERO, c(r, r)], [-e * c(r, -r), ZERO]], Some(t))
        }
        DrivingCase::XyOrtho => ([[ZERO, i_r * c(1.0, 1.0)], [i_r * c(1.0, -1.0), ZERO]], None),
        DrivingCase::YYzTheta => {
            let t = check_theta()?;
            let (p, m) = ((1.0 + t.sin()).sqrt() * r, (1.0 - t.sin()).max(0.0).sqrt() * r);
            ([[c(0.0, p), c(m, 0.0)], [c(-m, 0.0), c(0.0, -p)]], Some(t))
        }
        DrivingCase::YzOrtho => ([[-i_r, i_r * c(0.0, -1.0)], [i_r * c(0.0, 1.0), i_r]], None),
        DrivingCase::ZXzTheta => {
            let t = check_theta()?;
            let (m, p) = ((1.0 - t.cos()).max(0.0).sqrt(), (1.0 + t.cos()).sqrt());
            ([[i_r * m, i_r * p], [i_r * p, -i_r * m]], Some(t))
        }
        DrivingCase::XzOrtho => ([[-i_r, i_r], [i_r, i_r]], None),
    };
    Ok(LocalUnitary { case, theta, entries })
}

/// Images of `σˣ, σʸ, σᶻ` under `A(·)A†`, as rows of a real rotation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConjugationTable {
    pub rotation: [[f64; 3]; 3],
    /// Largest imaginary part discarded while reading off the rotation.
    pub imag_residue: f64,
}

const AXES: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

impl ConjugationTable {
    pub fn determinant(&self) -> f64 {
        let r = &self.rotation;
        r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1]) - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
    }

    /// Largest entry of `|R Rᵀ − I|`.
    pub fn orthogonality_residual(&self) -> f64 {
        let r = &self.rotation;
        let mut worst: f64 = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let dot: f64 = (0..3).map(|k| r[a][k] * r[b][k]).sum();
                worst = worst.max((dot - if a == b { 1.0 } else { 0.0 }).abs());
            }
        }
        worst
    }

    /// Table of the inverse map `A†(·)A`.
    pub fn inverse(&self) -> ConjugationTable {
        let r = &self.rotation;
        ConjugationTable {
            rotation: std::array::from_fn(|a| std::array::from_fn(|b| r[b][a])),
            imag_residue: self.imag_residue,
        }
    }

    /// Single-site images as operators on one site.
    pub fn images(&self) -> Result<[OperatorSum; 3]> {
        let img = |a: usize| -> Result<OperatorSum> {
            let mut out = OperatorSum::zero(1)?;
            for (b, p) in AXES.iter().enumerate() {
                out = &out + &(&OperatorSum::site(1, 1, *p)? * self.rotation[a][b]);
            }
            Ok(out)
        };
        Ok([img(0)?, img(1)?, img(2)?])
    }

    /// `U op U†` with `U` the tensor power of the tabulated unitary.
    pub fn conjugate(&self, op: &OperatorSum) -> Result<OperatorSum> {
        let n = op.n();
        let mut out = OperatorSum::zero(n)?;
        for term in op.iter() {
            let mut image = OperatorSum::identity(n)? * term.coeff();
            for (k, letter) in term.letters().into_iter().enumerate() {
                let Some(a) = AXES.iter().position(|p| *p == letter) else {
                    continue;
                };
                let mut site_image = OperatorSum::zero(n)?;
                for (b, p) in AXES.iter().enumerate() {
                    let w = self.rotation[a][b];
                    if w != 0.0 {
                        site_image = &site_image + &(&OperatorSum::site(n, k + 1, *p)? * w);
                    }
                }
                image = image.mul(&site_image)?;
            }
            out = &out + &image;
        }
        Ok(out)
    }
}

pub fn conjugation_table(a: &LocalUnitary) -> ConjugationTable {
    let m = a.matrix();
    let ad = m.adjoint();
    let paulis: Vec<DMatrix<Complex64>> = AXES
        .iter()
        .map(|p| {
            let e = p.matrix();
            DMatrix::from_row_slice(2, 2, &[e[0][0], e[0][1], e[1][0], e[1][1]])
        })
        .collect();
    let mut rotation = [[0.0; 3]; 3];
    let mut imag: f64 = 0.0;
    for (ai, sa) in paulis.iter().enumerate() {
        let img = &m * sa * &ad;
        for (bi, sb) in paulis.iter().enumerate() {
            let coeff = (sb * &img).trace() * 0.5;
            imag = imag.max(coeff.im.abs());
            rotation[ai][bi] = coeff.re;
        }
    }
    ConjugationTable {
        rotation,
        imag_residue: imag,
    }
}

/// `A ⊗ A ⊗ … ⊗ A` on `n` sites.
pub fn build_u(a: &LocalUnitary, n: usize) -> Result<DenseOperator> {
    if n == 0 || n > DEFAULT_DENSE_OPERATOR_LIMIT {
        return Err(Error::Capacity {
            what: "dense global unitary",
            n,
            limit: DEFAULT_DENSE_OPERATOR_LIMIT,
        });
    }
    let m = a.matrix();
    let mut u = m.clone();
    for _ in 1..n {
        u = u.kronecker(&m);
    }
    DenseOperator::new(n, u)
}

/// Hamiltonian family each case is stated for.
pub fn matching_family(case: DrivingCase) -> ModelKind {
    match case {
        DrivingCase::XXyTheta | DrivingCase::XyOrtho => ModelKind::Xxz,
        _ => ModelKind::Xxx,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipatorMatch {
    pub label: String,
    /// INVERTED-set operator closest to `U L U†` up to a phase.
    pub partner: Option<String>,
    pub phase: Complex64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MappingReport {
    pub case: DrivingCase,
    pub theta: Option<f64>,
    pub n: usize,
    pub model: ModelKind,
    /// `‖UHU† − H‖_F`.
    pub hamiltonian_residual: f64,
    /// Largest Pauli-coefficient difference in `UHU† − H`.
    pub hamiltonian_coeff_residual: f64,
    pub dissipator_match: Vec<DissipatorMatch>,
    /// `max_j ‖U†J^E_jU − J^E_j‖_F` over interior sites.
    pub energy_current_residual: f64,
    pub energy_current_coeff_residual: f64,
    /// −1 when every bond flips, +1 when every bond is kept, 0 otherwise.
    pub spin_current_sign: i8,
    /// `max_j ‖U†J^M_jU − J^M_j‖_F` and `max_j ‖U†J^M_jU + J^M_j‖_F`.
    pub spin_current_residuals: [f64; 2],
    /// `max |UHU† − H|` from dense matrices, for chains small enough to form `U`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dense_hamiltonian_residual: Option<f64>,
}

impl MappingReport {
    pub fn max_dissipator_residual(&self) -> f64 {
        self.dissipator_match.iter().map(|m| m.residual).fold(0.0, f64::max)
    }

    pub fn all_dissipators_matched(&self, tol: f64) -> bool {
        self.dissipator_match.iter().all(|m| m.partner.is_some() && m.residual < tol)
    }
}

/// Like [`measure_mapping`], but rejects chains outside the case's family.
pub fn verify_mapping(spec: &ChainSpec, cfg: &DrivingConfig) -> Result<MappingReport> {
    let want = matching_family(cfg.case);
    if spec.kind() != want {
        return Err(Error::spec(format!(
            "{} is stated for the {} chain, got {}",
            cfg.case,
            want.as_str(),
            spec.kind().as_str()
        )));
    }
    measure_mapping(spec, cfg)
}

/// Residuals of the mapping for any chain and case; nothing is asserted.
pub fn measure_mapping(spec: &ChainSpec, cfg: &DrivingConfig) -> Result<MappingReport> {
    cfg.validate()?;
    let n = spec.n();
    let a = build_a(cfg.case, cfg.theta)?;
    let table = conjugation_table(&a);
    let inverse = table.inverse();

    let h = build_hamiltonian(spec)?;
    let dh = &table.conjugate(&h)? - &h;

    let normal = build_lindblad_set(cfg, n)?;
    let inverted = build_lindblad_set(&invert_baths(cfg), n)?;
    let mut dissipator_match = Vec::new();
    for l in normal.nonzero() {
        let image = table.conjugate(&l.op)?;
        let mut best = DissipatorMatch {
            label: l.label.clone(),
            partner: None,
            phase: c(1.0, 0.0),
            residual: image.frobenius_norm(),
        };
        for cand in inverted.nonzero() {
            let overlap = cand.op.coeff_inner(&image);
            let phase = if overlap.norm() > 0.0 {
                overlap / overlap.norm()
            } else {
                c(1.0, 0.0)
            };
            let residual = (&image - &(&cand.op * phase)).frobenius_norm();
            if residual < best.residual {
                best = DissipatorMatch {
                    label: l.label.clone(),
                    partner: Some(cand.label.clone()),
                    phase,
                    residual,
                };
            }
        }
        dissipator_match.push(best);
    }

    let (mut e_norm, mut e_coeff): (f64, f64) = (0.0, 0.0);
    for j in 2..n {
        let op = energy_current_op(spec, j)?;
        let d = &inverse.conjugate(&op)? - &op;
        e_norm = e_norm.max(d.frobenius_norm());
        e_coeff = e_coeff.max(d.max_coeff());
    }

    let (mut keep, mut flip): (f64, f64) = (0.0, 0.0);
    let (mut keep_c, mut flip_c): (f64, f64) = (0.0, 0.0);
    for j in 1..n {
        let op = spin_current_op(spec, j)?;
        let img = inverse.conjugate(&op)?;
        let dk = &img - &op;
        let df = &img + &op;
        keep = keep.max(dk.frobenius_norm());
        flip = flip.max(df.frobenius_norm());
        keep_c = keep_c.max(dk.max_coeff());
        flip_c = flip_c.max(df.max_coeff());
    }
    let spin_current_sign = if flip_c < SYMBOLIC_TOL {
        -1
    } else if keep_c < SYMBOLIC_TOL {
        1
    } else {
        0
    };

    let dense_hamiltonian_residual = if n <= 8 {
        let u = build_u(&a, n)?.into_matrix();
        let hd = h.to_dense()?.into_matrix();
        let d = &u * &hd * u.adjoint() - &hd;
        Some(d.iter().map(|v| v.norm()).fold(0.0, f64::max))
    } else {
        None
    };

    Ok(MappingReport {
        case: cfg.case,
        theta: a.theta,
        n,
        model: spec.kind(),
        hamiltonian_residual: dh.frobenius_norm(),
        hamiltonian_coeff_residual: dh.max_coeff(),
        dissipator_match,
        energy_current_residual: e_norm,
        energy_current_coeff_residual: e_coeff,
        spin_current_sign,
        spin_current_residuals: [keep, flip],
        dense_hamiltonian_residual,
    })
}

/// Steady states of both orientations, linked through `U`.
#[derive(Clone, Debug)]
pub struct Correspondence {
    pub normal: SteadyStateResult,
    pub inverted: SteadyStateResult,
    pub normal_profile: CurrentProfile,
    pub inverted_profile: CurrentProfile,
    /// `max |U ρ U† − ρ_inv|`.
    pub state_residual: f64,
    /// `max_j |⟨J^E_j⟩ − ⟨J^E_j⟩_inv|`.
    pub energy_delta: f64,
    /// `max_j |⟨J^M_j⟩ + ⟨J^M_j⟩_inv|`.
    pub spin_sum: f64,
}

/// Solves the NORMAL and INVERTED configurations (in parallel) and compares them.
pub fn steady_state_correspondence(
    spec: &ChainSpec,
    cfg: &DrivingConfig,
    mode: SolverMode,
    opts: &SolverOptions,
) -> Result<Correspondence> {
    let n = spec.n();
    let h = build_hamiltonian(spec)?;
    let solve = |cfg: &DrivingConfig| -> Result<(SteadyStateResult, CurrentProfile)> {
        let sop = assemble(&h, &build_lindblad_set(cfg, n)?, n, mode)?;
        let ss = steady_state_with(&sop, opts)?;
        let profile = current_profile(&ss.rho, spec)?;
        Ok((ss, profile))
    };
    let inverted_cfg = invert_baths(cfg);
    let (normal, inverted) = std::thread::scope(|s| {
        let handle = s.spawn(|| solve(&inverted_cfg));
        let normal = solve(cfg);
        (normal, handle.join().expect("inverted solve panicked"))
    });
    let (normal, normal_profile) = normal?;
    let (inverted, inverted_profile) = inverted?;

    let u = build_u(&build_a(cfg.case, cfg.theta)?, n)?.into_matrix();
    let mapped = &u * normal.rho.matrix() * u.adjoint();
    let state_residual = (mapped - inverted.rho.matrix())
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let energy_delta = normal_profile
        .energy
        .iter()
        .zip(&inverted_profile.energy)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let spin_sum = normal_profile
        .spin
        .iter()
        .zip(&inverted_profile.spin)
        .map(|(a, b)| (a + b).abs())
        .fold(0.0, f64::max);
    Ok(Correspondence {
        normal,
        inverted,
        normal_profile,
        inverted_profile,
        state_residual,
        energy_delta,
        spin_sum,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::driving::OrthoAmplitudes;
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    const THETAS: [f64; 4] = [0.0, FRAC_PI_6, FRAC_PI_4, FRAC_PI_2];

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-15
    }

    fn cfg_for(case: DrivingCase, theta: f64) -> DrivingConfig {
        if case.is_theta() {
            DrivingConfig::theta_case(case, 1.0, 0.5, theta).unwrap()
        } else {
            DrivingConfig::orthogonal(case, OrthoAmplitudes::new(1.0, 0.7, 0.5, 0.3, 0.8, 0.4)).unwrap()
        }
    }

    fn spec_for(case: DrivingCase, n: usize) -> ChainSpec {
        match matching_family(case) {
            ModelKind::Xxz => ChainSpec::graded_xxz(n, 1.0, 0.5, 1.5).unwrap(),
            ModelKind::Xxx => ChainSpec::graded_xxx(n, 0.5, 1.5).unwrap(),
        }
    }

    fn rotation_close(t: &ConjugationTable, expect: [[f64; 3]; 3]) -> bool {
        (0..3).all(|a| (0..3).all(|b| (t.rotation[a][b] - expect[a][b]).abs() < 1e-13))
    }

    #[test]
    fn x_xy_at_zero_angle() {
        let a = build_a(DrivingCase::XXyTheta, 0.0).unwrap();
        let r = FRAC_1_SQRT_2;
        assert!(close(a.entries[0][0], ZERO));
        assert!(close(a.entries[0][1], c(r, r)));
        assert!(close(a.entries[1][0], c(-r, r)));
        assert!(close(a.entries[1][1], ZERO));
    }

    #[test]
    fn y_yz_at_right_angle_is_diagonal() {
        let a = build_a(DrivingCase::YYzTheta, FRAC_PI_2).unwrap();
        assert!(close(a.entries[0][0], c(0.0, 1.0)));
        assert!(a.entries[0][1].norm() < 1e-8);
        assert!(a.entries[1][0].norm() < 1e-8);
        assert!(close(a.entries[1][1], c(0.0, -1.0)));
    }

    #[test]
    fn every_a_is_unitary() {
        for case in DrivingCase::ALL {
            for theta in THETAS {
                let a = build_a(case, theta).unwrap();
                assert!(a.unitarity_residual() < 1e-14, "{case} {theta}");
            }
        }
        assert!(build_a(DrivingCase::XXyTheta, -0.1).is_err());
        assert!(build_a(DrivingCase::ZXzTheta, 2.0).is_err());
    }

    #[test]
    fn conjugation_tables() {
        for theta in THETAS {
            let (s, co) = theta.sin_cos();
            let cases = [
                (DrivingCase::XXyTheta, [[-s, co, 0.0], [co, s, 0.0], [0.0, 0.0, -1.0]]),
                (DrivingCase::XyOrtho, [[0.0, -1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, -1.0]]),
                (DrivingCase::YYzTheta, [[-1.0, 0.0, 0.0], [0.0, -s, co], [0.0, co, s]]),
                (DrivingCase::YzOrtho, [[-1.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, -1.0, 0.0]]),
                (DrivingCase::ZXzTheta, [[co, 0.0, s], [0.0, -1.0, 0.0], [s, 0.0, -co]]),
                (DrivingCase::XzOrtho, [[0.0, 0.0, -1.0], [0.0, -1.0, 0.0], [-1.0, 0.0, 0.0]]),
            ];
            for (case, expect) in cases {
                let t = conjugation_table(&build_a(case, theta).unwrap());
                assert!(rotation_close(&t, expect), "{case} {theta}: {:?}", t.rotation);
                assert!(t.imag_residue < 1e-15);
                assert!(t.orthogonality_residual() < 1e-14);
                assert!((t.determinant() - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn images_are_unit_pauli_combinations() {
        let t = conjugation_table(&build_a(DrivingCase::XXyTheta, FRAC_PI_3).unwrap());
        let imgs = t.images().unwrap();
        let x = &imgs[0];
        assert!((x.coeff_of_str("X") - c(-FRAC_PI_3.sin(), 0.0)).norm() < 1e-15);
        assert!((x.coeff_of_str("Y") - c(FRAC_PI_3.cos(), 0.0)).norm() < 1e-15);
        for img in &imgs {
            assert!((img.frobenius_norm() - 2f64.sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn global_unitary() {
        let a = build_a(DrivingCase::YYzTheta, FRAC_PI_2).unwrap();
        let u1 = build_u(&a, 1).unwrap();
        assert!((u1.matrix() - a.matrix()).iter().all(|v| v.norm() < 1e-15));
        let u2 = build_u(&a, 2).unwrap();
        let diag = [-1.0, 1.0, 1.0, -1.0];
        for (k, d) in diag.iter().enumerate() {
            assert!((u2.matrix()[(k, k)] - c(*d, 0.0)).norm() < 1e-12);
        }
        for case in DrivingCase::ALL {
            let u = build_u(&build_a(case, FRAC_PI_6).unwrap(), 4).unwrap().into_matrix();
            let dev = (u.adjoint() * &u - DMatrix::identity(16, 16)).iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(dev < 1e-13, "{case}");
        }
        assert!(build_u(&a, 13).is_err());
    }

    /// The Pauli-layer conjugation must agree with `U · op · U†` on dense matrices.
    #[test]
    fn symbolic_conjugation_matches_dense() {
        let spec = ChainSpec::graded_xxz(3, 0.9, 0.5, 1.5).unwrap();
        let op = &build_hamiltonian(&spec).unwrap() + &energy_current_op(&spec, 2).unwrap();
        for case in DrivingCase::ALL {
            let a = build_a(case, FRAC_PI_3).unwrap();
            let sym = conjugation_table(&a).conjugate(&op).unwrap().to_dense().unwrap().into_matrix();
            let u = build_u(&a, 3).unwrap().into_matrix();
            let dense = &u * op.to_dense().unwrap().matrix() * u.adjoint();
            assert!((sym - dense).iter().all(|v| v.norm() < 1e-13), "{case}");
        }
    }

    #[test]
    fn x_xy_graded_xxz_mapping() {
        let spec = ChainSpec::graded_xxz(4, 1.0, 0.5, 1.5).unwrap();
        let cfg = DrivingConfig::theta_case(DrivingCase::XXyTheta, 1.0, 0.5, FRAC_PI_3).unwrap();
        let rep = verify_mapping(&spec, &cfg).unwrap();
        assert!(rep.hamiltonian_residual < 1e-12);
        assert!(rep.energy_current_residual < 1e-12);
        assert_eq!(rep.spin_current_sign, -1);
        assert!(rep.all_dissipators_matched(1e-12));
        assert!(rep.dense_hamiltonian_residual.unwrap() < 1e-12);
    }

    #[test]
    fn xy_ortho_maps_l1_to_minus_i_l4() {
        let spec = ChainSpec::graded_xxz(3, 1.0, 0.5, 1.5).unwrap();
        let cfg = cfg_for(DrivingCase::XyOrtho, 0.0);
        let rep = verify_mapping(&spec, &cfg).unwrap();
        let l1 = rep.dissipator_match.iter().find(|m| m.label == "L1").unwrap();
        assert_eq!(l1.partner.as_deref(), Some("L4"));
        assert!(close(l1.phase, c(0.0, -1.0)) || (l1.phase - c(0.0, -1.0)).norm() < 1e-12);
        assert!(l1.residual < 1e-12);
        assert_eq!(rep.spin_current_sign, -1);
    }

    #[test]
    fn z_xz_graded_xxx_energy_current() {
        let spec = ChainSpec::graded_xxx(4, 0.5, 1.5).unwrap();
        let cfg = cfg_for(DrivingCase::ZXzTheta, FRAC_PI_4);
        let rep = verify_mapping(&spec, &cfg).unwrap();
        assert!(rep.energy_current_residual < 1e-12);
        assert!(rep.hamiltonian_residual < 1e-12);
        assert!(rep.all_dissipators_matched(1e-12));
    }

    #[test]
    fn every_case_matches_its_table() {
        for case in DrivingCase::ALL {
            for n in 3..=4 {
                let spec = spec_for(case, n);
                for theta in THETAS {
                    let rep = verify_mapping(&spec, &cfg_for(case, theta)).unwrap();
                    assert!(rep.hamiltonian_coeff_residual < 1e-13, "{case}");
                    assert!(rep.energy_current_coeff_residual < 1e-13, "{case}");
                    assert!(rep.all_dissipators_matched(1e-12), "{case} {:?}", rep.dissipator_match);
                    for m in &rep.dissipator_match {
                        assert!((m.phase.norm() - 1.0).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn family_mismatch_is_rejected_but_measurable() {
        let spec = ChainSpec::graded_xxz(3, 1.0, 0.5, 1.5).unwrap();
        let cfg = cfg_for(DrivingCase::ZXzTheta, FRAC_PI_4);
        assert!(verify_mapping(&spec, &cfg).is_err());
        let rep = measure_mapping(&spec, &cfg).unwrap();
        assert!(rep.hamiltonian_residual.is_finite());
    }

    #[test]
    fn steady_states_correspond_through_u() {
        let spec = ChainSpec::graded_xxz(3, 1.0, 0.5, 1.5).unwrap();
        let cfg = cfg_for(DrivingCase::XXyTheta, FRAC_PI_4);
        let corr = steady_state_correspondence(&spec, &cfg, SolverMode::Dense, &SolverOptions::default()).unwrap();
        assert!(corr.state_residual < 1e-8);
        assert!(corr.energy_delta < 1e-8);
        assert!(corr.spin_sum < 1e-8);
        assert!(corr.normal_profile.max_abs_energy() > 1e-6);
    }
}
