//! Library results checked against independent dense constructions and
//! frozen reference values.

use std::f64::consts::FRAC_PI_4;

use lindbladium::currents::{current_profile, energy_current_op, spin_current_op};
use lindbladium::liouvillian::{assemble, steady_state, SolverMode};
use lindbladium::{build_hamiltonian, build_lindblad_set, ChainSpec, DrivingCase, DrivingConfig};
use nalgebra::DMatrix;
use num_complex::Complex64;

type M = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pauli(k: char) -> M {
    let (o, i) = (c(0.0, 0.0), c(1.0, 0.0));
    match k {
        'I' => M::from_row_slice(2, 2, &[i, o, o, i]),
        'X' => M::from_row_slice(2, 2, &[o, i, i, o]),
        'Y' => M::from_row_slice(2, 2, &[o, c(0.0, -1.0), c(0.0, 1.0), o]),
        'Z' => M::from_row_slice(2, 2, &[i, o, o, -i]),
        _ => unreachable!(),
    }
}

/// Site 1 is the most significant tensor factor.
fn site_op(n: usize, ops: &[(usize, char)]) -> M {
    let mut m = M::identity(1, 1);
    for s in 1..=n {
        let k = ops.iter().find(|(j, _)| *j == s).map_or('I', |(_, k)| *k);
        m = m.kronecker(&pauli(k));
    }
    m
}

fn xxz_dense(n: usize, alpha: f64, deltas: &[f64]) -> M {
    let d = 1 << n;
    let mut h = M::zeros(d, d);
    for j in 1..n {
        h += site_op(n, &[(j, 'X'), (j + 1, 'X')]) * c(alpha, 0.0);
        h += site_op(n, &[(j, 'Y'), (j + 1, 'Y')]) * c(alpha, 0.0);
        h += site_op(n, &[(j, 'Z'), (j + 1, 'Z')]) * c(deltas[j - 1], 0.0);
    }
    h
}

/// Column-stacked `ρ ↦ i[ρ,H] + Σ LρL† − ½{L†L, ρ}`.
fn liouvillian_dense(h: &M, ls: &[M]) -> M {
    let d = h.nrows();
    let id = M::identity(d, d);
    let mut s = (h.transpose().kronecker(&id) - id.kronecker(h)) * c(0.0, 1.0);
    for l in ls {
        let ldl = l.adjoint() * l;
        s += l.conjugate().kronecker(l);
        s -= (id.kronecker(&ldl) + ldl.transpose().kronecker(&id)) * c(0.5, 0.0);
    }
    s
}

fn max_diff(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|v| v.norm()).fold(0.0, f64::max)
}

fn x_xy(n: usize) -> Vec<M> {
    let (g, f, th): (f64, f64, f64) = (1.0, 0.5, FRAC_PI_4);
    let ladder = |site: usize, axis: &[(f64, char)], b: char, sign: f64| {
        let mut m = site_op(n, &[(site, b)]) * c(0.0, sign);
        for (w, k) in axis {
            m += site_op(n, &[(site, *k)]) * c(*w, 0.0);
        }
        m * c(0.5, 0.0)
    };
    let up = (g * (1.0 + f)).sqrt();
    let down = (g * (1.0 - f)).sqrt();
    let right = [(th.cos(), 'X'), (th.sin(), 'Y')];
    vec![
        ladder(1, &[(1.0, 'Y')], 'Z', 1.0) * c(up, 0.0),
        ladder(1, &[(1.0, 'Y')], 'Z', -1.0) * c(down, 0.0),
        ladder(n, &right, 'Z', 1.0) * c(down, 0.0),
        ladder(n, &right, 'Z', -1.0) * c(up, 0.0),
    ]
}

#[test]
fn hamiltonian_matches_kronecker_construction() {
    for n in 2..=4 {
        let spec = ChainSpec::graded_xxz(n, 0.8, 0.5, 1.5).unwrap();
        let ours = build_hamiltonian(&spec).unwrap().to_dense().unwrap().into_matrix();
        let deltas: Vec<f64> = (1..n).map(|j| spec.zz(j)).collect();
        assert!(max_diff(&ours, &xxz_dense(n, 0.8, &deltas)) < 1e-14);
    }
}

#[test]
fn liouvillian_matches_kronecker_construction() {
    for n in 2..=3 {
        let spec = ChainSpec::graded_xxz(n, 1.0, 0.5, 1.5).unwrap();
        let cfg = DrivingConfig::theta_case(DrivingCase::XXyTheta, 1.0, 0.5, FRAC_PI_4).unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        let sop = assemble(&h, &build_lindblad_set(&cfg, n).unwrap(), n, SolverMode::Dense).unwrap();
        let oracle = liouvillian_dense(&h.to_dense().unwrap().into_matrix(), &x_xy(n));
        assert!(max_diff(sop.dense_matrix().unwrap(), &oracle) < 1e-13);
    }
}

#[test]
fn currents_are_commutators_of_local_terms() {
    let n = 4;
    let spec = ChainSpec::graded_xxz(n, 0.7, 0.5, 1.5).unwrap();
    let deltas: Vec<f64> = (1..n).map(|j| spec.zz(j)).collect();
    let bond = |j: usize| {
        (site_op(n, &[(j, 'X'), (j + 1, 'X')]) + site_op(n, &[(j, 'Y'), (j + 1, 'Y')])) * c(0.7, 0.0)
            + site_op(n, &[(j, 'Z'), (j + 1, 'Z')]) * c(deltas[j - 1], 0.0)
    };
    let i = c(0.0, 1.0);
    for j in 1..n {
        let z = site_op(n, &[(j, 'Z')]);
        let hj = bond(j);
        let expect = (&z * &hj - &hj * &z) * i;
        let ours = spin_current_op(&spec, j).unwrap().to_dense().unwrap().into_matrix();
        assert!(max_diff(&ours, &expect) < 1e-13, "spin bond {j}");
    }
    for j in 2..n {
        let (a, b) = (bond(j - 1), bond(j));
        let expect = (&a * &b - &b * &a) * i;
        let ours = energy_current_op(&spec, j).unwrap().to_dense().unwrap().into_matrix();
        assert!(max_diff(&ours, &expect) < 1e-13, "energy site {j}");
    }
}

#[test]
fn frozen_steady_state_currents() {
    let cases = [
        (ChainSpec::graded_xxz(3, 1.0, 0.5, 1.5).unwrap(), DrivingCase::XXyTheta, -0.0474682594075, Some(0.0300242856634)),
        (ChainSpec::graded_xxz(4, 1.0, 0.5, 1.5).unwrap(), DrivingCase::XXyTheta, -0.0225229337989, Some(0.0357382953963)),
        (ChainSpec::graded_xxx(3, 0.5, 1.5).unwrap(), DrivingCase::ZXzTheta, -0.0440731628625, None),
        (ChainSpec::graded_xxx(4, 0.5, 1.5).unwrap(), DrivingCase::ZXzTheta, -0.0354646186615, None),
    ];
    for (spec, case, energy, spin) in cases {
        let n = spec.n();
        let cfg = DrivingConfig::theta_case(case, 1.0, 0.5, FRAC_PI_4).unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        let sop = assemble(&h, &build_lindblad_set(&cfg, n).unwrap(), n, SolverMode::Dense).unwrap();
        let p = current_profile(&steady_state(&sop, 1e-10).unwrap().rho, &spec).unwrap();
        for e in &p.energy {
            assert!((e - energy).abs() < 1e-9, "{case} N={n}: {e}");
        }
        if let Some(s) = spin {
            for v in &p.spin {
                assert!((v - s).abs() < 1e-9, "{case} N={n}: {v}");
            }
        }
    }
}
