//! Boundary Lindblad operators for the six driving configurations.
//!
//! Rates are absorbed into the operators: each dissipator term enters as
//! `L ρ L† − ½{L†L, ρ}` with unit weight.
//!
//! θ-cases (four operators, target polarizations in a plane):
//!
//! | case         | left pair `(a ± i b)/2` | right pair `(cosθ n₁ + sinθ n₂ ± i b')/2` |
//! |--------------|-------------------------|-------------------------------------------|
//! | `X_XY_THETA` | a = σʸ, b = σᶻ          | n₁ = σˣ, n₂ = σʸ, b' = σᶻ                 |
//! | `Y_YZ_THETA` | a = σᶻ, b = σˣ          | n₁ = σʸ, n₂ = σᶻ, b' = σˣ                 |
//! | `Z_XZ_THETA` | a = σˣ, b = σʸ          | n₁ = σˣ, n₂ = σᶻ, b' = σʸ                 |
//!
//! with amplitudes `√(γ(1±f))` on the left `±` operators and `√(γ(1∓f))` on
//! the right ones.
//!
//! Orthogonal cases (twelve operators) use the families `L ∝ σˣ ± iσʸ`,
//! `V ∝ σʸ ± iσᶻ`, `W ∝ σᶻ ± iσˣ` on both boundaries; the case decides which
//! of the six amplitudes lands on which right-boundary operator.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{OperatorSum, Pauli};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DrivingCase {
    #[serde(rename = "X_XY_THETA")]
    XXyTheta,
    #[serde(rename = "XY_ORTHO")]
    XyOrtho,
    #[serde(rename = "Y_YZ_THETA")]
    YYzTheta,
    #[serde(rename = "YZ_ORTHO")]
    YzOrtho,
    #[serde(rename = "Z_XZ_THETA")]
    ZXzTheta,
    #[serde(rename = "XZ_ORTHO")]
    XzOrtho,
}

impl DrivingCase {
    pub const ALL: [DrivingCase; 6] = [
        DrivingCase::XXyTheta,
        DrivingCase::XyOrtho,
        DrivingCase::YYzTheta,
        DrivingCase::YzOrtho,
        DrivingCase::ZXzTheta,
        DrivingCase::XzOrtho,
    ];

    pub fn is_theta(self) -> bool {
        matches!(
            self,
            DrivingCase::XXyTheta | DrivingCase::YYzTheta | DrivingCase::ZXzTheta
        )
    }

    pub fn is_orthogonal(self) -> bool {
        !self.is_theta()
    }

    pub fn name(self) -> &'static str {
        match self {
            DrivingCase::XXyTheta => "X_XY_THETA",
            DrivingCase::XyOrtho => "XY_ORTHO",
            DrivingCase::YYzTheta => "Y_YZ_THETA",
            DrivingCase::YzOrtho => "YZ_ORTHO",
            DrivingCase::ZXzTheta => "Z_XZ_THETA",
            DrivingCase::XzOrtho => "XZ_ORTHO",
        }
    }

    pub fn from_name(name: &str) -> Option<DrivingCase> {
        DrivingCase::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl fmt::Display for DrivingCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    #[default]
    #[serde(rename = "NORMAL")]
    Normal,
    #[serde(rename = "INVERTED")]
    Inverted,
}

impl Orientation {
    pub fn flipped(self) -> Orientation {
        match self {
            Orientation::Normal => Orientation::Inverted,
            Orientation::Inverted => Orientation::Normal,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Normal => "normal",
            Orientation::Inverted => "inverted",
        }
    }
}

/// Amplitudes of the orthogonal-case operators.
///
/// Left boundary: `L₁ = l_plus (σˣ+iσʸ)`, `L₂ = l_minus (σˣ−iσʸ)`,
/// `V₁ = v_plus (σʸ+iσᶻ)`, `V₂ = v_minus (σʸ−iσᶻ)`,
/// `W₁ = w_plus (σᶻ+iσˣ)`, `W₂ = w_minus (σᶻ−iσˣ)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct OrthoAmplitudes {
    pub l_plus: f64,
    pub l_minus: f64,
    pub v_plus: f64,
    pub v_minus: f64,
    pub w_plus: f64,
    pub w_minus: f64,
}

impl OrthoAmplitudes {
    pub fn new(l_plus: f64, l_minus: f64, v_plus: f64, v_minus: f64, w_plus: f64, w_minus: f64) -> Self {
        OrthoAmplitudes {
            l_plus,
            l_minus,
            v_plus,
            v_minus,
            w_plus,
            w_minus,
        }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [
            self.l_plus,
            self.l_minus,
            self.v_plus,
            self.v_minus,
            self.w_plus,
            self.w_minus,
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DrivingConfig {
    pub case: DrivingCase,
    pub gamma: f64,
    pub f: f64,
    pub theta: f64,
    pub amps: OrthoAmplitudes,
    pub orientation: Orientation,
}

impl DrivingConfig {
    pub fn theta_case(case: DrivingCase, gamma: f64, f: f64, theta: f64) -> Result<Self> {
        if !case.is_theta() {
            return Err(Error::spec(format!("{case} is not a θ-parameterized case")));
        }
        let cfg = DrivingConfig {
            case,
            gamma,
            f,
            theta,
            amps: OrthoAmplitudes::default(),
            orientation: Orientation::Normal,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn orthogonal(case: DrivingCase, amps: OrthoAmplitudes) -> Result<Self> {
        if !case.is_orthogonal() {
            return Err(Error::spec(format!("{case} is not an orthogonal case")));
        }
        let cfg = DrivingConfig {
            case,
            gamma: 1.0,
            f: 0.0,
            theta: 0.0,
            amps,
            orientation: Orientation::Normal,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.case.is_theta() {
            if !(self.gamma.is_finite() && self.gamma > 0.0) {
                return Err(Error::spec(format!("gamma must be > 0, got {}", self.gamma)));
            }
            if !(self.f.is_finite() && self.f.abs() <= 1.0) {
                return Err(Error::spec(format!("f must lie in [-1, 1], got {}", self.f)));
            }
            if !(self.theta.is_finite() && (0.0..=FRAC_PI_2).contains(&self.theta)) {
                return Err(Error::spec(format!(
                    "theta must lie in [0, pi/2], got {}",
                    self.theta
                )));
            }
        } else {
            for (name, a) in AMP_KEYS.iter().zip(self.amps.as_array()) {
                if !(a.is_finite() && a >= 0.0) {
                    return Err(Error::spec(format!("{name} must be a nonnegative real, got {a}")));
                }
            }
        }
        Ok(())
    }
}

pub(crate) const AMP_KEYS: [&str; 6] = [
    "amp_l_plus",
    "amp_l_minus",
    "amp_v_plus",
    "amp_v_minus",
    "amp_w_plus",
    "amp_w_minus",
];

/// Toggles which boundary each operator set attaches to; the chain itself
/// is left untouched.
pub fn invert_baths(cfg: &DrivingConfig) -> DrivingConfig {
    let mut out = cfg.clone();
    out.orientation = cfg.orientation.flipped();
    out
}

/// Which bath an operator belongs to in the NORMAL orientation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LindbladOp {
    /// Operator name, e.g. `K+L` or `W3`.
    pub label: String,
    pub side: Side,
    /// Boundary site the operator acts on (1 or N).
    pub site: usize,
    /// Amplitude multiplying the bare operator shape.
    pub amplitude: f64,
    pub op: OperatorSum,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LindbladSet {
    n: usize,
    ops: Vec<LindbladOp>,
}

impl LindbladSet {
    pub fn empty(n: usize) -> Self {
        LindbladSet { n, ops: Vec::new() }
    }

    /// Set made of arbitrary operators; each must act on site 1 or site N only.
    pub fn from_ops(n: usize, ops: Vec<LindbladOp>) -> Result<Self> {
        for l in &ops {
            if l.op.n() != n {
                return Err(Error::Dimension {
                    expected: n,
                    found: l.op.n(),
                });
            }
            let support = l.op.support();
            if support.iter().any(|s| *s != l.site) || (l.site != 1 && l.site != n) {
                return Err(Error::spec(format!(
                    "Lindblad operator {} must act on a single boundary site",
                    l.label
                )));
            }
        }
        Ok(LindbladSet { n, ops })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ops(&self) -> &[LindbladOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Operators with a nonzero amplitude.
    pub fn nonzero(&self) -> impl Iterator<Item = &LindbladOp> {
        self.ops.iter().filter(|l| !l.op.is_zero())
    }

    pub fn get(&self, label: &str) -> Option<&LindbladOp> {
        self.ops.iter().find(|l| l.label == label)
    }

    pub fn operators(&self) -> Vec<OperatorSum> {
        self.nonzero().map(|l| l.op.clone()).collect()
    }
}

/// Bare shape `(Σ_k w_k σ^{a_k} + sign·i σ^b)`, optionally halved.
fn shape(n: usize, site: usize, axis: &[(f64, Pauli)], b: Pauli, sign: f64) -> Result<OperatorSum> {
    let mut op = OperatorSum::site(n, site, b)? * Complex64::new(0.0, sign);
    for &(w, p) in axis {
        if w != 0.0 {
            op = &op + &(&OperatorSum::site(n, site, p)? * w);
        }
    }
    Ok(op)
}

struct Template {
    label: &'static str,
    side: Side,
    amplitude: f64,
    axis: Vec<(f64, Pauli)>,
    b: Pauli,
    sign: f64,
    half: bool,
}

fn theta_templates(cfg: &DrivingConfig) -> Vec<Template> {
    use Pauli::*;
    let (c, s) = (cfg.theta.cos(), cfg.theta.sin());
    let (left_a, left_b, right_axis, right_b) = match cfg.case {
        DrivingCase::XXyTheta => (Y, Z, vec![(c, X), (s, Y)], Z),
        DrivingCase::YYzTheta => (Z, X, vec![(c, Y), (s, Z)], X),
        DrivingCase::ZXzTheta => (X, Y, vec![(c, X), (s, Z)], Y),
        _ => unreachable!("orthogonal case routed to θ templates"),
    };
    let up = (cfg.gamma * (1.0 + cfg.f)).sqrt();
    let down = (cfg.gamma * (1.0 - cfg.f)).sqrt();
    let t = |label, side, amplitude, axis: Vec<(f64, Pauli)>, b, sign| Template {
        label,
        side,
        amplitude,
        axis,
        b,
        sign,
        half: true,
    };
    vec![
        t("K+L", Side::Left, up, vec![(1.0, left_a)], left_b, 1.0),
        t("K-L", Side::Left, down, vec![(1.0, left_a)], left_b, -1.0),
        t("K+R", Side::Right, down, right_axis.clone(), right_b, 1.0),
        t("K-R", Side::Right, up, right_axis, right_b, -1.0),
    ]
}

fn ortho_templates(cfg: &DrivingConfig) -> Vec<Template> {
    use Pauli::*;
    let a = &cfg.amps;
    // Right-boundary amplitudes (L3, L4, V3, V4, W3, W4) per case.
    let right = match cfg.case {
        DrivingCase::XyOrtho => [a.l_minus, a.l_plus, a.w_minus, a.w_plus, a.v_minus, a.v_plus],
        DrivingCase::YzOrtho => [a.w_minus, a.w_plus, a.v_minus, a.v_plus, a.l_minus, a.l_plus],
        DrivingCase::XzOrtho => [a.v_minus, a.v_plus, a.l_minus, a.l_plus, a.w_minus, a.w_plus],
        _ => unreachable!("θ case routed to orthogonal templates"),
    };
    let t = |label, side, amplitude, p: Pauli, b, sign| Template {
        label,
        side,
        amplitude,
        axis: vec![(1.0, p)],
        b,
        sign,
        half: false,
    };
    vec![
        t("L1", Side::Left, a.l_plus, X, Y, 1.0),
        t("L2", Side::Left, a.l_minus, X, Y, -1.0),
        t("V1", Side::Left, a.v_plus, Y, Z, 1.0),
        t("V2", Side::Left, a.v_minus, Y, Z, -1.0),
        t("W1", Side::Left, a.w_plus, Z, X, 1.0),
        t("W2", Side::Left, a.w_minus, Z, X, -1.0),
        t("L3", Side::Right, right[0], X, Y, 1.0),
        t("L4", Side::Right, right[1], X, Y, -1.0),
        t("V3", Side::Right, right[2], Y, Z, 1.0),
        t("V4", Side::Right, right[3], Y, Z, -1.0),
        t("W3", Side::Right, right[4], Z, X, 1.0),
        t("W4", Side::Right, right[5], Z, X, -1.0),
    ]
}

/// Lindblad operators of `cfg` on an `n`-site chain.
///
/// NORMAL attaches the left set to site 1 and the right set to site N;
/// INVERTED swaps the two boundary sites and keeps every parameter.
pub fn build_lindblad_set(cfg: &DrivingConfig, n: usize) -> Result<LindbladSet> {
    cfg.validate()?;
    if n < 2 {
        return Err(Error::spec(format!("boundary driving needs N >= 2, got {n}")));
    }
    let templates = if cfg.case.is_theta() {
        theta_templates(cfg)
    } else {
        ortho_templates(cfg)
    };
    let (left_site, right_site) = match cfg.orientation {
        Orientation::Normal => (1, n),
        Orientation::Inverted => (n, 1),
    };
    let ops = templates
        .into_iter()
        .map(|t| {
            let site = match t.side {
                Side::Left => left_site,
                Side::Right => right_site,
            };
            let scale = if t.half { 0.5 * t.amplitude } else { t.amplitude };
            let op = &shape(n, site, &t.axis, t.b, t.sign)? * scale;
            Ok(LindbladOp {
                label: t.label.to_string(),
                side: t.side,
                site,
                amplitude: t.amplitude,
                op,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LindbladSet { n, ops })
}
