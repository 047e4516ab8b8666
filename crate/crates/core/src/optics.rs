//! Systematic-error model of the optical measurement chain: Jones-calculus
//! waveplate measurement axes, the imperfect-PBS/efficiency expectation
//! model, closed-form derivative magnitudes, and the first-order error
//! budget of the calibration procedure.
//!
//! The measured Pauli axis is realized by a quarter-wave plate (phase
//! delta1, angle theta1) followed by a half-wave plate (phase delta2, angle
//! theta2) in front of a polarizing beam splitter. Conventions are pinned by
//! the reference settings in [`AXIS_SETTINGS`]: at ideal phases the three
//! rows produce exactly the x, y, z axes.
//!
//! The budget models a single calibration pass. Error-compensation
//! measurements, which average nominally equivalent waveplate settings so
//! that the leading systematic terms cancel, are reported to shrink the
//! residual calibration error from about 5e-5 to 8e-6; that protocol is out
//! of scope here.

use nalgebra::Matrix2;
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::qubit::{born_probabilities, BlochState, PauliAxis, Vec3};
use crate::{Error, Result};

type C64 = Complex<f64>;
type Jones = Matrix2<C64>;

/// Ideal quarter-wave retardance.
pub const IDEAL_DELTA1: f64 = std::f64::consts::FRAC_PI_2;
/// Ideal half-wave retardance.
pub const IDEAL_DELTA2: f64 = std::f64::consts::PI;

/// Waveplate rotation angles (theta1, theta2) realizing the x, y, z
/// measurement axes at ideal phases: (45, 22.5), (0, 22.5), (0, 0) degrees.
pub const AXIS_SETTINGS: [(f64, f64); 3] = [
    (std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_8),
    (0.0, std::f64::consts::FRAC_PI_8),
    (0.0, 0.0),
];

/// Waveplate with fast axis at `theta` and retardance `delta`:
/// R(theta) diag(1, e^{i delta}) R(-theta).
fn waveplate(theta: f64, delta: f64) -> Jones {
    let (s, c) = theta.sin_cos();
    let rot = Matrix2::new(
        C64::new(c, 0.0),
        C64::new(-s, 0.0),
        C64::new(s, 0.0),
        C64::new(c, 0.0),
    );
    let retard = Matrix2::new(
        C64::new(1.0, 0.0),
        C64::new(0.0, 0.0),
        C64::new(0.0, 0.0),
        C64::from_polar(1.0, delta),
    );
    rot * retard * rot.transpose()
}

/// The Pauli axis measured by the QWP(theta1, delta1) -> HWP(theta2, delta2)
/// -> PBS chain: back-propagating the horizontal-port projector through the
/// chain gives a projector (1 + r.sigma)/2, and `r` is returned. The
/// circular-polarization handedness is fixed so that the second row of
/// [`AXIS_SETTINGS`] yields +y at ideal phases.
pub fn waveplate_axis(theta1: f64, theta2: f64, delta1: f64, delta2: f64) -> PauliAxis {
    let chain = waveplate(theta2, delta2) * waveplate(theta1, delta1);
    let adj = chain.adjoint();
    // psi = chain^dagger |H>.
    let psi0 = adj[(0, 0)];
    let psi1 = adj[(1, 0)];
    let cross = psi0.conj() * psi1;
    let r = Vec3::new(
        2.0 * cross.re,
        -2.0 * cross.im,
        psi0.norm_sqr() - psi1.norm_sqr(),
    );
    PauliAxis::from_direction(r).expect("unitary chain preserves the norm")
}

/// Squared magnitudes of the partial derivatives of the measured axis with
/// respect to (delta1, delta2, theta1, theta2), evaluated at ideal phases:
/// sin^2(2 theta1 - 4 theta2), sin^2(2 theta2), 4 + 4 cos^2(2 theta1 - 4 theta2), 16.
pub fn axis_derivative_magnitudes(theta1: f64, theta2: f64) -> [f64; 4] {
    let a = 2.0 * theta1 - 4.0 * theta2;
    let b = 2.0 * theta2;
    [
        a.sin() * a.sin(),
        b.sin() * b.sin(),
        4.0 + 4.0 * a.cos() * a.cos(),
        16.0,
    ]
}

/// First-order model of the expectation value read off an imperfect chain:
/// a PBS with leakage `beta` (1/extinction-ratio) and collection-efficiency
/// unbalance `eta` turn the ideal m = s.r into m - 2 m beta + 2 p+ p- eta.
pub fn imperfect_expectation(state: &BlochState, axis: &PauliAxis, beta: f64, eta: f64) -> f64 {
    let m = state.vector().dot(&axis.vector());
    let (p_plus, p_minus) = born_probabilities(state, axis);
    m - 2.0 * m * beta + 2.0 * p_plus * p_minus * eta
}

/// Imperfection parameters of the measurement chain and their calibration
/// uncertainties (angles and phases in radians).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticsParams {
    /// PBS leakage, 1 / extinction ratio.
    pub beta: f64,
    /// Collecting-efficiency unbalance between the two ports.
    pub eta: f64,
    /// QWP retardance.
    pub delta1: f64,
    /// HWP retardance.
    pub delta2: f64,
    /// QWP rotation angle (nominal setting).
    pub theta1: f64,
    /// HWP rotation angle (nominal setting).
    pub theta2: f64,
    pub d_beta: f64,
    pub d_eta: f64,
    pub d_delta1: f64,
    pub d_delta2: f64,
    pub d_theta1: f64,
    pub d_theta2: f64,
}

impl OpticsParams {
    /// The published calibrated instrument values: extinction ratio 8000,
    /// efficiency fluctuation (d_eta)^2 = 4e-6, calibrated waveplate phases
    /// good to 0.3 degrees, optic-axis angles good to 0.1 degrees.
    pub fn calibrated_reference() -> Self {
        Self {
            beta: 1.25e-4,
            eta: 0.0,
            delta1: IDEAL_DELTA1,
            delta2: IDEAL_DELTA2,
            theta1: 0.0,
            theta2: 0.0,
            d_beta: 1.25e-4,
            d_eta: 2e-3,
            d_delta1: 0.3_f64.to_radians(),
            d_delta2: 0.3_f64.to_radians(),
            d_theta1: 0.1_f64.to_radians(),
            d_theta2: 0.1_f64.to_radians(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("beta", self.beta),
            ("eta", self.eta),
            ("delta1", self.delta1),
            ("delta2", self.delta2),
            ("theta1", self.theta1),
            ("theta2", self.theta2),
        ] {
            if !value.is_finite() {
                return Err(Error::InvalidConfig {
                    reason: format!("optics parameter {name} = {value} is not finite"),
                });
            }
        }
        if !(0.0..0.5).contains(&self.beta) {
            return Err(Error::InvalidConfig {
                reason: format!("beta = {} must lie in [0, 0.5)", self.beta),
            });
        }
        for (name, value) in [
            ("d_beta", self.d_beta),
            ("d_eta", self.d_eta),
            ("d_delta1", self.d_delta1),
            ("d_delta2", self.d_delta2),
            ("d_theta1", self.d_theta1),
            ("d_theta2", self.d_theta2),
        ] {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::NegativeUncertainty { name, value });
            }
        }
        Ok(())
    }
}

/// One grouped contribution to the systematic error, with the bounding
/// assumption it relies on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetLine {
    pub contribution: f64,
    pub assumption: String,
}

/// First-order systematic error budget: per-source M^2 (Delta)^2 terms and
/// their sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub beta: BudgetLine,
    pub eta: BudgetLine,
    pub phases: BudgetLine,
    pub angles: BudgetLine,
    pub total: f64,
}

impl BudgetReport {
    pub fn lines(&self) -> [(&'static str, &BudgetLine); 4] {
        [
            ("beta", &self.beta),
            ("eta", &self.eta),
            ("phases", &self.phases),
            ("angles", &self.angles),
        ]
    }
}

/// Worst-case systematic error budget for calibrating a state of length
/// `s_len` by measuring the three reference axes.
///
/// Per source: beta contributes 4 s_len^2 (d_beta)^2 (exact for orthonormal
/// axes), eta at most (3/4) (d_eta)^2, and each phase or angle contributes
/// the derivative-magnitude bound |r_zeta|^2 summed over the three settings,
/// so phases give (1 + 1) and angles (20 + 48) times the respective squared
/// uncertainties.
pub fn systematic_budget(params: &OpticsParams, s_len: f64) -> BudgetReport {
    debug_assert!((0.0..=1.0).contains(&s_len));
    let mut m2 = [0.0f64; 4];
    for (theta1, theta2) in AXIS_SETTINGS {
        let d = axis_derivative_magnitudes(theta1, theta2);
        for k in 0..4 {
            m2[k] += d[k];
        }
    }
    let beta = 4.0 * s_len * s_len * params.d_beta * params.d_beta;
    let eta = 0.75 * params.d_eta * params.d_eta;
    let phases = m2[0] * params.d_delta1 * params.d_delta1
        + m2[1] * params.d_delta2 * params.d_delta2;
    let angles = m2[2] * params.d_theta1 * params.d_theta1
        + m2[3] * params.d_theta2 * params.d_theta2;
    BudgetReport {
        beta: BudgetLine {
            contribution: beta,
            assumption: format!("M^2 = 4 s^2 = {:.3} (exact for orthonormal axes)", 4.0 * s_len * s_len),
        },
        eta: BudgetLine {
            contribution: eta,
            assumption: "M^2 <= 3/4 (each setting bounded by (2 p+ p-)^2 <= 1/4)".into(),
        },
        phases: BudgetLine {
            contribution: phases,
            assumption: format!(
                "(s.r_delta)^2 <= |r_delta|^2; M^2 = ({:.0}, {:.0}) over the three settings",
                m2[0], m2[1]
            ),
        },
        angles: BudgetLine {
            contribution: angles,
            assumption: format!(
                "(s.r_theta)^2 <= |r_theta|^2; M^2 = ({:.0}, {:.0}) over the three settings",
                m2[2], m2[3]
            ),
        },
        total: beta + eta + phases + angles,
    }
}

/// State-specific variant of [`systematic_budget`]: replaces each worst-case
/// bound by the projected first-order derivative at the given true state
/// (phase/angle terms use (s . dr/dzeta)^2 instead of |dr/dzeta|^2, the eta
/// term uses the actual Born probabilities of the three settings).
pub fn systematic_budget_projected(params: &OpticsParams, state: &BlochState) -> BudgetReport {
    let s = state.vector();
    let mut beta = 0.0;
    let mut eta = 0.0;
    let mut phases = 0.0;
    let mut angles = 0.0;
    for (theta1, theta2) in AXIS_SETTINGS {
        let axis = waveplate_axis(theta1, theta2, IDEAL_DELTA1, IDEAL_DELTA2);
        let m = s.dot(&axis.vector());
        beta += 4.0 * m * m * params.d_beta * params.d_beta;
        let (p_plus, p_minus) = born_probabilities(state, &axis);
        let eta_deriv = 2.0 * p_plus * p_minus;
        eta += eta_deriv * eta_deriv * params.d_eta * params.d_eta;

        let grads = axis_gradients(theta1, theta2);
        phases += s.dot(&grads[0]).powi(2) * params.d_delta1 * params.d_delta1
            + s.dot(&grads[1]).powi(2) * params.d_delta2 * params.d_delta2;
        angles += s.dot(&grads[2]).powi(2) * params.d_theta1 * params.d_theta1
            + s.dot(&grads[3]).powi(2) * params.d_theta2 * params.d_theta2;
    }
    BudgetReport {
        beta: BudgetLine {
            contribution: beta,
            assumption: "projected: sum of 4 (s.r)^2 over settings".into(),
        },
        eta: BudgetLine {
            contribution: eta,
            assumption: "projected: sum of (2 p+ p-)^2 over settings".into(),
        },
        phases: BudgetLine {
            contribution: phases,
            assumption: "projected: (s . dr/ddelta)^2 summed over settings".into(),
        },
        angles: BudgetLine {
            contribution: angles,
            assumption: "projected: (s . dr/dtheta)^2 summed over settings".into(),
        },
        total: beta + eta + phases + angles,
    }
}

/// Central-difference gradients of the measured axis with respect to
/// (delta1, delta2, theta1, theta2) at ideal phases.
fn axis_gradients(theta1: f64, theta2: f64) -> [Vec3; 4] {
    let h = 1e-6;
    let eval = |t1: f64, t2: f64, d1: f64, d2: f64| waveplate_axis(t1, t2, d1, d2).vector();
    let central = |plus: Vec3, minus: Vec3| (plus - minus) / (2.0 * h);
    [
        central(
            eval(theta1, theta2, IDEAL_DELTA1 + h, IDEAL_DELTA2),
            eval(theta1, theta2, IDEAL_DELTA1 - h, IDEAL_DELTA2),
        ),
        central(
            eval(theta1, theta2, IDEAL_DELTA1, IDEAL_DELTA2 + h),
            eval(theta1, theta2, IDEAL_DELTA1, IDEAL_DELTA2 - h),
        ),
        central(
            eval(theta1 + h, theta2, IDEAL_DELTA1, IDEAL_DELTA2),
            eval(theta1 - h, theta2, IDEAL_DELTA1, IDEAL_DELTA2),
        ),
        central(
            eval(theta1, theta2 + h, IDEAL_DELTA1, IDEAL_DELTA2),
            eval(theta1, theta2 - h, IDEAL_DELTA1, IDEAL_DELTA2),
        ),
    ]
}

/// Result of reconstructing a state from three measured expectations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibratedState {
    pub state: BlochState,
    /// True when the raw vector fell outside the Bloch ball and was scaled
    /// back to unit length.
    pub clipped: bool,
}

/// Builds the calibrated state sum_j m_hat_j r_j from expectations measured
/// on three orthonormal axes, scaling into the ball (and flagging) if the
/// raw vector lands outside.
pub fn calibrated_state(m_hats: [f64; 3], axes: [PauliAxis; 3]) -> Result<CalibratedState> {
    for i in 0..3 {
        for j in i..3 {
            let dot = axes[i].vector().dot(&axes[j].vector());
            let expected = if i == j { 1.0 } else { 0.0 };
            if (dot - expected).abs() > 1e-9 {
                return Err(Error::NonOrthonormalAxes);
            }
        }
    }
    let mut s = Vec3::zeros();
    for (m, axis) in m_hats.iter().zip(axes) {
        s += axis.vector() * *m;
    }
    let norm = s.norm();
    if norm > 1.0 {
        Ok(CalibratedState {
            state: BlochState::new(s / norm)?,
            clipped: true,
        })
    } else {
        Ok(CalibratedState {
            state: BlochState::new(s)?,
            clipped: false,
        })
    }
}
