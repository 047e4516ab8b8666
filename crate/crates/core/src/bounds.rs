//! Closed-form Gill-Massar precision bounds, optimal-measurement synthesis
//! for arbitrary weightings, the monotone-metric weighting family, and the
//! reference value for standard tomography.
//!
//! The scaled weighted mean square error of any unbiased estimator built on
//! individual measurements is bounded below by
//! E_W = (tr sqrt(J^{-1/2} W J^{-1/2}))^2 / (d - 1),
//! and for a qubit the bound is saturated by mixing three mutually unbiased
//! Pauli-axis measurements with the right probabilities. All bounds returned
//! here are scaled (sample-size independent); divide by N for the
//! finite-sample limit.

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::estimation::{quantum_fisher, InfoMatrix};
use crate::qubit::{rotation_to_z, BlochState, Mat3, PauliAxis, Vec3};
use crate::{Error, Result};

/// Eigenvalues of a nominally PSD matrix may dip this far below zero from
/// roundoff; they are clipped to 0. Anything lower is rejected.
const PSD_CLIP: f64 = 1e-12;

/// Figure-of-merit weighting for the WMSE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum WeightingSpec {
    /// W = identity: plain mean square error of the Bloch vector.
    #[serde(rename = "mse")]
    IdentityMse,
    /// Monotone Riemannian metric f_n; n = 1 is the Bures metric and
    /// n = 2 the quantum Chernoff metric.
    #[serde(rename = "metric")]
    MonotoneMetric { n: u32 },
    /// An explicit symmetric PSD weighting matrix in lab coordinates.
    #[serde(rename = "explicit")]
    Explicit { w: [[f64; 3]; 3] },
}

impl WeightingSpec {
    pub fn bures() -> Self {
        WeightingSpec::MonotoneMetric { n: 1 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            WeightingSpec::IdentityMse => Ok(()),
            WeightingSpec::MonotoneMetric { n } => {
                if *n == 0 {
                    Err(Error::InvalidWeighting {
                        reason: "metric order n must be at least 1".into(),
                    })
                } else {
                    Ok(())
                }
            }
            WeightingSpec::Explicit { w } => {
                validate_weighting_matrix(&explicit_matrix(w)).map(|_| ())
            }
        }
    }

    /// The weighting matrix in lab coordinates, evaluated at `state`.
    /// Metric weightings are diagonal in the frame whose third axis is the
    /// Bloch direction and are rotated back into the lab frame here.
    pub fn lab_matrix(&self, state: &BlochState) -> Result<Mat3> {
        match self {
            WeightingSpec::IdentityMse => Ok(Mat3::identity()),
            WeightingSpec::MonotoneMetric { n } => {
                let w = metric_weighting(state.norm(), *n)?;
                let r = rotation_to_z(&state.vector()).matrix();
                Ok(r.transpose() * Mat3::from_diagonal(&Vec3::new(w[0], w[1], w[2])) * r)
            }
            WeightingSpec::Explicit { w } => validate_weighting_matrix(&explicit_matrix(w)),
        }
    }

    /// Short stable label used in reports.
    pub fn label(&self) -> String {
        match self {
            WeightingSpec::IdentityMse => "mse".into(),
            WeightingSpec::MonotoneMetric { n } => format!("metric({n})"),
            WeightingSpec::Explicit { .. } => "explicit".into(),
        }
    }
}

fn explicit_matrix(w: &[[f64; 3]; 3]) -> Mat3 {
    Mat3::from_fn(|i, j| w[i][j])
}

fn validate_weighting_matrix(w: &Mat3) -> Result<Mat3> {
    let asym = (w - w.transpose()).abs().max();
    if asym > 1e-12 {
        return Err(Error::InvalidWeighting {
            reason: format!("asymmetry {asym} exceeds 1e-12"),
        });
    }
    let sym = (w + w.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let min = eig.eigenvalues.min();
    if min < -1e-10 {
        return Err(Error::InvalidWeighting {
            reason: format!("negative eigenvalue {min}"),
        });
    }
    Ok(sym)
}

/// An optimal mutually unbiased measurement scheme: three orthogonal axes,
/// their mixing probabilities, and the scaled WMSE bound they attain.
#[derive(Debug, Clone)]
pub struct OptimalScheme {
    pub axes: [PauliAxis; 3],
    pub probabilities: [f64; 3],
    pub bound: f64,
    /// True when some axis carries (numerically) zero probability: the
    /// scheme measures fewer than three directions and leaves part of the
    /// Bloch vector unidentified.
    pub rank_deficient: bool,
}

fn sym_eigen_clipped(m: &Mat3, context: &str) -> Result<(Vec3, Mat3)> {
    let eig = SymmetricEigen::new((m + m.transpose()) * 0.5);
    let mut vals = eig.eigenvalues;
    for v in vals.iter_mut() {
        if *v < 0.0 {
            if *v < -PSD_CLIP {
                return Err(Error::InvalidWeighting {
                    reason: format!("{context}: eigenvalue {v} below -{PSD_CLIP}"),
                });
            }
            *v = 0.0;
        }
    }
    Ok((vals, eig.eigenvectors))
}

/// Symmetric square root via eigendecomposition, clipping tiny negative
/// eigenvalues to zero.
fn sym_sqrt(m: &Mat3, context: &str) -> Result<Mat3> {
    let (vals, vecs) = sym_eigen_clipped(m, context)?;
    let d = Mat3::from_diagonal(&vals.map(f64::sqrt));
    Ok(vecs * d * vecs.transpose())
}

/// J^{1/2} and J^{-1/2} for a positive-definite information matrix.
fn sqrt_and_inv_sqrt(j: &InfoMatrix) -> Result<(Mat3, Mat3)> {
    let eig = SymmetricEigen::new(j.matrix());
    let min = eig.eigenvalues.min();
    if min <= 1e-12 {
        return Err(Error::SingularInfoMatrix { eigenvalue: min });
    }
    let sqrt = Mat3::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let inv_sqrt = Mat3::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()));
    let v = eig.eigenvectors;
    Ok((v * sqrt * v.transpose(), v * inv_sqrt * v.transpose()))
}

/// Scaled Gill-Massar bound for an arbitrary weighting matrix:
/// (tr sqrt(J^{-1/2} W J^{-1/2}))^2 / (d - 1).
pub fn gm_bound_general(w: &Mat3, j: &InfoMatrix, d: usize) -> Result<f64> {
    assert!(d >= 2, "dimension must be at least 2");
    let w = validate_weighting_matrix(w)?;
    let (_, j_inv_sqrt) = sqrt_and_inv_sqrt(j)?;
    let b = j_inv_sqrt * w * j_inv_sqrt;
    let (vals, _) = sym_eigen_clipped(&b, "J^-1/2 W J^-1/2")?;
    let trace_sqrt: f64 = vals.iter().map(|v| v.sqrt()).sum();
    Ok(trace_sqrt * trace_sqrt / (d as f64 - 1.0))
}

/// The Fisher matrix a bound-saturating measurement must attain:
/// I_W = (d-1) J^{1/2} sqrt(J^{-1/2} W J^{-1/2}) J^{1/2} / tr sqrt(...).
pub fn gm_fisher_target(w: &Mat3, j: &InfoMatrix, d: usize) -> Result<InfoMatrix> {
    assert!(d >= 2, "dimension must be at least 2");
    let w = validate_weighting_matrix(w)?;
    let (j_sqrt, j_inv_sqrt) = sqrt_and_inv_sqrt(j)?;
    let b = j_inv_sqrt * w * j_inv_sqrt;
    let sqrt_b = sym_sqrt(&b, "J^-1/2 W J^-1/2")?;
    let trace = sqrt_b.trace();
    if trace <= 1e-300 {
        return Err(Error::AllZeroWeights);
    }
    let target = j_sqrt * sqrt_b * j_sqrt * ((d as f64 - 1.0) / trace);
    Ok(InfoMatrix::from_symmetric_unchecked(target))
}

/// Scaled Gill-Massar bound for the plain MSE of a qubit Bloch vector:
/// (2 + sqrt(1 - s^2))^2, decreasing from 9 at s = 0 to 4 at s = 1.
pub fn gm_bound_mse(s: f64) -> f64 {
    assert!((0.0..=1.0).contains(&s), "radius must lie in [0, 1]");
    let root = (1.0 - s * s).max(0.0).sqrt();
    (2.0 + root) * (2.0 + root)
}

/// Scaled MSE achieved by standard tomography that splits the copies evenly
/// over three mutually unbiased axes: 3 (3 - s^2).
pub fn standard_mse_theory(s: f64) -> f64 {
    assert!((0.0..=1.0).contains(&s), "radius must lie in [0, 1]");
    3.0 * (3.0 - s * s)
}

/// Optimal mixing probabilities for a diagonal weighting (w1, w2, w3) in the
/// frame whose third axis is the Bloch direction:
/// p_j proportional to sqrt(w_j (1 - s^2 delta_j3)).
pub fn optimal_probabilities_diagonal(w: [f64; 3], s: f64) -> Result<[f64; 3]> {
    assert!((0.0..=1.0).contains(&s), "radius must lie in [0, 1]");
    for v in w {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidWeighting {
                reason: format!("diagonal weight {v} is negative or not finite"),
            });
        }
    }
    let num = [
        w[0].sqrt(),
        w[1].sqrt(),
        (w[2] * (1.0 - s * s)).sqrt(),
    ];
    let den = num[0] + num[1] + num[2];
    if den == 0.0 {
        return Err(Error::AllZeroWeights);
    }
    Ok([num[0] / den, num[1] / den, num[2] / den])
}

/// Morozova-Chentsov function f_n(t) = ((1 + t^{1/n}) / 2)^n on [0, 1].
pub fn mc_function(n: u32, t: f64) -> f64 {
    assert!(n >= 1, "metric order n must be at least 1");
    assert!((0.0..=1.0).contains(&t), "t must lie in [0, 1]");
    ((1.0 + t.powf(1.0 / n as f64)) / 2.0).powi(n as i32)
}

/// Diagonal weights (w1, w2, w3) of the monotone metric f_n at radius `s`,
/// in the frame whose third axis is the Bloch direction:
/// w1 = w2 = 1/(4 (1+s) f_n(t)) with t = (1-s)/(1+s), w3 = 1/(4 (1-s^2)).
pub fn metric_weighting(s: f64, n: u32) -> Result<[f64; 3]> {
    assert!(n >= 1, "metric order n must be at least 1");
    if !(0.0..1.0).contains(&s) {
        return Err(Error::BoundaryState { norm: s });
    }
    let t = (1.0 - s) / (1.0 + s);
    let transverse = 0.25 / ((1.0 + s) * mc_function(n, t));
    let radial = 0.25 / (1.0 - s * s);
    Ok([transverse, transverse, radial])
}

/// The h parameter of the f_n scheme,
/// h = [((1+s)^{1/n} + (1-s)^{1/n}) / 2]^{n/2}.
pub fn metric_h(s: f64, n: u32) -> f64 {
    assert!(n >= 1, "metric order n must be at least 1");
    let inv_n = 1.0 / n as f64;
    (((1.0 + s).powf(inv_n) + (1.0 - s).powf(inv_n)) / 2.0).powf(n as f64 / 2.0)
}

/// Optimal scheme for the monotone-metric WMSE at radius `s`, expressed in
/// the frame whose third axis is the Bloch direction:
/// p1 = p2 = 1/(2+h), p3 = h/(2+h), bound = (2/h + 1)^2 / 4.
/// For n = 1 (Bures) this is (1/3, 1/3, 1/3) and 9/4 at every radius.
pub fn gm_scheme_metric(s: f64, n: u32) -> Result<OptimalScheme> {
    if !(0.0..1.0).contains(&s) {
        return Err(Error::BoundaryState { norm: s });
    }
    let h = metric_h(s, n);
    let p_t = 1.0 / (2.0 + h);
    let p_r = h / (2.0 + h);
    let half = 2.0 / h + 1.0;
    Ok(OptimalScheme {
        axes: [PauliAxis::x(), PauliAxis::y(), PauliAxis::z()],
        probabilities: [p_t, p_t, p_r],
        bound: 0.25 * half * half,
        rank_deficient: false,
    })
}

/// Tolerance for grouping near-equal eigenvalues into one degenerate cluster.
const DEGENERACY_TOL: f64 = 1e-8;

/// Optimal scheme for an arbitrary weighting at an arbitrary interior state:
/// eigendecompose the target Fisher matrix I_W; its eigen-axes r_j measured
/// with probabilities a_j (1 - (s.r_j)^2) attain the bound, and those
/// probabilities sum to one because tr(J^-1 I_W) = 1 for a qubit.
///
/// Axes are ordered by increasing eigenvalue of I_W (the radial axis lands
/// third for axially symmetric weightings). Within a degenerate eigenvalue
/// cluster the basis is rotated toward {x, y, z}, greedily maximizing the
/// squared overlap with the best-aligned canonical axes, so repeated runs
/// and nearby inputs produce the same axes.
pub fn gm_scheme_general(weighting: &WeightingSpec, state: &BlochState) -> Result<OptimalScheme> {
    let w = weighting.lab_matrix(state)?;
    let j = quantum_fisher(state)?;
    let bound = gm_bound_general(&w, &j, 2)?;
    let target = gm_fisher_target(&w, &j, 2)?;

    let eig = SymmetricEigen::new(target.matrix());
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let sorted_vals: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let sorted_vecs: Vec<Vec3> = order
        .iter()
        .map(|&k| eig.eigenvectors.column(k).into_owned())
        .collect();
    let axes_vectors = canonical_align(&sorted_vals, &sorted_vecs);

    let s = state.vector();
    let max_val = sorted_vals.iter().cloned().fold(0.0_f64, f64::max);
    let mut probabilities = [0.0; 3];
    let mut rank_deficient = false;
    for k in 0..3 {
        let overlap = s.dot(&axes_vectors[k]);
        probabilities[k] = sorted_vals[k] * (1.0 - overlap * overlap);
        if sorted_vals[k] <= max_val * DEGENERACY_TOL {
            rank_deficient = true;
        }
    }
    let sum: f64 = probabilities.iter().sum();
    debug_assert!((sum - 1.0).abs() < 1e-10, "probabilities sum to {sum}");
    for p in probabilities.iter_mut() {
        *p /= sum;
    }

    let axes = [
        PauliAxis::from_direction(axes_vectors[0])?,
        PauliAxis::from_direction(axes_vectors[1])?,
        PauliAxis::from_direction(axes_vectors[2])?,
    ];
    Ok(OptimalScheme {
        axes,
        probabilities,
        bound,
        rank_deficient,
    })
}

/// Deterministic basis for eigenvalue clusters: whole-space degeneracy maps
/// to {x, y, z}; a two-dimensional cluster takes the projection of the
/// best-aligned canonical axis and completes with the cross product; simple
/// eigenvectors only get a sign fix (largest-magnitude component positive).
fn canonical_align(vals: &[f64], vecs: &[Vec3]) -> [Vec3; 3] {
    let scale = vals.iter().fold(1.0_f64, |a, &b| a.max(b.abs()));
    let close = |a: f64, b: f64| (a - b).abs() <= DEGENERACY_TOL * scale;

    if close(vals[0], vals[1]) && close(vals[1], vals[2]) {
        return [Vec3::x(), Vec3::y(), Vec3::z()];
    }
    if close(vals[0], vals[1]) {
        let (a, b) = plane_basis(vecs[2]);
        return [a, b, sign_fix(vecs[2])];
    }
    if close(vals[1], vals[2]) {
        let (a, b) = plane_basis(vecs[0]);
        return [sign_fix(vecs[0]), a, b];
    }
    [sign_fix(vecs[0]), sign_fix(vecs[1]), sign_fix(vecs[2])]
}

fn sign_fix(v: Vec3) -> Vec3 {
    let k = v.iamax();
    if v[k] < 0.0 {
        -v
    } else {
        v
    }
}

/// Orthonormal basis of the plane normal to `normal`, aligned toward the
/// canonical axes with the largest projections onto the plane.
fn plane_basis(normal: Vec3) -> (Vec3, Vec3) {
    let n = normal / normal.norm();
    let mut best = 0;
    let mut best_norm = -1.0;
    for k in 0..3 {
        let mut e = Vec3::zeros();
        e[k] = 1.0;
        let proj = e - n * n[k];
        if proj.norm() > best_norm {
            best_norm = proj.norm();
            best = k;
        }
    }
    let mut e = Vec3::zeros();
    e[best] = 1.0;
    let a = (e - n * n[best]).normalize();
    let b = n.cross(&a);
    (a, sign_fix(b))
}
