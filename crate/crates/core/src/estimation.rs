//! Fisher and quantum Fisher information matrices, the Gill-Massar trace
//! functional, and constrained maximum-likelihood estimation over the Bloch
//! ball.

use nalgebra::SymmetricEigen;

use crate::qubit::{BlochState, Mat3, MeasurementRecord, PauliAxis, Vec3};
use crate::{Error, Result};

/// States closer than this to the Bloch sphere are rejected where the
/// quantum Fisher matrix or a per-axis Fisher term would diverge.
pub const FISHER_BOUNDARY_EPS: f64 = 1e-9;

/// A real symmetric positive-semidefinite 3x3 information matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoMatrix {
    m: Mat3,
}

impl InfoMatrix {
    /// Validates symmetry (within 1e-12) and positive semidefiniteness
    /// (eigenvalues >= -1e-10).
    pub fn new(m: Mat3) -> Result<Self> {
        let asym = (m - m.transpose()).abs().max();
        if asym > 1e-12 {
            return Err(Error::InvalidWeighting {
                reason: format!("asymmetry {asym} exceeds 1e-12"),
            });
        }
        let m = (m + m.transpose()) * 0.5;
        let eig = SymmetricEigen::new(m);
        if let Some(min) = eig
            .eigenvalues
            .iter()
            .cloned()
            .min_by(|a, b| a.total_cmp(b))
        {
            if min < -1e-10 {
                return Err(Error::SingularInfoMatrix { eigenvalue: min });
            }
        }
        Ok(Self { m })
    }

    pub(crate) fn from_symmetric_unchecked(m: Mat3) -> Self {
        Self {
            m: (m + m.transpose()) * 0.5,
        }
    }

    pub fn matrix(&self) -> Mat3 {
        self.m
    }

    pub fn eigenvalues(&self) -> Vec3 {
        SymmetricEigen::new(self.m).eigenvalues
    }
}

/// A convex mixture of Pauli-axis measurements: (axis, weight) pairs with
/// nonnegative weights summing to at most 1. Weights below 1 model copies
/// that are discarded (sub-normalized allocation).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementEnsemble {
    items: Vec<(PauliAxis, f64)>,
}

impl MeasurementEnsemble {
    pub fn new(items: Vec<(PauliAxis, f64)>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidEnsemble {
                reason: "ensemble has no axes".into(),
            });
        }
        let mut sum = 0.0;
        for (_, w) in &items {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidEnsemble {
                    reason: format!("weight {w} is negative or not finite"),
                });
            }
            sum += w;
        }
        if sum > 1.0 + 1e-12 {
            return Err(Error::InvalidEnsemble {
                reason: format!("weights sum to {sum} > 1"),
            });
        }
        Ok(Self { items })
    }

    /// The three mutually unbiased axes x, y, z with weight 1/3 each.
    pub fn mub() -> Self {
        Self {
            items: vec![
                (PauliAxis::x(), 1.0 / 3.0),
                (PauliAxis::y(), 1.0 / 3.0),
                (PauliAxis::z(), 1.0 / 3.0),
            ],
        }
    }

    pub fn items(&self) -> &[(PauliAxis, f64)] {
        &self.items
    }

    pub fn total_weight(&self) -> f64 {
        self.items.iter().map(|(_, w)| w).sum()
    }
}

/// Quantum Fisher information matrix of a qubit state in Bloch coordinates:
/// J = I + s s^T / (1 - |s|^2), the inverse of (I - s s^T).
pub fn quantum_fisher(state: &BlochState) -> Result<InfoMatrix> {
    let s = state.vector();
    let n2 = s.norm_squared();
    if n2 >= (1.0 - FISHER_BOUNDARY_EPS) * (1.0 - FISHER_BOUNDARY_EPS) {
        return Err(Error::BoundaryState { norm: n2.sqrt() });
    }
    let j = Mat3::identity() + s * s.transpose() / (1.0 - n2);
    Ok(InfoMatrix::from_symmetric_unchecked(j))
}

/// Inverse quantum Fisher matrix in closed Bloch form, J^-1 = I - s s^T.
/// Valid for every state in the closed ball.
pub fn quantum_fisher_inverse(state: &BlochState) -> Mat3 {
    let s = state.vector();
    Mat3::identity() - s * s.transpose()
}

/// Classical Fisher information matrix of an ensemble of Pauli-axis
/// measurements: I = sum_k q_k r_k r_k^T / (1 - (s.r_k)^2).
pub fn fisher_information(
    state: &BlochState,
    ensemble: &MeasurementEnsemble,
) -> Result<InfoMatrix> {
    let s = state.vector();
    let mut total = Mat3::zeros();
    for (index, (axis, weight)) in ensemble.items().iter().enumerate() {
        if *weight == 0.0 {
            continue;
        }
        let r = axis.vector();
        let m = s.dot(&r);
        if m.abs() >= 1.0 - FISHER_BOUNDARY_EPS {
            return Err(Error::DeterministicOutcome {
                index,
                overlap: m,
            });
        }
        total += r * r.transpose() * (*weight / (1.0 - m * m));
    }
    Ok(InfoMatrix::from_symmetric_unchecked(total))
}

/// The Gill-Massar trace functional tr(J^-1 I) computed from the closed-form
/// J^-1 and the ensemble's Fisher matrix. For a qubit it is bounded by 1 and
/// equals the ensemble's total weight for projective axes.
pub fn gm_trace(state: &BlochState, ensemble: &MeasurementEnsemble) -> Result<f64> {
    let info = fisher_information(state, ensemble)?;
    Ok((quantum_fisher_inverse(state) * info.matrix()).trace())
}

/// Log-likelihood of a Bloch vector given recorded counts,
/// sum over entries of n+ ln p+ + n- ln p-.
pub fn log_likelihood(records: &MeasurementRecord, s: Vec3) -> f64 {
    let mut ll = 0.0;
    for e in records.entries() {
        let m = s.dot(&e.axis.vector()).clamp(-1.0, 1.0);
        if e.n_plus > 0 {
            ll += e.n_plus as f64 * ((1.0 + m) / 2.0).ln();
        }
        if e.n_minus > 0 {
            ll += e.n_minus as f64 * ((1.0 - m) / 2.0).ln();
        }
    }
    ll
}

fn log_likelihood_gradient(records: &MeasurementRecord, s: Vec3) -> Vec3 {
    let mut g = Vec3::zeros();
    for e in records.entries() {
        let r = e.axis.vector();
        let m = s.dot(&r).clamp(-1.0, 1.0);
        let mut coeff = 0.0;
        if e.n_plus > 0 {
            coeff += e.n_plus as f64 / (1.0 + m);
        }
        if e.n_minus > 0 {
            coeff -= e.n_minus as f64 / (1.0 - m);
        }
        g += r * coeff;
    }
    g
}

/// Feasible region for the solver: the ball of radius 1 - MLE_BALL_SHRINK.
/// The shrink keeps every Born probability strictly positive, so the
/// likelihood and its gradient stay finite at boundary solutions.
const MLE_BALL_SHRINK: f64 = 1e-12;
const MLE_GRAD_TOL: f64 = 1e-10;
const MLE_MAX_ITERS: usize = 10_000;

fn project_to_ball(s: Vec3) -> Vec3 {
    let radius = 1.0 - MLE_BALL_SHRINK;
    let n = s.norm();
    if n > radius {
        s * (radius / n)
    } else {
        s
    }
}

/// First-order stationarity measure: the gradient with its outward radial
/// component removed when the iterate sits on the feasible boundary and the
/// gradient pushes outward.
fn projected_gradient_norm(s: Vec3, g: Vec3) -> f64 {
    let radius = 1.0 - MLE_BALL_SHRINK;
    let n = s.norm();
    if n >= radius * (1.0 - 1e-12) {
        let u = s / n;
        let radial = g.dot(&u);
        if radial > 0.0 {
            return (g - u * radial).norm();
        }
    }
    g.norm()
}

/// Weighted least-squares initialization: solve sum_e n_e (s.r_e - m_e) r_e = 0
/// via the eigendecomposition of A = sum_e n_e r_e r_e^T, zeroing components
/// along unmeasured directions, then scale into the ball at radius <= 0.999.
fn linear_inversion_start(records: &MeasurementRecord) -> Vec3 {
    let mut a = Mat3::zeros();
    let mut b = Vec3::zeros();
    for e in records.entries() {
        let n = e.total();
        if n == 0 {
            continue;
        }
        let r = e.axis.vector();
        let m_hat = (e.n_plus as f64 - e.n_minus as f64) / n as f64;
        a += r * r.transpose() * n as f64;
        b += r * (m_hat * n as f64);
    }
    let eig = SymmetricEigen::new(a);
    let max_eig = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = max_eig * 1e-12;
    let mut s = Vec3::zeros();
    for k in 0..3 {
        let lambda = eig.eigenvalues[k];
        if lambda > cutoff {
            let v = eig.eigenvectors.column(k).into_owned();
            s += v * (v.dot(&b) / lambda);
        }
    }
    let n = s.norm();
    if n > 0.999 {
        s * (0.999 / n)
    } else {
        s
    }
}

/// Outcome of the maximum-likelihood solver.
#[derive(Debug, Clone)]
pub struct MleSolution {
    pub estimate: BlochState,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Maximum-likelihood Bloch vector for the recorded counts.
///
/// Projected-gradient ascent with backtracking line search on the multinomial
/// log-likelihood, projection by radial scaling onto the shrunk unit ball.
/// The likelihood is concave for two-outcome projective data, so first-order
/// stationarity identifies the constrained maximum. Axes spanning fewer than
/// three directions leave the unmeasured components at zero (the start point
/// lies in the measured span and every gradient stays inside it).
pub fn mle(records: &MeasurementRecord) -> Result<BlochState> {
    Ok(mle_detailed(records)?.estimate)
}

/// As [`mle`], returning convergence diagnostics.
pub fn mle_detailed(records: &MeasurementRecord) -> Result<MleSolution> {
    solve(records, None)
}

/// As [`mle`], additionally recording the log-likelihood of every iterate
/// (ascent is monotone by construction; the trace lets tests assert it).
pub fn mle_traced(records: &MeasurementRecord) -> Result<(MleSolution, Vec<f64>)> {
    let mut trace = Vec::new();
    let solution = solve(records, Some(&mut trace))?;
    Ok((solution, trace))
}

fn solve(records: &MeasurementRecord, mut trace: Option<&mut Vec<f64>>) -> Result<MleSolution> {
    if records.is_empty() {
        return Err(Error::EmptyRecord);
    }
    let mut s = project_to_ball(linear_inversion_start(records));
    let mut ll = log_likelihood(records, s);
    if let Some(t) = trace.as_deref_mut() {
        t.push(ll);
    }
    let mut step = 1.0 / records.total_counts().max(1) as f64;
    let mut converged = false;
    let mut iterations = 0;
    for iter in 0..MLE_MAX_ITERS {
        iterations = iter + 1;
        let g = log_likelihood_gradient(records, s);
        if projected_gradient_norm(s, g) <= MLE_GRAD_TOL {
            converged = true;
            iterations = iter;
            break;
        }
        // Backtracking: accept the first projected step that does not
        // decrease the likelihood by more than roundoff.
        let mut alpha = step * 4.0;
        let mut accepted = false;
        for _ in 0..60 {
            let candidate = project_to_ball(s + g * alpha);
            let cand_ll = log_likelihood(records, candidate);
            if cand_ll >= ll - 1e-12 * ll.abs().max(1.0) {
                s = candidate;
                ll = cand_ll.max(ll);
                step = alpha;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(ll);
        }
        if !accepted {
            // Line search exhausted: no ascent direction at working precision.
            converged = true;
            break;
        }
    }
    let estimate = BlochState::new(s).expect("projection keeps the iterate feasible");
    Ok(MleSolution {
        estimate,
        log_likelihood: ll,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit::rotation_to_z;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn state(x: f64, y: f64, z: f64) -> BlochState {
        BlochState::from_components(x, y, z).unwrap()
    }

    #[test]
    fn quantum_fisher_closed_form() {
        let j = quantum_fisher(&BlochState::maximally_mixed()).unwrap();
        assert!((j.matrix() - Mat3::identity()).abs().max() < 1e-14);

        let s = state(0.0, 0.0, 0.9);
        let j = quantum_fisher(&s).unwrap();
        let expected = Mat3::from_diagonal(&Vec3::new(1.0, 1.0, 1.0 / 0.19));
        assert!((j.matrix() - expected).abs().max() < 1e-10);

        // J (I - s s^T) = I.
        let product = j.matrix() * quantum_fisher_inverse(&s);
        assert!((product - Mat3::identity()).abs().max() < 1e-10);

        let s = state(0.3, 0.4, 0.0); // |s| = 0.5
        let mut eigs: Vec<f64> = quantum_fisher(&s).unwrap().eigenvalues().iter().cloned().collect();
        eigs.sort_by(f64::total_cmp);
        assert!((eigs[0] - 1.0).abs() < 1e-12);
        assert!((eigs[1] - 1.0).abs() < 1e-12);
        assert!((eigs[2] - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn quantum_fisher_rejects_boundary() {
        let s = state(0.0, 0.0, 1.0);
        assert!(matches!(
            quantum_fisher(&s),
            Err(Error::BoundaryState { .. })
        ));
    }

    #[test]
    fn fisher_information_examples() {
        let i = fisher_information(&BlochState::maximally_mixed(), &MeasurementEnsemble::mub())
            .unwrap();
        assert!((i.matrix() - Mat3::identity() / 3.0).abs().max() < 1e-14);

        let s = state(0.0, 0.0, 0.9);
        let single = MeasurementEnsemble::new(vec![(PauliAxis::z(), 1.0)]).unwrap();
        let i = fisher_information(&s, &single).unwrap();
        let expected = Mat3::from_diagonal(&Vec3::new(0.0, 0.0, 1.0 / 0.19));
        assert!((i.matrix() - expected).abs().max() < 1e-10);

        // Zero-weight axes contribute nothing, even degenerate ones.
        let with_zero = MeasurementEnsemble::new(vec![
            (PauliAxis::z(), 0.5),
            (PauliAxis::x(), 0.0),
        ])
        .unwrap();
        let i_half = fisher_information(&s, &with_zero).unwrap();
        assert!((i_half.matrix() - expected * 0.5).abs().max() < 1e-10);
    }

    #[test]
    fn fisher_information_rejects_deterministic_axis() {
        let s = state(0.0, 0.0, 1.0);
        let single = MeasurementEnsemble::new(vec![(PauliAxis::z(), 1.0)]).unwrap();
        assert!(matches!(
            fisher_information(&s, &single),
            Err(Error::DeterministicOutcome { .. })
        ));
    }

    #[test]
    fn gm_trace_examples() {
        let one = gm_trace(&BlochState::maximally_mixed(), &MeasurementEnsemble::mub()).unwrap();
        assert!((one - 1.0).abs() < 1e-12);

        let s = state(0.0, 0.0, 0.9);
        let single = MeasurementEnsemble::new(vec![(PauliAxis::z(), 1.0)]).unwrap();
        assert!((gm_trace(&s, &single).unwrap() - 1.0).abs() < 1e-12);

        let half = MeasurementEnsemble::new(vec![
            (PauliAxis::x(), 1.0 / 6.0),
            (PauliAxis::y(), 1.0 / 6.0),
            (PauliAxis::z(), 1.0 / 6.0),
        ])
        .unwrap();
        assert!((gm_trace(&s, &half).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fisher_matches_finite_differences() {
        // Central-difference Fisher matrix from the Born probabilities:
        // I_jk = sum_outcomes (d_j p)(d_k p) / p.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let s = loop {
                let v = Vec3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                if v.norm() < 0.95 {
                    break BlochState::new(v).unwrap();
                }
            };
            let n_axes = rng.gen_range(1..=4);
            let mut items = Vec::new();
            let mut remaining = 1.0;
            for k in 0..n_axes {
                let dir = Vec3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                if dir.norm() < 1e-3 {
                    continue;
                }
                let w = if k == n_axes - 1 {
                    remaining
                } else {
                    let w = rng.gen_range(0.0..remaining);
                    remaining -= w;
                    w
                };
                items.push((PauliAxis::from_direction(dir).unwrap(), w));
            }
            if items.is_empty() {
                continue;
            }
            let ensemble = MeasurementEnsemble::new(items).unwrap();
            let analytic = fisher_information(&s, &ensemble).unwrap().matrix();

            let h = 1e-5;
            let mut numeric = Mat3::zeros();
            for (axis, w) in ensemble.items() {
                if *w == 0.0 {
                    continue;
                }
                let prob = |v: Vec3, sign: f64| {
                    let m = v.dot(&axis.vector());
                    (1.0 + sign * m) / 2.0
                };
                for j in 0..3 {
                    for k in 0..3 {
                        let mut ej = Vec3::zeros();
                        ej[j] = h;
                        let mut ek = Vec3::zeros();
                        ek[k] = h;
                        for sign in [1.0, -1.0] {
                            let p0 = prob(s.vector(), sign);
                            let dj =
                                (prob(s.vector() + ej, sign) - prob(s.vector() - ej, sign)) / (2.0 * h);
                            let dk =
                                (prob(s.vector() + ek, sign) - prob(s.vector() - ek, sign)) / (2.0 * h);
                            numeric[(j, k)] += w * dj * dk / p0;
                        }
                    }
                }
            }
            assert!(
                (analytic - numeric).abs().max() < 1e-6,
                "mismatch {:?}",
                (analytic - numeric).abs().max()
            );
        }
    }

    #[test]
    fn mle_interior_stationary_point() {
        let mut rec = MeasurementRecord::new();
        rec.push(PauliAxis::x(), 75, 25);
        rec.push(PauliAxis::y(), 75, 25);
        rec.push(PauliAxis::z(), 75, 25);
        let est = mle(&rec).unwrap().vector();
        assert!((est - Vec3::new(0.5, 0.5, 0.5)).norm() < 1e-9, "{est:?}");
    }

    #[test]
    fn mle_boundary_solution() {
        let mut rec = MeasurementRecord::new();
        rec.push(PauliAxis::x(), 100, 0);
        rec.push(PauliAxis::y(), 100, 0);
        rec.push(PauliAxis::z(), 100, 0);
        let est = mle(&rec).unwrap().vector();
        let expected = Vec3::new(1.0, 1.0, 1.0) / 3f64.sqrt();
        assert!((est - expected).norm() < 1e-6, "{est:?}");
    }

    #[test]
    fn mle_unmeasured_components_stay_zero() {
        let mut rec = MeasurementRecord::new();
        rec.push(PauliAxis::z(), 60, 40);
        let est = mle(&rec).unwrap().vector();
        assert!((est - Vec3::new(0.0, 0.0, 0.2)).norm() < 1e-9, "{est:?}");
    }

    #[test]
    fn mle_rejects_empty_records() {
        let rec = MeasurementRecord::new();
        assert!(matches!(mle(&rec), Err(Error::EmptyRecord)));
        let mut zero = MeasurementRecord::new();
        zero.push(PauliAxis::z(), 0, 0);
        assert!(matches!(mle(&zero), Err(Error::EmptyRecord)));
    }

    #[test]
    fn mle_handles_rotated_axes() {
        // Counts generated from exact probabilities on a rotated frame
        // recover the generating state.
        let s_true = Vec3::new(0.2, -0.3, 0.6);
        let rot = rotation_to_z(&Vec3::new(1.0, 2.0, -0.5));
        let axes = rot.lab_axes();
        let mut rec = MeasurementRecord::new();
        for axis in axes {
            let m = s_true.dot(&axis.vector());
            let n = 100_000u64;
            let n_plus = ((1.0 + m) / 2.0 * n as f64).round() as u64;
            rec.push(axis, n_plus, n - n_plus);
        }
        let est = mle(&rec).unwrap().vector();
        assert!((est - s_true).norm() < 1e-4, "{est:?}");
    }

    #[test]
    fn mle_trace_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let mut rec = MeasurementRecord::new();
            for _ in 0..rng.gen_range(1..=4) {
                let dir = Vec3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                );
                if dir.norm() < 1e-2 {
                    continue;
                }
                let n_plus = rng.gen_range(0..=30);
                let n_minus = rng.gen_range(0..=30);
                rec.push(PauliAxis::from_direction(dir).unwrap(), n_plus, n_minus);
            }
            if rec.is_empty() {
                continue;
            }
            let (_, trace) = mle_traced(&rec).unwrap();
            for pair in trace.windows(2) {
                assert!(
                    pair[1] >= pair[0] - 1e-12 * pair[0].abs().max(1.0),
                    "likelihood decreased: {pair:?}"
                );
            }
        }
    }
}
