//! Bloch-vector qubit model: states, Pauli-axis observables, Born
//! probabilities, fidelity and Bures distance, rotations, and binomial
//! sampling of two-outcome measurements.
//!
//! A qubit density matrix is parametrized as rho = (1 + s.sigma)/2 with a
//! real Bloch vector `s`, ||s|| <= 1. A projective measurement along a unit
//! axis `r` has outcomes +-1 with Born probabilities (1 +- s.r)/2.

use nalgebra::{Matrix3, Vector3};
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::{Error, Result};

/// Real 3-vector used for Bloch vectors and measurement axes.
pub type Vec3 = Vector3<f64>;
/// Real 3x3 matrix used for rotations and information matrices.
pub type Mat3 = Matrix3<f64>;

/// Numerical slack allowed on the unit-ball constraint at construction.
pub const BALL_EPS: f64 = 1e-12;

/// A qubit state in Bloch form; construction enforces ||s|| <= 1 + BALL_EPS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochState {
    s: Vec3,
}

impl BlochState {
    /// Builds a state from a Bloch vector, rejecting vectors outside the
    /// closed unit ball (up to [`BALL_EPS`] slack).
    pub fn new(s: Vec3) -> Result<Self> {
        let norm = s.norm();
        if !norm.is_finite() || norm > 1.0 + BALL_EPS {
            return Err(Error::OutsideBall { norm });
        }
        Ok(Self { s })
    }

    pub fn from_components(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::new(Vec3::new(x, y, z))
    }

    /// The maximally mixed state, s = 0.
    pub fn maximally_mixed() -> Self {
        Self { s: Vec3::zeros() }
    }

    /// A state of length `len` along the (normalized) direction `dir`.
    pub fn along(dir: Vec3, len: f64) -> Result<Self> {
        let n = dir.norm();
        if n == 0.0 {
            if len == 0.0 {
                return Ok(Self::maximally_mixed());
            }
            return Err(Error::OutsideBall { norm: f64::NAN });
        }
        Self::new(dir * (len / n))
    }

    pub fn vector(&self) -> Vec3 {
        self.s
    }

    /// Length of the Bloch vector (1 for pure states, 0 for maximally mixed).
    pub fn norm(&self) -> f64 {
        self.s.norm()
    }
}

/// A unit vector defining a two-outcome Pauli-axis measurement r.sigma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliAxis {
    r: Vec3,
}

impl PauliAxis {
    /// Accepts a vector that is already unit length within 1e-9 and stores
    /// it renormalized.
    pub fn new(r: Vec3) -> Result<Self> {
        let norm = r.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotUnitAxis { norm });
        }
        Ok(Self { r: r / norm })
    }

    /// Normalizes an arbitrary nonzero direction into an axis.
    pub fn from_direction(v: Vec3) -> Result<Self> {
        let norm = v.norm();
        if !norm.is_finite() || norm < 1e-12 {
            return Err(Error::NotUnitAxis { norm });
        }
        Ok(Self { r: v / norm })
    }

    pub fn x() -> Self {
        Self { r: Vec3::x() }
    }

    pub fn y() -> Self {
        Self { r: Vec3::y() }
    }

    pub fn z() -> Self {
        Self { r: Vec3::z() }
    }

    pub fn vector(&self) -> Vec3 {
        self.r
    }
}

/// A proper rotation of Bloch space (SO(3) matrix).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation3 {
    m: Mat3,
}

impl Rotation3 {
    /// Validates orthogonality (R^T R = I within 1e-12) and det R = +1.
    pub fn from_matrix(m: Mat3) -> Result<Self> {
        let gram = m.transpose() * m;
        let dev = (gram - Mat3::identity()).abs().max();
        if dev > 1e-12 {
            return Err(Error::NotRotation {
                reason: "R^T R deviates from the identity",
            });
        }
        if (m.determinant() - 1.0).abs() > 1e-12 {
            return Err(Error::NotRotation {
                reason: "determinant is not +1",
            });
        }
        Ok(Self { m })
    }

    pub fn identity() -> Self {
        Self {
            m: Mat3::identity(),
        }
    }

    pub fn matrix(&self) -> Mat3 {
        self.m
    }

    /// Applies the rotation to a vector.
    pub fn apply(&self, v: Vec3) -> Vec3 {
        self.m * v
    }

    /// Applies the inverse rotation (R^T v).
    pub fn apply_inverse(&self, v: Vec3) -> Vec3 {
        self.m.transpose() * v
    }

    /// The three lab-frame axes R^T e_j that realize measurements of the
    /// rotated-frame coordinate axes: measuring R^T e_j on s equals
    /// measuring e_j on R s.
    pub fn lab_axes(&self) -> [PauliAxis; 3] {
        let rt = self.m.transpose();
        [
            PauliAxis::from_direction(rt.column(0).into_owned()).expect("unit column"),
            PauliAxis::from_direction(rt.column(1).into_owned()).expect("unit column"),
            PauliAxis::from_direction(rt.column(2).into_owned()).expect("unit column"),
        ]
    }
}

/// Born probabilities (p_plus, p_minus) = ((1 + s.r)/2, (1 - s.r)/2) for
/// measuring the axis `r` on the state `s`.
pub fn born_probabilities(state: &BlochState, axis: &PauliAxis) -> (f64, f64) {
    let m = state.vector().dot(&axis.vector());
    // Clamp guards the +-1e-12 construction slack so probabilities stay in [0, 1].
    let m = m.clamp(-1.0, 1.0);
    ((1.0 + m) / 2.0, (1.0 - m) / 2.0)
}

/// Fidelity between two qubit states in closed Bloch form:
/// F = [1 + a.b + sqrt((1 - |a|^2)(1 - |b|^2))] / 2.
pub fn fidelity(a: &BlochState, b: &BlochState) -> f64 {
    let (va, vb) = (a.vector(), b.vector());
    let ra = (1.0 - va.norm_squared()).max(0.0);
    let rb = (1.0 - vb.norm_squared()).max(0.0);
    let f = (1.0 + va.dot(&vb) + (ra * rb).sqrt()) / 2.0;
    f.clamp(0.0, 1.0)
}

/// Squared Bures distance, convention D_B^2 = 2 (1 - sqrt(F)).
pub fn bures_distance_sq(a: &BlochState, b: &BlochState) -> f64 {
    2.0 * (1.0 - fidelity(a, b).sqrt())
}

/// A rotation taking the direction of `v` onto +z.
///
/// Rodrigues construction about the axis v_hat x z_hat by angle
/// arccos(v_hat . z_hat). The cross product with z copies components
/// directly, so the construction stays exact arbitrarily close to the
/// poles; only exactly degenerate inputs take the conventional branches:
/// zero-length or +z-aligned vectors return the identity, -z-aligned
/// vectors the half-turn about x.
pub fn rotation_to_z(v: &Vec3) -> Rotation3 {
    let norm = v.norm();
    if norm < 1e-12 {
        return Rotation3::identity();
    }
    let u = v / norm;
    let axis = u.cross(&Vec3::z()); // (u_y, -u_x, 0)
    let s = axis.norm(); // sin(angle), angle in [0, pi]
    if s <= 1e-14 {
        if u.z >= 0.0 {
            return Rotation3::identity();
        }
        // Half-turn about x: (x, y, z) -> (x, -y, -z).
        let m = Mat3::from_diagonal(&Vec3::new(1.0, -1.0, -1.0));
        return Rotation3 { m };
    }
    let c = u.z; // u . z_hat
    let k = axis / s;
    let kx = Mat3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    let m = Mat3::identity() + kx * s + kx * kx * (1.0 - c);
    Rotation3 { m }
}

/// One record entry: a measured axis with its +-1 outcome counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordEntry {
    pub axis: PauliAxis,
    pub n_plus: u64,
    pub n_minus: u64,
}

impl RecordEntry {
    pub fn total(&self) -> u64 {
        self.n_plus + self.n_minus
    }
}

/// Sufficient statistics for the multinomial likelihood: a list of
/// (axis, n_plus, n_minus) triples.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MeasurementRecord {
    entries: Vec<RecordEntry>,
}

impl MeasurementRecord {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, axis: PauliAxis, n_plus: u64, n_minus: u64) {
        self.entries.push(RecordEntry {
            axis,
            n_plus,
            n_minus,
        });
    }

    pub fn entries(&self) -> &[RecordEntry] {
        &self.entries
    }

    pub fn total_counts(&self) -> u64 {
        self.entries.iter().map(RecordEntry::total).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_counts() == 0
    }

    /// Concatenates the entries of another record.
    pub fn extend(&mut self, other: &MeasurementRecord) {
        self.entries.extend_from_slice(&other.entries);
    }
}

/// Draws (n_plus, n_minus) for `n` copies measured along `axis`,
/// n_plus ~ Binomial(n, p_plus). Deterministic for a fixed RNG stream.
pub fn sample_counts<R: Rng + ?Sized>(
    state: &BlochState,
    axis: &PauliAxis,
    n: u64,
    rng: &mut R,
) -> (u64, u64) {
    if n == 0 {
        return (0, 0);
    }
    let (p_plus, _) = born_probabilities(state, axis);
    if p_plus <= 0.0 {
        return (0, n);
    }
    if p_plus >= 1.0 {
        return (n, 0);
    }
    let dist = Binomial::new(n, p_plus).expect("p in (0, 1)");
    let n_plus = dist.sample(rng);
    (n_plus, n - n_plus)
}
