//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("Bloch vector norm {norm} lies outside the unit ball")]
    OutsideBall { norm: f64 },

    #[error("measurement axis must be a unit vector (got norm {norm})")]
    NotUnitAxis { norm: f64 },

    #[error("matrix is not a proper rotation: {reason}")]
    NotRotation { reason: &'static str },

    #[error("state with norm {norm} is too close to the Bloch sphere; the quantum Fisher matrix diverges there")]
    BoundaryState { norm: f64 },

    #[error("axis {index} has a deterministic outcome (|s.r| = {overlap}); its Fisher contribution diverges")]
    DeterministicOutcome { index: usize, overlap: f64 },

    #[error("ensemble is invalid: {reason}")]
    InvalidEnsemble { reason: String },

    #[error("measurement record contains no counts")]
    EmptyRecord,

    #[error("weighting matrix is not symmetric positive semidefinite: {reason}")]
    InvalidWeighting { reason: String },

    #[error("all weights are zero")]
    AllZeroWeights,

    #[error("information matrix is singular or indefinite (eigenvalue {eigenvalue})")]
    SingularInfoMatrix { eigenvalue: f64 },

    #[error("calibration axes are not orthonormal")]
    NonOrthonormalAxes,

    #[error("uncertainty for {name} is negative ({value})")]
    NegativeUncertainty { name: &'static str, value: f64 },

    #[error("invalid strategy configuration: {reason}")]
    InvalidConfig { reason: String },

    #[error("invalid plan field `{field}`: {reason}")]
    InvalidPlan { field: &'static str, reason: String },

    #[error("trial failed in cell (s = {s}, strategy = {strategy}, rep = {rep}): {source}")]
    CellFailed {
        s: f64,
        strategy: String,
        rep: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("figure of merit is undefined for a true state on the Bloch sphere")]
    BoundaryFigureOfMerit,

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
