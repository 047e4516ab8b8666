//! Qubit state tomography in Bloch coordinates: precision bounds, adaptive
//! measurement strategies, maximum-likelihood reconstruction, and the
//! systematic-error budget of a waveplate/PBS measurement chain.

pub mod bounds;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod optics;
pub mod qubit;
pub mod seed;
pub mod strategies;

pub use bounds::{OptimalScheme, WeightingSpec};
pub use error::Error;
pub use harness::{ExperimentPlan, FigureOfMerit, SimulationReport};
pub use qubit::{BlochState, MeasurementRecord, PauliAxis};
pub use strategies::{StrategyConfig, TrialResult};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
