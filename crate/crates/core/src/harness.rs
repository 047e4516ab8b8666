//! Monte Carlo experiment runner: sweeps true states, strategies, and
//! figures of merit; aggregates scaled errors with uncertainties; emits
//! JSON and CSV reports.
//!
//! Reports are bit-reproducible: trial r of cell (i, k) draws its stream
//! from hash(master_seed, i, k, r), trials are collected into per-repetition
//! slots, and the aggregation uses pairwise summation, so neither thread
//! count nor scheduling order can change a single output byte.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

use crate::bounds::{gm_bound_mse, gm_scheme_metric, metric_weighting, standard_mse_theory};
use crate::qubit::{bures_distance_sq, rotation_to_z, BlochState, Vec3};
use crate::seed::trial_rng;
use crate::strategies::{run_trial, StrategyConfig, StrategyKind};
use crate::{Error, Result};

/// Error functional evaluated per trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FigureOfMerit {
    /// Squared Euclidean error of the Bloch vector.
    Mse,
    /// Squared Bures distance 2 (1 - sqrt(F)).
    Bures,
    /// Local quadratic form of the monotone metric f_n, weights evaluated at
    /// the true state in the frame whose third axis is the Bloch direction.
    /// Coincides with the squared Bures distance to second order at n = 1.
    Wmse { n: u32 },
    /// Score each cell by its own strategy's weighting: metric(n) is scored
    /// as wmse(n), the identity weighting as mse. Lets one plan sweep a
    /// family of metrics side by side.
    Matched,
}

impl FigureOfMerit {
    pub fn label(&self) -> String {
        match self {
            FigureOfMerit::Mse => "mse".into(),
            FigureOfMerit::Bures => "bures".into(),
            FigureOfMerit::Wmse { n } => format!("wmse({n})"),
            FigureOfMerit::Matched => "matched".into(),
        }
    }

    /// The scaled Gill-Massar bound for this figure of merit at radius `s`.
    pub fn gm_bound(&self, s: f64) -> Result<f64> {
        match self {
            FigureOfMerit::Mse => Ok(gm_bound_mse(s)),
            // The Bures bound is 9/4 independent of the state.
            FigureOfMerit::Bures => Ok(2.25),
            FigureOfMerit::Wmse { n } => Ok(gm_scheme_metric(s, *n)?.bound),
            FigureOfMerit::Matched => Err(Error::InvalidPlan {
                field: "figure_of_merit",
                reason: "`matched` must be resolved against a strategy first".into(),
            }),
        }
    }

    /// Resolves `matched` against a strategy's weighting; other variants
    /// pass through unchanged.
    pub fn resolve(&self, config: &StrategyConfig) -> Result<FigureOfMerit> {
        match self {
            FigureOfMerit::Matched => match config.weighting {
                crate::bounds::WeightingSpec::IdentityMse => Ok(FigureOfMerit::Mse),
                crate::bounds::WeightingSpec::MonotoneMetric { n } => {
                    Ok(FigureOfMerit::Wmse { n })
                }
                crate::bounds::WeightingSpec::Explicit { .. } => Err(Error::InvalidPlan {
                    field: "figure_of_merit",
                    reason: "`matched` does not support explicit weighting matrices".into(),
                }),
            },
            other => Ok(*other),
        }
    }
}

/// Per-trial error between the estimate and the true state.
pub fn figure_of_merit(
    estimate: &BlochState,
    true_state: &BlochState,
    fom: &FigureOfMerit,
) -> Result<f64> {
    match fom {
        FigureOfMerit::Mse => Ok((estimate.vector() - true_state.vector()).norm_squared()),
        FigureOfMerit::Bures => Ok(bures_distance_sq(estimate, true_state)),
        FigureOfMerit::Wmse { n } => {
            let s_len = true_state.norm();
            let w = metric_weighting(s_len, *n).map_err(|_| Error::BoundaryFigureOfMerit)?;
            let rotation = rotation_to_z(&true_state.vector());
            let d = rotation.apply(estimate.vector() - true_state.vector());
            Ok(w[0] * d.x * d.x + w[1] * d.y * d.y + w[2] * d.z * d.z)
        }
        FigureOfMerit::Matched => Err(Error::InvalidPlan {
            field: "figure_of_merit",
            reason: "`matched` must be resolved against a strategy first".into(),
        }),
    }
}

/// A full sweep: one true direction, a grid of radii, a set of strategies,
/// and a repetition count, all driven from one master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    /// Direction of every true Bloch vector (unit norm up to 1 percent;
    /// normalized before use).
    pub true_direction: [f64; 3],
    /// Bloch-vector lengths to sweep.
    pub s_grid: Vec<f64>,
    pub strategies: Vec<StrategyConfig>,
    pub repetitions: u64,
    pub master_seed: u64,
    pub figure_of_merit: FigureOfMerit,
    /// Parallelism hint; `simulate --threads` overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    /// Default output prefix; `simulate --out` overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_prefix: Option<String>,
}

impl ExperimentPlan {
    pub fn validate(&self) -> Result<()> {
        let norm = Vec3::from(self.true_direction).norm();
        if !(0.99..=1.01).contains(&norm) {
            return Err(Error::InvalidPlan {
                field: "true_direction",
                reason: format!("norm {norm} is not within 1 percent of unit length"),
            });
        }
        if self.s_grid.is_empty() {
            return Err(Error::InvalidPlan {
                field: "s_grid",
                reason: "grid is empty".into(),
            });
        }
        let wmse_scored = match self.figure_of_merit {
            FigureOfMerit::Wmse { .. } => true,
            FigureOfMerit::Matched => self.strategies.iter().any(|c| {
                matches!(
                    c.weighting,
                    crate::bounds::WeightingSpec::MonotoneMetric { .. }
                )
            }),
            _ => false,
        };
        for &s in &self.s_grid {
            if !(0.0..=1.0).contains(&s) {
                return Err(Error::InvalidPlan {
                    field: "s_grid",
                    reason: format!("radius {s} outside [0, 1]"),
                });
            }
            if wmse_scored && s >= 1.0 {
                return Err(Error::InvalidPlan {
                    field: "s_grid",
                    reason: "the wmse figure of merit requires s < 1".into(),
                });
            }
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidPlan {
                field: "repetitions",
                reason: "must be at least 1".into(),
            });
        }
        if self.strategies.is_empty() {
            return Err(Error::InvalidPlan {
                field: "strategies",
                reason: "no strategies listed".into(),
            });
        }
        for (k, strategy) in self.strategies.iter().enumerate() {
            strategy.validate().map_err(|e| Error::InvalidPlan {
                field: "strategies",
                reason: format!("entry {k}: {e}"),
            })?;
            self.figure_of_merit.resolve(strategy)?;
        }
        if let FigureOfMerit::Wmse { n } = self.figure_of_merit {
            if n == 0 {
                return Err(Error::InvalidPlan {
                    field: "figure_of_merit",
                    reason: "metric order n must be at least 1".into(),
                });
            }
        }
        Ok(())
    }

    fn unit_direction(&self) -> Vec3 {
        let d = Vec3::from(self.true_direction);
        d / d.norm()
    }
}

/// Aggregated result for one (radius, strategy) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportCell {
    pub s: f64,
    pub strategy: String,
    pub fom: String,
    pub n: u64,
    pub n1: u64,
    /// N times the mean figure of merit over the repetitions.
    pub scaled_error: f64,
    /// Standard deviation of the mean of the scaled error.
    pub sem: f64,
    pub n_reps: u64,
    /// Scaled Gill-Massar bound at this radius.
    pub gm_bound: f64,
    /// 3 (3 - s^2) reference, present for the MSE figure of merit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standard_theory: Option<f64>,
    /// "boundary-bias regime" for s >= 0.98, where the constrained estimator
    /// is visibly biased; no debiasing is applied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A plan echo plus one cell per (radius, strategy) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub plan: ExperimentPlan,
    pub cells: Vec<ReportCell>,
}

/// Radii at or above this are annotated as boundary-bias cells.
const BOUNDARY_BIAS_RADIUS: f64 = 0.98;

/// Runs the plan on the global thread pool (or the plan's `threads` hint).
pub fn run_plan(plan: &ExperimentPlan) -> Result<SimulationReport> {
    run_plan_with_threads(plan, plan.threads)
}

/// Runs the plan on a dedicated pool of `threads` workers (None uses the
/// global pool). The report is identical for every thread count.
pub fn run_plan_with_threads(
    plan: &ExperimentPlan,
    threads: Option<usize>,
) -> Result<SimulationReport> {
    plan.validate()?;
    match threads {
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k.max(1))
                .build()
                .map_err(|e| Error::Io(e.to_string()))?;
            pool.install(|| run_plan_inner(plan))
        }
        None => run_plan_inner(plan),
    }
}

fn run_plan_inner(plan: &ExperimentPlan) -> Result<SimulationReport> {
    let direction = plan.unit_direction();
    let mut jobs = Vec::new();
    for (s_idx, &s) in plan.s_grid.iter().enumerate() {
        for (k_idx, config) in plan.strategies.iter().enumerate() {
            jobs.push((s_idx, s, k_idx, config));
        }
    }

    let per_cell: Vec<Result<Vec<f64>>> = jobs
        .par_iter()
        .map(|&(s_idx, s, k_idx, config)| {
            let true_state = BlochState::along(direction, s)?;
            let fom = plan.figure_of_merit.resolve(config)?;
            (0..plan.repetitions)
                .into_par_iter()
                .map(|rep| {
                    let mut rng =
                        trial_rng(plan.master_seed, s_idx as u64, k_idx as u64, rep);
                    let trial = run_trial(&true_state, config, &mut rng).map_err(|e| {
                        Error::CellFailed {
                            s,
                            strategy: config.label().to_string(),
                            rep,
                            source: Box::new(e),
                        }
                    })?;
                    figure_of_merit(&trial.estimate, &true_state, &fom).map_err(|e| {
                        Error::CellFailed {
                            s,
                            strategy: config.label().to_string(),
                            rep,
                            source: Box::new(e),
                        }
                    })
                })
                .collect()
        })
        .collect();

    let mut cells = Vec::with_capacity(jobs.len());
    for (&(_, s, _, config), values) in jobs.iter().zip(per_cell) {
        let values = values?;
        let fom = plan.figure_of_merit.resolve(config)?;
        let (mean, sem) = mean_and_sem(&values);
        let scale = config.n as f64;
        cells.push(ReportCell {
            s,
            strategy: config.label().to_string(),
            fom: fom.label(),
            n: config.n,
            n1: if config.kind == StrategyKind::Adaptive {
                config.n1
            } else {
                0
            },
            scaled_error: scale * mean,
            sem: scale * sem,
            n_reps: plan.repetitions,
            gm_bound: fom.gm_bound(s)?,
            standard_theory: match fom {
                FigureOfMerit::Mse => Some(standard_mse_theory(s)),
                _ => None,
            },
            note: (s >= BOUNDARY_BIAS_RADIUS).then(|| "boundary-bias regime".to_string()),
        });
    }

    Ok(SimulationReport {
        plan: plan.clone(),
        cells,
    })
}

/// Pairwise (cascade) summation: error grows as log n instead of n, and the
/// result depends only on the slice order, not on thread scheduling.
fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn mean_and_sem(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let squares: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let variance = pairwise_sum(&squares) / (n as f64 - 1.0);
    (mean, (variance / n as f64).sqrt())
}

impl SimulationReport {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Fixed-schema CSV: `s,strategy,fom,N,N1,scaled_error,sem,reps`.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("s,strategy,fom,N,N1,scaled_error,sem,reps\n");
        for c in &self.cells {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                c.s, c.strategy, c.fom, c.n, c.n1, c.scaled_error, c.sem, c.n_reps
            )
            .expect("string write");
        }
        out
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())?;
        Ok(())
    }
}
