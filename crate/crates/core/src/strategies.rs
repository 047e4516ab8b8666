//! The three tomography strategies: standard (even split over x, y, z),
//! two-step adaptive, and known-state benchmark. Each consumes a copy budget
//! and an RNG stream and returns the records plus the maximum-likelihood
//! estimate.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{gm_scheme_general, gm_scheme_metric, optimal_probabilities_diagonal, WeightingSpec};
use crate::estimation::mle;
use crate::qubit::{
    rotation_to_z, sample_counts, BlochState, MeasurementRecord, PauliAxis,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    Standard,
    Adaptive,
    KnownState,
}

impl StrategyKind {
    pub fn label(&self) -> &'static str {
        match self {
            StrategyKind::Standard => "standard",
            StrategyKind::Adaptive => "adaptive",
            StrategyKind::KnownState => "known-state",
        }
    }
}

/// How fractional copy allocations are turned into integer counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AllocationPolicy {
    /// floor(n p_j) plus largest-remainder distribution of the residue.
    #[default]
    DeterministicRounding,
    /// An exact multinomial draw with probabilities p_j.
    Multinomial,
}

/// Which step's statistics feed the final MLE of the adaptive strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MleData {
    #[default]
    BothSteps,
    Step2Only,
}

/// Full description of one tomography strategy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyConfig {
    pub kind: StrategyKind,
    /// Total copy budget N.
    pub n: u64,
    /// Step-1 budget N1 (adaptive only; ignored otherwise).
    #[serde(default)]
    pub n1: u64,
    #[serde(default = "default_weighting")]
    pub weighting: WeightingSpec,
    #[serde(default)]
    pub allocation: AllocationPolicy,
    #[serde(default)]
    pub mle_data: MleData,
}

fn default_weighting() -> WeightingSpec {
    WeightingSpec::IdentityMse
}

impl StrategyConfig {
    pub fn standard(n: u64) -> Self {
        Self {
            kind: StrategyKind::Standard,
            n,
            n1: 0,
            weighting: WeightingSpec::IdentityMse,
            allocation: AllocationPolicy::DeterministicRounding,
            mle_data: MleData::BothSteps,
        }
    }

    pub fn adaptive(n: u64, n1: u64, weighting: WeightingSpec) -> Self {
        Self {
            kind: StrategyKind::Adaptive,
            n,
            n1,
            weighting,
            allocation: AllocationPolicy::DeterministicRounding,
            mle_data: MleData::BothSteps,
        }
    }

    pub fn known_state(n: u64, weighting: WeightingSpec) -> Self {
        Self {
            kind: StrategyKind::KnownState,
            n,
            n1: 0,
            weighting,
            allocation: AllocationPolicy::DeterministicRounding,
            mle_data: MleData::BothSteps,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig {
                reason: "copy budget N must be positive".into(),
            });
        }
        match self.kind {
            StrategyKind::Standard => {
                if self.n < 3 {
                    return Err(Error::InvalidConfig {
                        reason: format!("standard tomography needs N >= 3 (got {})", self.n),
                    });
                }
            }
            StrategyKind::Adaptive => {
                if self.n1 == 0 || self.n1 >= self.n {
                    return Err(Error::InvalidConfig {
                        reason: format!(
                            "adaptive requires 0 < N1 < N (got N1 = {}, N = {})",
                            self.n1, self.n
                        ),
                    });
                }
            }
            StrategyKind::KnownState => {}
        }
        self.weighting.validate()
    }

    pub fn label(&self) -> &'static str {
        self.kind.label()
    }
}

/// One simulated tomography run: the estimate, the raw records, and the
/// lab-frame axes that were measured.
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub estimate: BlochState,
    pub records: MeasurementRecord,
    pub effective_axes: Vec<PauliAxis>,
}

/// Splits `n` copies over three axes with the given probabilities.
///
/// Deterministic rounding assigns floor(n p_j) and hands the residue to the
/// largest remainders (ties to the lower index); the multinomial policy
/// draws the split from the exact multinomial distribution via sequential
/// binomials.
pub fn allocate_counts<R: Rng + ?Sized>(
    probabilities: [f64; 3],
    n: u64,
    policy: AllocationPolicy,
    rng: &mut R,
) -> [u64; 3] {
    debug_assert!(probabilities.iter().all(|p| (-1e-12..=1.0 + 1e-12).contains(p)));
    debug_assert!((probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    match policy {
        AllocationPolicy::DeterministicRounding => {
            let mut counts = [0u64; 3];
            let mut remainders = [0.0f64; 3];
            let mut assigned = 0u64;
            for j in 0..3 {
                let exact = n as f64 * probabilities[j].clamp(0.0, 1.0);
                counts[j] = exact.floor() as u64;
                remainders[j] = exact - exact.floor();
                assigned += counts[j];
            }
            let mut order = [0usize, 1, 2];
            order.sort_by(|&a, &b| remainders[b].total_cmp(&remainders[a]).then(a.cmp(&b)));
            let mut residue = n - assigned.min(n);
            for &j in &order {
                if residue == 0 {
                    break;
                }
                counts[j] += 1;
                residue -= 1;
            }
            counts
        }
        AllocationPolicy::Multinomial => {
            let mut counts = [0u64; 3];
            let mut remaining_n = n;
            let mut remaining_p = 1.0f64;
            for j in 0..2 {
                if remaining_n == 0 || remaining_p <= 0.0 {
                    break;
                }
                let p = (probabilities[j] / remaining_p).clamp(0.0, 1.0);
                let draw = if p >= 1.0 {
                    remaining_n
                } else if p <= 0.0 {
                    0
                } else {
                    use rand_distr::Distribution;
                    rand_distr::Binomial::new(remaining_n, p)
                        .expect("p in (0, 1)")
                        .sample(rng)
                };
                counts[j] = draw;
                remaining_n -= draw;
                remaining_p -= probabilities[j];
            }
            counts[2] = remaining_n;
            counts
        }
    }
}

/// Splits `n` copies evenly over x, y, z; the remainder goes to x first,
/// then y. N = 4 gives (2, 1, 1).
fn even_split(n: u64) -> [u64; 3] {
    let base = n / 3;
    let rem = n % 3;
    [
        base + u64::from(rem >= 1),
        base + u64::from(rem >= 2),
        base,
    ]
}

fn measure_axes<R: Rng + ?Sized>(
    state: &BlochState,
    axes: &[PauliAxis; 3],
    counts: [u64; 3],
    record: &mut MeasurementRecord,
    rng: &mut R,
) {
    for (axis, n) in axes.iter().zip(counts) {
        let (n_plus, n_minus) = sample_counts(state, axis, n, rng);
        record.push(*axis, n_plus, n_minus);
    }
}

/// Standard tomography: x, y, z on (nearly) N/3 copies each, then the MLE.
pub fn run_standard<R: Rng + ?Sized>(
    true_state: &BlochState,
    n: u64,
    rng: &mut R,
) -> Result<TrialResult> {
    StrategyConfig::standard(n).validate()?;
    let axes = [PauliAxis::x(), PauliAxis::y(), PauliAxis::z()];
    let mut records = MeasurementRecord::new();
    measure_axes(true_state, &axes, even_split(n), &mut records, rng);
    let estimate = mle(&records)?;
    Ok(TrialResult {
        estimate,
        records,
        effective_axes: axes.to_vec(),
    })
}

/// Near-boundary step-1 estimates are clipped to this radius before the
/// step-2 scheme is evaluated, so the radial probability stays positive.
const SCHEME_RADIUS_CLIP: f64 = 1.0 - 1e-9;

/// The mutually-unbiased scheme (rotated-frame probabilities and lab-frame
/// axes) that is optimal for `weighting` at the estimate `pivot`.
fn scheme_at(
    weighting: &WeightingSpec,
    pivot: &BlochState,
) -> Result<([PauliAxis; 3], [f64; 3])> {
    let radius = pivot.norm().min(SCHEME_RADIUS_CLIP);
    match weighting {
        WeightingSpec::IdentityMse => {
            let rotation = rotation_to_z(&pivot.vector());
            let probs = optimal_probabilities_diagonal([1.0, 1.0, 1.0], radius)?;
            Ok((rotation.lab_axes(), probs))
        }
        WeightingSpec::MonotoneMetric { n } => {
            let rotation = rotation_to_z(&pivot.vector());
            let scheme = gm_scheme_metric(radius, *n)?;
            Ok((rotation.lab_axes(), scheme.probabilities))
        }
        WeightingSpec::Explicit { .. } => {
            let clipped = BlochState::along(pivot.vector(), radius)
                .unwrap_or_else(|_| BlochState::maximally_mixed());
            let scheme = gm_scheme_general(weighting, &clipped)?;
            Ok((scheme.axes, scheme.probabilities))
        }
    }
}

/// Two-step adaptive tomography. Step 1 runs standard tomography on N1
/// copies; step 2 measures the rotated mutually unbiased axes with the
/// locally optimal probabilities at the step-1 estimate, and the final MLE
/// uses both steps' statistics (or step 2 only, per the config).
pub fn run_adaptive<R: Rng + ?Sized>(
    true_state: &BlochState,
    config: &StrategyConfig,
    rng: &mut R,
) -> Result<TrialResult> {
    if config.kind != StrategyKind::Adaptive {
        return Err(Error::InvalidConfig {
            reason: format!("run_adaptive called with {:?}", config.kind),
        });
    }
    config.validate()?;

    let step1_axes = [PauliAxis::x(), PauliAxis::y(), PauliAxis::z()];
    let mut step1 = MeasurementRecord::new();
    measure_axes(true_state, &step1_axes, even_split(config.n1), &mut step1, rng);
    let pivot = mle(&step1)?;

    let (axes, probs) = scheme_at(&config.weighting, &pivot)?;
    let n2 = config.n - config.n1;
    let counts = allocate_counts(probs, n2, config.allocation, rng);
    let mut step2 = MeasurementRecord::new();
    measure_axes(true_state, &axes, counts, &mut step2, rng);

    let mut effective_axes = step1_axes.to_vec();
    effective_axes.extend_from_slice(&axes);

    let (records, estimate) = match config.mle_data {
        MleData::BothSteps => {
            let mut all = step1.clone();
            all.extend(&step2);
            let est = mle(&all)?;
            (all, est)
        }
        MleData::Step2Only => {
            // The full record set is still returned so copy accounting holds;
            // only the estimator input is restricted.
            let est = mle(&step2)?;
            let mut all = step1.clone();
            all.extend(&step2);
            (all, est)
        }
    };

    Ok(TrialResult {
        estimate,
        records,
        effective_axes,
    })
}

/// Known-state benchmark: designs the optimal measurement at the true state
/// but still reconstructs from data.
pub fn run_known_state<R: Rng + ?Sized>(
    true_state: &BlochState,
    n: u64,
    weighting: &WeightingSpec,
    rng: &mut R,
) -> Result<TrialResult> {
    run_known_state_with(
        true_state,
        n,
        weighting,
        AllocationPolicy::DeterministicRounding,
        rng,
    )
}

fn run_known_state_with<R: Rng + ?Sized>(
    true_state: &BlochState,
    n: u64,
    weighting: &WeightingSpec,
    policy: AllocationPolicy,
    rng: &mut R,
) -> Result<TrialResult> {
    if n == 0 {
        return Err(Error::InvalidConfig {
            reason: "copy budget N must be positive".into(),
        });
    }
    let (axes, probs) = scheme_at(weighting, true_state)?;
    let counts = allocate_counts(probs, n, policy, rng);
    let mut records = MeasurementRecord::new();
    measure_axes(true_state, &axes, counts, &mut records, rng);
    let estimate = mle(&records)?;
    Ok(TrialResult {
        estimate,
        records,
        effective_axes: axes.to_vec(),
    })
}

/// Runs whichever strategy `config` describes.
pub fn run_trial<R: Rng + ?Sized>(
    true_state: &BlochState,
    config: &StrategyConfig,
    rng: &mut R,
) -> Result<TrialResult> {
    match config.kind {
        StrategyKind::Standard => run_standard(true_state, config.n, rng),
        StrategyKind::Adaptive => run_adaptive(true_state, config, rng),
        StrategyKind::KnownState => run_known_state_with(
            true_state,
            config.n,
            &config.weighting,
            config.allocation,
            rng,
        ),
    }
}
