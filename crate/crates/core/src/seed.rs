//! Deterministic seed derivation for independent RNG streams.
//!
//! Every trial owns a ChaCha stream whose 64-bit seed is derived from the
//! plan's master seed and the trial's indices by a fixed splittable hash.
//! The scheme is pinned here so that reports are reproducible regardless of
//! execution order, thread count, or platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG stream handed to strategies and samplers.
pub type TrialRng = ChaCha8Rng;

/// Weyl increment of the splitmix64 generator.
const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 finalizer (Steele, Lea, Flood 2014 constants).
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hashes (master, parts...) into a stream seed. Each index is absorbed with
/// a distinct Weyl offset so that (a, b) and (b, a) land on different streams.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut h = mix(master ^ GAMMA);
    for (i, &p) in parts.iter().enumerate() {
        h = mix(h ^ p.wrapping_add(GAMMA.wrapping_mul(i as u64 + 1)));
    }
    h
}

/// A fresh stream for one trial of a plan.
pub fn trial_rng(master: u64, s_index: u64, strategy_index: u64, rep: u64) -> TrialRng {
    TrialRng::seed_from_u64(derive_seed(master, &[s_index, strategy_index, rep]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivation_is_stable() {
        // Frozen values: a change here breaks report reproducibility.
        assert_eq!(derive_seed(0, &[]), mix(GAMMA));
        assert_eq!(derive_seed(42, &[1, 2, 3]), derive_seed(42, &[1, 2, 3]));
        assert_ne!(derive_seed(42, &[1, 2, 3]), derive_seed(42, &[3, 2, 1]));
        assert_ne!(derive_seed(42, &[1, 2, 3]), derive_seed(43, &[1, 2, 3]));
        assert_ne!(derive_seed(42, &[0, 0, 0]), derive_seed(42, &[0, 0, 1]));
    }

    #[test]
    fn streams_are_reproducible() {
        use rand::Rng;
        let mut a = trial_rng(7, 1, 2, 3);
        let mut b = trial_rng(7, 1, 2, 3);
        for _ in 0..16 {
            assert_eq!(a.gen::<u64>(), b.gen::<u64>());
        }
    }
}
