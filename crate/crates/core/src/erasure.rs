//! Random link erasures with counter-based, order-independent sampling.
//!
//! Each link flips an independent coin: with probability `e` the link is
//! erased (inactive). The coin for link `i` is a pure function of
//! `(seed, i)` — a SplitMix64 stream evaluated at position `i` — so masks
//! are reproducible bit-for-bit regardless of evaluation order, thread
//! count, or mask length (a shorter mask is a prefix of a longer one drawn
//! with the same seed).

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer; a bijection on `u64`, so distinct inputs always
/// produce distinct outputs.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform deviate in [0, 1) for stream position `i` of the given seed.
fn uniform01(seed: u64, i: u64) -> f64 {
    let z = mix64(seed.wrapping_add((i.wrapping_add(1)).wrapping_mul(GOLDEN)));
    (z >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Which links survived an erasure draw, together with the parameters that
/// produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct ErasureMask {
    active: Vec<bool>,
    e: f64,
    seed: u64,
}

impl ErasureMask {
    /// Wraps an explicit activity pattern (mainly for tests and oracles).
    pub fn from_active(active: Vec<bool>, e: f64, seed: u64) -> Self {
        assert!((0.0..=1.0).contains(&e), "erasure probability {e} not in [0, 1]");
        ErasureMask { active, e, seed }
    }

    /// Per-link activity flags, `true` for links that remain active.
    pub fn active(&self) -> &[bool] {
        &self.active
    }

    /// Erasure probability this mask was drawn with.
    pub fn e(&self) -> f64 {
        self.e
    }

    /// Seed this mask was drawn with.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    /// Number of active links.
    pub fn active_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Compact text form, `'1'` for active and `'0'` for erased, in link
    /// order.
    pub fn to_bitstring(&self) -> String {
        self.active.iter().map(|&a| if a { '1' } else { '0' }).collect()
    }
}

/// Draws an erasure mask over `n` links with per-link erasure probability
/// `e`, deterministically from `seed`.
pub fn sample_mask(n: usize, e: f64, seed: u64) -> ErasureMask {
    assert!((0.0..=1.0).contains(&e), "erasure probability {e} not in [0, 1]");
    let active = (0..n as u64).map(|i| uniform01(seed, i) >= e).collect();
    ErasureMask { active, e, seed }
}

/// Indices of the active links, in increasing order.
pub fn active_indices(mask: &ErasureMask) -> Vec<usize> {
    mask.active()
        .iter()
        .enumerate()
        .filter_map(|(i, &a)| a.then_some(i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = sample_mask(1000, 0.4, 42);
        let b = sample_mask(1000, 0.4, 42);
        assert_eq!(a, b);
        let c = sample_mask(1000, 0.4, 43);
        assert_ne!(a.active(), c.active());
        assert_eq!(a.e(), 0.4);
        assert_eq!(a.seed(), 42);
    }

    #[test]
    fn extreme_probabilities() {
        let all = sample_mask(100, 0.0, 7);
        assert_eq!(all.active_count(), 100);
        let none = sample_mask(100, 1.0, 7);
        assert_eq!(none.active_count(), 0);
    }

    #[test]
    fn active_fraction_concentrates() {
        // One million draws at e = 0.3: the active fraction sits within
        // 0.002 of 0.7 (about 4.4 standard deviations).
        let mask = sample_mask(1_000_000, 0.3, 20260815);
        let frac = mask.active_count() as f64 / 1e6;
        assert!((frac - 0.7).abs() < 0.002, "active fraction {frac}");
    }

    #[test]
    fn neighboring_draws_are_uncorrelated() {
        // Product moment of adjacent indicators matches independence to
        // sampling accuracy.
        let mask = sample_mask(1_000_000, 0.3, 99);
        let a = mask.active();
        let pairs = a.windows(2).filter(|w| w[0] && w[1]).count();
        let rate = pairs as f64 / (a.len() - 1) as f64;
        assert!((rate - 0.49).abs() < 0.003, "pair rate {rate}");
    }

    #[test]
    fn bitstring_roundtrip() {
        let mask = ErasureMask::from_active(vec![true, false, true], 0.5, 1);
        assert_eq!(mask.to_bitstring(), "101");
        assert_eq!(active_indices(&mask), vec![0, 2]);
    }

    #[test]
    fn mix64_is_injective_on_sample() {
        let mut seen: Vec<u64> = (0..10_000u64).map(mix64).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 10_000);
    }

    proptest! {
        #[test]
        fn prefix_stability(
            n1 in 0usize..300,
            extra in 0usize..300,
            e in 0.0f64..=1.0,
            seed in any::<u64>(),
        ) {
            // Drawing a longer mask never changes the leading entries.
            let short = sample_mask(n1, e, seed);
            let long = sample_mask(n1 + extra, e, seed);
            prop_assert_eq!(short.active(), &long.active()[..n1]);
        }

        #[test]
        fn counts_are_consistent(
            n in 0usize..500,
            e in 0.0f64..=1.0,
            seed in any::<u64>(),
        ) {
            let mask = sample_mask(n, e, seed);
            prop_assert_eq!(mask.len(), n);
            prop_assert_eq!(active_indices(&mask).len(), mask.active_count());
            prop_assert_eq!(mask.to_bitstring().len(), n);
        }
    }
}
