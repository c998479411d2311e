//! Fixed splitmix64 generator.
//!
//! Noise profiles must be reproducible bit-for-bit from a 64-bit seed, in any
//! implementation language, so the generator is pinned to splitmix64 rather
//! than left to a library default.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// splitmix64 stream. Each call to [`SplitMix64::next_u64`] advances the
/// state by the golden-ratio increment and returns the mixed value.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix(self.state)
    }

    /// Uniform draw in [0, 1): the raw 64-bit output divided by 2^64.
    pub fn next_uniform(&mut self) -> f64 {
        self.next_u64() as f64 / 18_446_744_073_709_551_616.0
    }
}

fn mix(state: u64) -> u64 {
    let mut z = state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `index`-th uniform of the stream seeded with `seed`, without iterating.
///
/// The state after k draws is `seed + k*GAMMA` (wrapping), so any single draw
/// is available in O(1). Agrees with sequential iteration exactly.
pub fn uniform_at(seed: u64, index: u64) -> f64 {
    let state = seed.wrapping_add(GAMMA.wrapping_mul(index.wrapping_add(1)));
    mix(state) as f64 / 18_446_744_073_709_551_616.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_zero_first_output_matches_reference() {
        // Reference value of the splitmix64 mix function for state GAMMA.
        let mut rng = SplitMix64::new(0);
        assert_eq!(rng.next_u64(), 0xE220_A839_7B1D_CDAF);
        let mut rng = SplitMix64::new(0);
        let u = rng.next_uniform();
        assert!((u - 0.8833108082136427).abs() < 1e-15);
    }

    #[test]
    fn outputs_lie_in_unit_interval() {
        let mut rng = SplitMix64::new(12345);
        for _ in 0..10_000 {
            let u = rng.next_uniform();
            assert!((0.0..1.0).contains(&u));
        }
    }

    #[test]
    fn adjacent_seeds_differ_in_first_draw() {
        for seed in [0u64, 1, 42, u64::MAX - 1] {
            let a = SplitMix64::new(seed).next_u64();
            let b = SplitMix64::new(seed.wrapping_add(1)).next_u64();
            assert_ne!(a, b);
        }
    }

    #[test]
    fn random_access_matches_sequential() {
        let seed = 0xDEAD_BEEF;
        let mut rng = SplitMix64::new(seed);
        for i in 0..100 {
            let sequential = rng.next_uniform();
            assert_eq!(sequential, uniform_at(seed, i));
        }
    }
}
