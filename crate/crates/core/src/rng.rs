//! Seed derivation and generator construction.
//!
//! Every random stream in a campaign is a ChaCha8 generator keyed by a seed
//! derived from the campaign seed with [`derive_seed`], so results are
//! reproducible bit-for-bit across machines and independent of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-based child seed: the `(counter + 1)`-th output of the SplitMix64
/// sequence started at `seed`.
pub fn derive_seed(seed: u64, counter: u64) -> u64 {
    mix64(seed.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Seed of run `index` in a repeated campaign.
pub fn run_seed(base_seed: u64, index: usize) -> u64 {
    derive_seed(base_seed, index as u64)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
