//! Keyed deterministic randomness.
//!
//! Every random decision in the generators and experiments is a pure
//! function of a user seed plus context words (salt, timestep, vertex pair,
//! trial index, ...). Runs are bit-reproducible for a fixed seed regardless
//! of iteration order or worker count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// One round of the splitmix64 output function.
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a seed with context words into one well-scrambled word.
pub fn mix(seed: u64, words: &[u64]) -> u64 {
    let mut h = splitmix(seed);
    for &w in words {
        h = splitmix(h ^ w);
    }
    splitmix(h)
}

/// Uniform draw in `[0, 1)` keyed by `(seed, words)`.
pub fn uniform(seed: u64, words: &[u64]) -> f64 {
    (mix(seed, words) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A keyed sub-generator for decisions that need more than one draw
/// (shuffles, sampling without replacement).
pub fn stream(seed: u64, words: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(seed, words))
}
