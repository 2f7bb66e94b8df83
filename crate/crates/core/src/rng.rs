//! Deterministic, counter-addressable randomness.
//!
//! Every stochastic component of the pipeline draws from a ChaCha stream
//! cipher keyed by an explicit 64-bit seed. Per-symbol randomness uses the
//! cipher's 64-bit stream counter, so symbol `i` of a coded stream can be
//! regenerated in isolation — encoder and decoder never share mutable state,
//! and arbitrary symbol ranges can be produced in parallel.
//!
//! Uniform draws are always computed in `f64` and converted to the target
//! scalar afterwards, so the sampled graph structure is identical for every
//! scalar type at a fixed seed.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A seeded, replayable random stream.
pub type Stream = ChaCha8Rng;

/// Root stream for a seed (counter 0).
pub fn root(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream addressing counter `index` under `seed`.
///
/// Streams with distinct `(seed, index)` pairs are statistically
/// independent, and the same pair always yields the same draws.
pub fn at(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Derive an unrelated sub-seed from `(seed, tag)` by SplitMix64 mixing.
///
/// Used to fan one session seed out into schedule, noise, and trial seeds
/// without correlating the streams.
pub fn derive(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform draw in the open interval (0, 1); safe as a `ln` argument.
pub fn uniform_open(rng: &mut impl RngCore) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

/// Standard Gumbel(0, 1) draw.
pub fn gumbel(rng: &mut impl RngCore) -> f64 {
    -(-uniform_open(rng).ln()).ln()
}
