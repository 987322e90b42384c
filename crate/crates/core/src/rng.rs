//! Seed splitting.
//!
//! Every random quantity in the crate is drawn from a ChaCha8 stream whose
//! seed is derived from a base seed and a path of stream indices, e.g.
//! `(replicate, ROW_STREAM, row)`. Derivation folds each index into the state
//! with one SplitMix64 step, so the stream of a task depends only on its path
//! and never on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tag for the directing-measure draw of a replicate.
pub const DIRECTING_STREAM: u64 = 0x5049_5245_4354_0001;
/// Stream tag for the array rows of a replicate.
pub const ROW_STREAM: u64 = 0x524f_5753_0000_0002;
/// Stream tag for blocks of a bulk sample.
pub const BLOCK_STREAM: u64 = 0x424c_4f43_4b00_0003;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from `base` and a path of indices.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(base), |acc, &idx| {
        splitmix64(acc ^ splitmix64(idx))
    })
}

pub fn stream(base: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, path))
}
