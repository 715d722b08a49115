//! Seed derivation. Every random stream in the toolkit is a ChaCha8 stream
//! keyed by a user seed mixed with fixed stream tags, so independent stages
//! (per-class shuffles, per-class augmentation, folds) never share state.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream tags. Values are part of the reproducibility contract.
pub mod tag {
    pub const SPLIT: u64 = 0x5350_4c49;
    pub const DOWNSAMPLE: u64 = 0x4453_414d;
    pub const AUGMENT: u64 = 0x4145_4441;
    pub const FOLDS: u64 = 0x464f_4c44;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts
        .iter()
        .fold(splitmix64(seed), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn stream(seed: u64, parts: &[u64]) -> StreamRng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, parts))
}
