//! Index-derived seeding so that parallel and serial generation agree.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th item of `stream` under `base`.
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    mix(mix(mix(base) ^ stream) ^ index)
}

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub(crate) mod streams {
    pub const SAMPLE: u64 = 1;
    pub const MISSING: u64 = 2;
    pub const SPLIT: u64 = 3;
    pub const FOLDS: u64 = 4;
    pub const REPLICATE: u64 = 5;
}
