//! Deterministic seed streams.
//!
//! Every trial draws from its own generator seeded by `derive(base, trial)`, so results do
//! not depend on how trials are spread over workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Environment variable holding the default base seed.
pub const SEED_ENV: &str = "ENVYBENCH_SEED";
pub const DEFAULT_SEED: u64 = 0x5eed_2009;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for stream `stream` of `base`.
pub fn derive(base: u64, stream: u64) -> u64 {
    splitmix(splitmix(base) ^ splitmix(stream.wrapping_add(0x632b_e59b_d9b4_e019)))
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn trial_rng(base: u64, trial: u64) -> Rng {
    rng(derive(base, trial))
}

/// Base seed from `ENVYBENCH_SEED`, or the built-in default.
pub fn default_seed() -> u64 {
    std::env::var(SEED_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_SEED)
}
