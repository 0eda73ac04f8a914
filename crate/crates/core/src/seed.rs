//! Seed derivation for independent streams.
//!
//! All generators are ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded through
//! `seed_from_u64`; derived seeds come from a SplitMix64 finalizer so that a
//! stream depends only on `(base seed, index, domain)` and never on the
//! order in which streams are created.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Seed domain of training streams.
pub const DOMAIN_TRAIN: u64 = 0;
/// Seed domain of held-out test streams used by the monitor.
pub const DOMAIN_TEST: u64 = 0x7e57_7e57_7e57_7e57;
/// Seed domain of extra randomness in oracle trials (free CPT rows, picks).
pub const DOMAIN_ORACLE: u64 = 0x0c1a_c1e0_0c1a_c1e0;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a base seed with an index (history, trial) into a fresh seed.
pub fn mix(base: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

/// Like [`mix`], but in a separate seed domain.
pub fn mix_domain(base: u64, index: u64, domain: u64) -> u64 {
    mix(mix(base, domain), index)
}

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
