//! Seedable, platform-stable randomness.
//!
//! Every stochastic routine in the crate takes an explicit `u64` seed and
//! draws from a ChaCha8 stream, so identical inputs give identical outputs on
//! every platform and at every worker-pool size. Independent sub-streams (one
//! per trial, one per Monte Carlo repetition, ...) are derived with
//! [`derive_seed`]: `sub_seed = mix(master_seed, index)` through the
//! SplitMix64 finalizer, so parallel trials reproduce serial runs exactly.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type SeedRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeedRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for sub-stream `index` of `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
