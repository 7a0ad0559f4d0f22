//! Deterministic seed derivation.
//!
//! Restarts, CV folds, and grid-search cells each run on their own RNG whose
//! seed is a pure function of the master seed and the unit's indices. Units
//! can therefore run concurrently while producing results bit-identical to
//! sequential execution.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// splitmix64 finalizer; decorrelates consecutive seeds.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a master seed and a tag path.
///
/// Tags identify the consumer, e.g. `&[RESTART, i]` for the i-th EM restart.
pub fn derive_seed(master: u64, tags: &[u64]) -> u64 {
    let mut state = mix(master);
    for &tag in tags {
        state = mix(state ^ tag);
    }
    state
}

/// RNG used throughout the crate: deterministic, seedable, fast.
pub fn rng_from(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
