//! Seed derivation for reproducible, independent replication streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// RNG used throughout the simulation. ChaCha output is stable across
/// platforms and crate versions, which the determinism guarantees rely on.
pub type SimRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seed for replication `index` under `master`. Depends only on the pair, so
/// the first `n` replications are identical whatever the total count.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
