//! Seed derivation for reproducible substreams.
//!
//! Every random draw is made from a generator keyed by a chain of indices
//! (base seed, scenario, replication, subject), so results never depend on
//! iteration order or thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a sequence of indices.
pub fn derive_seed(parent: u64, keys: &[u64]) -> u64 {
    keys.iter()
        .fold(mix64(parent), |acc, &k| mix64(acc ^ mix64(k.wrapping_add(0x51_7C_C1_B7))))
}

pub fn substream(parent: u64, keys: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(parent, keys))
}
