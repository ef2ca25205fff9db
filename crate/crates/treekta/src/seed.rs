//! Seed derivation for independent RNG streams.
//!
//! Per-tree and per-replicate generators are seeded by hashing
//! (master seed, stream index) so that results do not depend on how work is
//! scheduled across threads.

/// splitmix64 finalizer over the pair (master, index).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
