//! Deterministic seed derivation.
//!
//! Every replication, group and simulation run gets its own seed derived
//! from the master seed and a path of identifiers, so results do not depend
//! on execution order or thread count.

/// SplitMix64 finalizer.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed of `parent` for identifier `id`.
#[inline]
pub fn derive(parent: u64, id: u64) -> u64 {
    mix(parent ^ mix(id.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

pub fn derive_path(parent: u64, ids: &[u64]) -> u64 {
    ids.iter().fold(parent, |s, &id| derive(s, id))
}

/// Stable 64-bit FNV-1a hash for string identifiers such as scenario ids.
pub fn hash_str(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}
