//! Stable seed derivation.
//!
//! Seeds derive from (global seed, string key) via FNV-1a and a splitmix64
//! finalizer — stable across platforms, runs, and thread schedules, so any
//! seeded stage reproduces byte-identical output.

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = FNV_OFFSET;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    hash
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Seed for one (global seed, key) pair.
pub fn derive_seed(global_seed: u64, key: &str) -> u64 {
    splitmix64(global_seed ^ fnv1a(key.as_bytes()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_key_sensitive() {
        assert_eq!(derive_seed(7, "q1"), derive_seed(7, "q1"));
        assert_ne!(derive_seed(7, "q1"), derive_seed(7, "q2"));
        assert_ne!(derive_seed(7, "q1"), derive_seed(8, "q1"));
    }

    #[test]
    fn frozen_reference_value() {
        // Guards against accidental algorithm changes that would silently
        // reshuffle every seeded pipeline.
        assert_eq!(derive_seed(0, ""), splitmix64(FNV_OFFSET));
    }
}
