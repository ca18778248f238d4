//! Stable 64-bit hashing for seeded, order-independent sampling and
//! subsampling. Not a general-purpose hasher: outputs must stay identical
//! across platforms, Rust versions and thread counts.

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Combine two hashes; not commutative.
pub(crate) fn mix(a: u64, b: u64) -> u64 {
    splitmix64(a ^ splitmix64(b))
}

/// FNV-1a over length-prefixed string parts, so ("ab","c") != ("a","bc").
pub(crate) fn fnv1a_parts<S: AsRef<str>>(parts: &[S]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for p in parts {
        let bytes = p.as_ref().as_bytes();
        for &b in (bytes.len() as u64).to_le_bytes().iter() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x100000001b3);
        }
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x100000001b3);
        }
    }
    h
}

/// Map a hash to [0, 1).
pub(crate) fn unit_f64(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
