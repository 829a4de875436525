//! Deterministic seed derivation. Stages, restarts, and per-phase streams all
//! draw from one master seed through these mixers so reruns are bit-identical.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive a child seed from a parent seed and a textual label.
pub fn mix_label(seed: u64, label: &str) -> u64 {
    let mut acc = splitmix(seed);
    for &b in label.as_bytes() {
        acc = splitmix(acc ^ u64::from(b));
    }
    acc
}

/// Derive a child seed from a parent seed and an index.
pub fn mix_index(seed: u64, index: u64) -> u64 {
    splitmix(splitmix(seed) ^ index)
}

/// FNV-1a hash of a byte stream; used for artifact and blueprint fingerprints.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}
