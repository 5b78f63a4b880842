//! Deterministic derivation of child seeds from a master seed.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for stream `tag`, item `index`, under `master`.
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    // FNV-1a over the tag keeps distinct streams apart.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in tag.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3);
    }
    let a = mix64(master.wrapping_add(GOLDEN));
    let b = mix64(a ^ h.wrapping_add(GOLDEN.wrapping_mul(2)));
    mix64(b ^ index.wrapping_mul(GOLDEN).wrapping_add(GOLDEN))
}
