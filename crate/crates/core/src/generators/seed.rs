//! Per-path seed schedule.

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 finalizer. A bijection on `u64`.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for path `path_index` of an experiment driven by `master_seed`.
///
/// Injective in `path_index` for a fixed master seed: every step
/// (odd multiplication, xor with a constant, [`mix64`]) is a bijection.
pub fn derive_path_seed(master_seed: u64, path_index: u64) -> u64 {
    let stream = path_index
        .wrapping_mul(GOLDEN_GAMMA)
        .wrapping_add(GOLDEN_GAMMA);
    mix64(mix64(master_seed) ^ stream)
}
