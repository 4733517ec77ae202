//! Deterministic seed derivation shared by the certifier and the sweep harness.
//!
//! The mixer is splitmix64: add `0x9E3779B97F4A7C15`, then
//! `z = (z ^ z >> 30) * 0xBF58476D1CE4E5B9`, `z = (z ^ z >> 27) * 0x94D049BB133111EB`,
//! `z ^ z >> 31`.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index` under `master`; independent of how many other streams exist.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index))
}

/// Uniform draw in `[0, 1)` from the 53 high bits of a mixed counter.
pub fn unit_uniform(master: u64, index: u64) -> f64 {
    (derive_seed(master, index) >> 11) as f64 / (1u64 << 53) as f64
}
