//! Deterministic derivation of independent sub-seeds.

/// SplitMix64 finaliser.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `index` with purpose `role` under a master seed.
pub fn mix(seed: u64, index: u64, role: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ index) ^ role.rotate_left(32))
}
