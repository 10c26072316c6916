//! Deterministic seed splitting.
//!
//! Every random stream in the simulator (per-cell C2C draws, per-device D2D
//! samples, per-trial Monte Carlo streams) is derived from one base seed and a
//! path of stream indices, so results do not depend on scheduling order.

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    path.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

// Stream tags keep unrelated consumers of the same base seed apart.
pub(crate) const STREAM_D2D: u64 = 0xD2D;
pub(crate) const STREAM_C2C: u64 = 0xC2C;
pub(crate) const STREAM_TRIAL: u64 = 0x7A1;
pub(crate) const STREAM_WORKLOAD: u64 = 0x30B;
