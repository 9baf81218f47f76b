//! Enumeration of the middle-thirds Cantor set at finite refinement levels.
//!
//! A level-`k` approximation consists of `2^k` closed intervals of length
//! `3^-k`. Intervals are indexed by the ternary digits of their left
//! endpoint: bit `b` of the index (most significant first) selects digit
//! `2*b`, so index order coincides with increasing endpoint order.

/// Largest level for which endpoint arithmetic stays exact in `u64`
/// (`3^40 < 2^64`; the numerator below never exceeds `3^level`).
pub const MAX_CANTOR_LEVEL: u32 = 40;

/// Left endpoint of the `index`-th level-`level` Cantor interval.
///
/// Computed as an exact integer numerator over `3^level`, so the only
/// rounding is the final division and enumeration order is strictly
/// increasing in `index`.
pub fn cantor_endpoint(level: u32, index: u64) -> f64 {
    assert!(level <= MAX_CANTOR_LEVEL, "cantor level {level} exceeds {MAX_CANTOR_LEVEL}");
    assert!(
        level == 0 && index == 0 || level > 0 && index < (1u64 << level.min(63)),
        "cantor index {index} out of range for level {level}"
    );
    let mut numerator: u64 = 0;
    for bit in (0..level).rev() {
        numerator = numerator * 3 + if (index >> bit) & 1 == 1 { 2 } else { 0 };
    }
    numerator as f64 / 3u64.pow(level) as f64
}

/// All `2^level` left endpoints in increasing order.
pub fn cantor_endpoints(level: u32) -> Vec<f64> {
    let count = 1u64 << level;
    (0..count).map(|i| cantor_endpoint(level, i)).collect()
}

/// Length (Euclidean diameter) of one level-`level` interval, `3^-level`.
pub fn cantor_interval_length(level: u32) -> f64 {
    3f64.powi(level as i32).recip()
}
