//! Counter-based random stream used everywhere randomness is needed.
//!
//! The generator is the SplitMix64 finalizer applied to
//! `seed + counter * 0x9E3779B97F4A7C15` (wrapping arithmetic):
//!
//! ```text
//! x  = seed + counter * 0x9E3779B97F4A7C15
//! x ^= x >> 30;  x *= 0xBF58476D1CE4E5B9
//! x ^= x >> 27;  x *= 0x94D049BB133111EB
//! x ^= x >> 31
//! ```
//!
//! Being a pure function of (seed, counter) it is order-independent, trivially
//! parallel, and easy to reproduce in any language.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The raw 64-bit stream value at `counter`.
pub fn split_mix(seed: u64, counter: u64) -> u64 {
    let mut x = seed.wrapping_add(counter.wrapping_mul(GAMMA));
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Uniform f64 in [0, 1) from the top 53 bits.
pub fn unit_f64(seed: u64, counter: u64) -> f64 {
    (split_mix(seed, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform f64 in [lo, hi).
pub fn range_f64(seed: u64, counter: u64, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit_f64(seed, counter)
}

/// Uniform i64 in [lo, hi] (inclusive).
pub fn range_i64(seed: u64, counter: u64, lo: i64, hi: i64) -> i64 {
    let span = (hi - lo + 1) as u64;
    lo + (split_mix(seed, counter) % span) as i64
}

/// Complex value uniform on the closed unit disk, using two counters.
pub fn unit_disk(seed: u64, counter: u64) -> num_complex::Complex64 {
    let r = unit_f64(seed, counter).sqrt();
    let phi = 2.0 * std::f64::consts::PI * unit_f64(seed, counter.wrapping_add(1));
    num_complex::Complex64::from_polar(r, phi)
}
