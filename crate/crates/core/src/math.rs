//! Scalar math routed through `libm` so the core stays `no_std` and the
//! transcendental functions are bit-identical across platforms.

pub use libm::{acos, cbrt, ceil, cos, exp, fabs, floor, log as ln, pow, round, sin, sqrt};

/// Saturating Hill fraction x^q / (θ^q + x^q) for x ≥ 0, θ > 0, q > 0.
///
/// Evaluated as 1 / (1 + e^{−q·ln(x/θ)}), which stays finite for the
/// step-like steepness q = 30 where a naive x^q overflows at large x.
/// The x = 0 limit is handled explicitly (x^q → 0 for q > 0), avoiding
/// the 0⁰ ambiguity.
#[inline]
pub fn hill_up(x: f64, theta: f64, q: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if q == 1.0 {
        return x / (theta + x);
    }
    1.0 / (1.0 + exp(-q * ln(x / theta)))
}

/// Relative difference |a − b| / max(|a|, |b|, floor).
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = fabs(a).max(fabs(b)).max(f64::MIN_POSITIVE);
    fabs(a - b) / scale
}
