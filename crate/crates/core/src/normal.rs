//! Standard normal distribution helpers.
//!
//! Everything is routed through `erfc` so that both tails keep full relative
//! precision. Interval masses whose endpoints sit in the right tail are taken
//! as a difference of survival functions rather than of CDFs.

use std::f64::consts::FRAC_1_SQRT_2;

/// Standard normal cumulative distribution function `N(x)`.
pub fn cdf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
    } else {
        1.0 - 0.5 * libm::erfc(x * FRAC_1_SQRT_2)
    }
}

/// Upper tail `1 - N(x)`.
pub fn sf(x: f64) -> f64 {
    cdf(-x)
}

/// `P(lo < Z < hi)` for a standard normal `Z`. Infinite endpoints are fine.
pub fn interval(lo: f64, hi: f64) -> f64 {
    if !(lo < hi) {
        return 0.0;
    }
    let p = if lo >= 0.0 {
        sf(lo) - sf(hi)
    } else if hi <= 0.0 {
        cdf(hi) - cdf(lo)
    } else {
        1.0 - (cdf(lo) + sf(hi))
    };
    p.max(0.0)
}

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}
