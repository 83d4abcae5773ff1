//! Standard normal density, distribution function, and upper tail.
//!
//! `cdf_upper` keeps full relative precision far in the right tail where
//! `1.0 - cdf(x)` would cancel; interval probabilities route through the
//! better-conditioned tail on each side.

use libm::erfc;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Density of N(0, 1).
pub fn pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() * INV_SQRT_2PI
}

/// P(Z <= x).
pub fn cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// P(Z > x); accurate for large positive x.
pub fn cdf_upper(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

/// P(lo < Z <= hi) for extended-real bounds, assuming lo <= hi.
pub fn interval_prob(lo: f64, hi: f64) -> f64 {
    if lo >= hi {
        return 0.0;
    }
    if lo >= 0.0 {
        (cdf_upper(lo) - cdf_upper(hi)).max(0.0)
    } else if hi <= 0.0 {
        (cdf_upper(-hi) - cdf_upper(-lo)).max(0.0)
    } else {
        (1.0 - cdf_upper(hi) - cdf_upper(-lo)).max(0.0)
    }
}
