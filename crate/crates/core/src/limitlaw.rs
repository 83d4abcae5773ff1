//! The limiting joint law of the four extremes under random observation.
//!
//! With limiting max law G, limiting min-side survival H-bar, and observed
//! fraction P, the joint limit over a threshold quadruple (x2, y2, x1, y1)
//! is
//!
//! ```text
//! E[ G(x2)^P H-bar(y2)^P G(x1)^(1-P) H-bar(y1)^(1-P) ]
//! ```
//!
//! evaluated here through tail exponents: writing g = -ln G and h = -ln
//! H-bar, the integrand is exp(-(P t2 + (1-P) t1)) with t2 = g(x2) + h(y2)
//! and t1 = g(x1) + h(y1). A weight of zero shuts its factor off even when
//! the paired exponent is infinite, so point masses at P = 0 or P = 1 and
//! degenerate levels reproduce the one-sided laws exactly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::missing::PDistribution;

/// Monotone piecewise-linear interpolation of tail exponent samples
/// (level, -ln of the tail function), clamped to the end values outside the
/// sampled range.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailTable {
    points: Vec<(f64, f64)>,
}

impl TailTable {
    /// Levels must be finite and strictly increasing; exponents must be
    /// nonnegative, finite, and monotone in one direction.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter(
                "a tail table needs at least two points".into(),
            ));
        }
        for w in points.windows(2) {
            if !(w[0].0 < w[1].0) || !w[1].0.is_finite() || !w[0].0.is_finite() {
                return Err(Error::InvalidParameter(
                    "tail table levels must be finite and strictly increasing".into(),
                ));
            }
        }
        if points.iter().any(|&(_, t)| !(t >= 0.0) || !t.is_finite()) {
            return Err(Error::InvalidParameter(
                "tail table exponents must be finite and nonnegative".into(),
            ));
        }
        let nonincreasing = points.windows(2).all(|w| w[1].1 <= w[0].1);
        let nondecreasing = points.windows(2).all(|w| w[1].1 >= w[0].1);
        if !nonincreasing && !nondecreasing {
            return Err(Error::InvalidParameter(
                "tail table exponents must be monotone".into(),
            ));
        }
        Ok(Self { points })
    }

    fn eval(&self, x: f64) -> f64 {
        let first = self.points[0];
        let last = *self.points.last().unwrap();
        if x <= first.0 {
            return first.1;
        }
        if x >= last.0 {
            return last.1;
        }
        let idx = self.points.partition_point(|&(level, _)| level <= x);
        let (x0, t0) = self.points[idx - 1];
        let (x1, t1) = self.points[idx];
        t0 + (t1 - t0) * (x - x0) / (x1 - x0)
    }
}

/// A limiting tail in exponent form: tail(x) = -ln of the distribution
/// function (max side) or survival function (min side).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TailFunction {
    /// exp(-x): the Gumbel law exp(-exp(-x)) on both sides.
    Gumbel,
    Table(TailTable),
}

impl TailFunction {
    /// -ln of the limiting function at level x.
    pub fn tail(&self, x: f64) -> f64 {
        match self {
            Self::Gumbel => (-x).exp(),
            Self::Table(t) => t.eval(x),
        }
    }
}

/// The pair (G, H-bar) in tail-exponent form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitSpec {
    pub g: TailFunction,
    pub h: TailFunction,
}

impl LimitSpec {
    /// Gumbel on both sides; the limit for Gaussian sequences under the
    /// symmetric convention.
    pub fn gumbel() -> Self {
        Self {
            g: TailFunction::Gumbel,
            h: TailFunction::Gumbel,
        }
    }

    pub fn custom(g: TailFunction, h: TailFunction) -> Self {
        Self { g, h }
    }
}

/// Levels (x2, y2, x1, y1): the 2-indexed pair applies to the observed
/// subsample and weights the observed fraction P, the 1-indexed pair to the
/// rest of the sample with the complementary weight. Finite levels must
/// satisfy x2 <= x1 and y2 >= y1 (the 2-box is the deeper constraint);
/// infinite levels are exempt, as they encode the one-sided and degenerate
/// special cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdQuad {
    pub x2: f64,
    pub y2: f64,
    pub x1: f64,
    pub y1: f64,
}

impl ThresholdQuad {
    pub fn new(x2: f64, y2: f64, x1: f64, y1: f64) -> Result<Self> {
        if x2.is_nan() || y2.is_nan() || x1.is_nan() || y1.is_nan() {
            return Err(Error::InvalidQuad(format!(
                "levels must not be NaN, got ({x2}, {y2}, {x1}, {y1})"
            )));
        }
        if x2.is_finite() && x1.is_finite() && x2 > x1 {
            return Err(Error::InvalidQuad(format!(
                "finite max levels must satisfy x2 <= x1, got x2 = {x2}, x1 = {x1}"
            )));
        }
        if y2.is_finite() && y1.is_finite() && y2 < y1 {
            return Err(Error::InvalidQuad(format!(
                "finite min levels must satisfy y2 >= y1, got y2 = {y2}, y1 = {y1}"
            )));
        }
        Ok(Self { x2, y2, x1, y1 })
    }
}

/// exp(-(p t2 + (1-p) t1)) with the convention that a zero weight
/// annihilates its exponent.
pub(crate) fn weighted_term(p: f64, t2: f64, t1: f64) -> f64 {
    let first = if p == 0.0 { 0.0 } else { p * t2 };
    let second = if p == 1.0 { 0.0 } else { (1.0 - p) * t1 };
    (-(first + second)).exp()
}

/// E[exp(-(P t2 + (1-P) t1))] under the given fraction law.
pub fn expectation_over_p(pd: &PDistribution, t2: f64, t1: f64) -> f64 {
    pd.expect(|p| weighted_term(p, t2, t1))
}

/// The joint limit at a quadruple of levels.
pub fn joint_limit(spec: &LimitSpec, q: &ThresholdQuad, pd: &PDistribution) -> Result<f64> {
    let t2 = spec.g.tail(q.x2) + spec.h.tail(q.y2);
    let t1 = spec.g.tail(q.x1) + spec.h.tail(q.y1);
    Ok(expectation_over_p(pd, t2, t1))
}

/// Marginal law of the max pair: E[G(x2)^P G(x1)^(1-P)].
pub fn max_only_limit(spec: &LimitSpec, x2: f64, x1: f64, pd: &PDistribution) -> Result<f64> {
    if x2.is_nan() || x1.is_nan() {
        return Err(Error::InvalidQuad("levels must not be NaN".into()));
    }
    if x2.is_finite() && x1.is_finite() && x2 > x1 {
        return Err(Error::InvalidQuad(format!(
            "finite max levels must satisfy x2 <= x1, got x2 = {x2}, x1 = {x1}"
        )));
    }
    Ok(expectation_over_p(pd, spec.g.tail(x2), spec.g.tail(x1)))
}

/// Marginal law of the min pair: E[H-bar(y2)^P H-bar(y1)^(1-P)].
pub fn min_only_limit(spec: &LimitSpec, y2: f64, y1: f64, pd: &PDistribution) -> Result<f64> {
    if y2.is_nan() || y1.is_nan() {
        return Err(Error::InvalidQuad("levels must not be NaN".into()));
    }
    if y2.is_finite() && y1.is_finite() && y2 < y1 {
        return Err(Error::InvalidQuad(format!(
            "finite min levels must satisfy y2 >= y1, got y2 = {y2}, y1 = {y1}"
        )));
    }
    Ok(expectation_over_p(pd, spec.h.tail(y2), spec.h.tail(y1)))
}

/// Law of one observed-sample pair: E[(G(x) H-bar(y))^P].
pub fn single_threshold_limit(spec: &LimitSpec, x: f64, y: f64, pd: &PDistribution) -> Result<f64> {
    if x.is_nan() || y.is_nan() {
        return Err(Error::InvalidQuad("levels must not be NaN".into()));
    }
    Ok(expectation_over_p(pd, spec.g.tail(x) + spec.h.tail(y), 0.0))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FactorizationReport {
    pub joint: f64,
    pub product: f64,
    pub difference: f64,
}

/// Under a degenerate fraction P = p the joint limit factorizes into the
/// max-pair law times the min-pair law; the report carries the residual,
/// which should sit at rounding level.
pub fn factorization_check(spec: &LimitSpec, q: &ThresholdQuad, p: f64) -> Result<FactorizationReport> {
    let pd = PDistribution::point_mass(p)?;
    let joint = joint_limit(spec, q, &pd)?;
    let product = max_only_limit(spec, q.x2, q.x1, &pd)? * min_only_limit(spec, q.y2, q.y1, &pd)?;
    Ok(FactorizationReport {
        joint,
        product,
        difference: joint - product,
    })
}
