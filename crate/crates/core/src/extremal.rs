//! Norming constants and per-replicate extremal statistics.
//!
//! For sample size n the affine maps u_n(x) = a x + b and v_n(y) turn limit
//! levels into raw thresholds. The Gaussian sequence uses
//!
//! ```text
//! a = c = 1 / sqrt(2 ln n)
//! b = d = sqrt(2 ln n) - (ln ln n + ln 4 pi) / (2 sqrt(2 ln n))
//! ```
//!
//! with the symmetric convention v_n(y) = -c y - d, under which the minimum
//! behaves like the negated maximum and both normalized statistics share the
//! Gumbel limit exp(-exp(-x)).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::genpath::SamplePath;
use crate::missing::IndicatorDraw;

/// How min-side thresholds are formed from the constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// v_n(y) = c y + d; larger y means a higher floor.
    GeneralLinear,
    /// v_n(y) = -c y - d with a = c and b = d; larger y means a lower floor,
    /// mirroring the maximum of the negated sequence.
    GaussianSymmetric,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NormingConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub n: u64,
    pub convention: Convention,
}

impl NormingConstants {
    pub fn new(a: f64, b: f64, c: f64, d: f64, n: u64, convention: Convention) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() || !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "norming scales must be positive and finite, got a = {a}, c = {c}"
            )));
        }
        if !b.is_finite() || !d.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "norming centers must be finite, got b = {b}, d = {d}"
            )));
        }
        if n == 0 {
            return Err(Error::InvalidParameter("norming requires n >= 1".into()));
        }
        if convention == Convention::GaussianSymmetric && (a != c || b != d) {
            return Err(Error::InvalidParameter(format!(
                "the symmetric convention requires a = c and b = d, got a = {a}, c = {c}, b = {b}, d = {d}"
            )));
        }
        Ok(Self {
            a,
            b,
            c,
            d,
            n,
            convention,
        })
    }

    /// Raw threshold for the maximum: u_n(x) = a x + b.
    pub fn u_threshold(&self, x: f64) -> f64 {
        self.a * x + self.b
    }

    /// Raw threshold for the minimum, per the convention.
    pub fn v_threshold(&self, y: f64) -> f64 {
        match self.convention {
            Convention::GeneralLinear => self.c * y + self.d,
            Convention::GaussianSymmetric => -self.c * y - self.d,
        }
    }

    /// Normalized maximum statistic (M - b) / a.
    pub fn normalize_max(&self, m: f64) -> f64 {
        (m - self.b) / self.a
    }

    /// Normalized minimum statistic; chosen so that under either convention
    /// P(normalized min <= y) has the same limit as P(v_n(y) < min).
    pub fn normalize_min(&self, m: f64) -> f64 {
        match self.convention {
            Convention::GeneralLinear => (m - self.d) / self.c,
            Convention::GaussianSymmetric => (-m - self.d) / self.c,
        }
    }
}

/// Gaussian norming sequence for sample size n. Requires n >= 3 so that
/// ln ln n is positive.
pub fn gaussian_norming(n: u64) -> Result<NormingConstants> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!(
            "gaussian norming requires n >= 3, got {n}"
        )));
    }
    let ln_n = (n as f64).ln();
    let root = (2.0 * ln_n).sqrt();
    let a = 1.0 / root;
    let b = root - (ln_n.ln() + (4.0 * std::f64::consts::PI).ln()) / (2.0 * root);
    NormingConstants::new(a, b, a, b, n, Convention::GaussianSymmetric)
}

/// The four extremes of one replicate plus bookkeeping.
///
/// With no observed entries the observed maximum is -inf and the observed
/// minimum +inf, so any interval event on the observed sample holds
/// vacuously.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExtremalQuadruple {
    /// Maximum over observed entries; -inf when nothing is observed.
    pub max_obs: f64,
    /// Minimum over observed entries; +inf when nothing is observed.
    pub min_obs: f64,
    /// Maximum over the complete sample.
    pub max_all: f64,
    /// Minimum over the complete sample.
    pub min_all: f64,
    /// Number of observed entries.
    pub s_n: u64,
    /// Normalized (max_obs, min_obs, max_all, min_all).
    pub normalized: [f64; 4],
}

/// Scans one replicate. The path and indicator lengths must match the
/// norming's n.
pub fn compute_quadruple(
    path: &SamplePath,
    draw: &IndicatorDraw,
    nc: &NormingConstants,
) -> Result<ExtremalQuadruple> {
    let values = path.values();
    if values.len() != draw.indicators.len() {
        return Err(Error::LengthMismatch {
            path_len: values.len(),
            indicator_len: draw.indicators.len(),
        });
    }
    if values.len() as u64 != nc.n {
        return Err(Error::InvalidParameter(format!(
            "norming constants are for n = {}, path has {} values",
            nc.n,
            values.len()
        )));
    }
    let mut max_all = f64::NEG_INFINITY;
    let mut min_all = f64::INFINITY;
    let mut max_obs = f64::NEG_INFINITY;
    let mut min_obs = f64::INFINITY;
    let mut s_n = 0u64;
    for (&x, &obs) in values.iter().zip(&draw.indicators) {
        if x > max_all {
            max_all = x;
        }
        if x < min_all {
            min_all = x;
        }
        if obs {
            s_n += 1;
            if x > max_obs {
                max_obs = x;
            }
            if x < min_obs {
                min_obs = x;
            }
        }
    }
    let normalized = [
        nc.normalize_max(max_obs),
        nc.normalize_min(min_obs),
        nc.normalize_max(max_all),
        nc.normalize_min(min_all),
    ];
    Ok(ExtremalQuadruple {
        max_obs,
        min_obs,
        max_all,
        min_all,
        s_n,
        normalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dependence::CorrelationModel;
    use crate::missing::IndicatorDraw;

    fn path_of(values: Vec<f64>) -> SamplePath {
        SamplePath::new(CorrelationModel::Iid, values).unwrap()
    }

    fn draw_of(indicators: Vec<bool>) -> IndicatorDraw {
        let s_n = indicators.iter().filter(|&&b| b).count() as u64;
        IndicatorDraw {
            indicators,
            s_n,
            realized_p: None,
        }
    }

    #[test]
    fn gaussian_norming_reference_values() {
        let nc = gaussian_norming(100).unwrap();
        assert!((nc.a - 0.329_505_114_491_130_41).abs() < 1e-15);
        assert!((nc.b - 2.366_254_792_906_394).abs() < 1e-14);
        assert_eq!(nc.a, nc.c);
        assert_eq!(nc.b, nc.d);
        assert!((nc.u_threshold(1.0) - 2.695_759_907_397_524_4).abs() < 1e-14);
        assert!((nc.v_threshold(1.0) + 2.695_759_907_397_524_4).abs() < 1e-14);
        assert_eq!(nc.convention, Convention::GaussianSymmetric);
    }

    #[test]
    fn gaussian_norming_rejects_tiny_n() {
        assert!(gaussian_norming(2).is_err());
        assert!(gaussian_norming(0).is_err());
        assert!(gaussian_norming(3).is_ok());
    }

    #[test]
    fn symmetric_convention_requires_equal_scales() {
        assert!(NormingConstants::new(0.3, 2.0, 0.4, 2.0, 10, Convention::GaussianSymmetric).is_err());
        assert!(NormingConstants::new(0.3, 2.0, 0.4, 2.1, 10, Convention::GeneralLinear).is_ok());
        assert!(NormingConstants::new(-0.3, 2.0, 0.4, 2.1, 10, Convention::GeneralLinear).is_err());
    }

    #[test]
    fn thresholds_accept_infinite_levels() {
        let nc = gaussian_norming(100).unwrap();
        assert_eq!(nc.u_threshold(f64::INFINITY), f64::INFINITY);
        assert_eq!(nc.u_threshold(f64::NEG_INFINITY), f64::NEG_INFINITY);
        // Symmetric convention: a large level lowers the floor.
        assert_eq!(nc.v_threshold(f64::INFINITY), f64::NEG_INFINITY);
        assert_eq!(nc.v_threshold(f64::NEG_INFINITY), f64::INFINITY);
    }

    #[test]
    fn quadruple_scans_extremes() {
        let nc = NormingConstants::new(1.0, 0.0, 1.0, 0.0, 5, Convention::GaussianSymmetric).unwrap();
        let path = path_of(vec![0.5, -1.5, 2.0, 0.0, -0.25]);
        let draw = draw_of(vec![true, false, false, true, true]);
        let q = compute_quadruple(&path, &draw, &nc).unwrap();
        assert_eq!(q.s_n, 3);
        assert_eq!(q.max_all, 2.0);
        assert_eq!(q.min_all, -1.5);
        assert_eq!(q.max_obs, 0.5);
        assert_eq!(q.min_obs, -0.25);
        assert_eq!(q.normalized[0], 0.5);
        assert_eq!(q.normalized[1], 0.25);
    }

    #[test]
    fn empty_observation_sentinels() {
        let nc = gaussian_norming(3).unwrap();
        let path = path_of(vec![0.1, 0.2, 0.3]);
        let draw = draw_of(vec![false, false, false]);
        let q = compute_quadruple(&path, &draw, &nc).unwrap();
        assert_eq!(q.s_n, 0);
        assert_eq!(q.max_obs, f64::NEG_INFINITY);
        assert_eq!(q.min_obs, f64::INFINITY);
        assert_eq!(q.normalized[0], f64::NEG_INFINITY);
        assert_eq!(q.normalized[1], f64::NEG_INFINITY);
        assert!(q.max_all.is_finite());
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let nc = gaussian_norming(3).unwrap();
        let path = path_of(vec![0.1, 0.2, 0.3]);
        let draw = draw_of(vec![true, false]);
        assert!(matches!(
            compute_quadruple(&path, &draw, &nc),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn normalized_min_equals_normalized_max_of_negated_path() {
        let nc = gaussian_norming(4).unwrap();
        let values = vec![0.37, -1.21, 0.04, 2.2];
        let negated: Vec<f64> = values.iter().map(|v| -v).collect();
        let draw = draw_of(vec![true, true, false, true]);
        let q = compute_quadruple(&path_of(values), &draw, &nc).unwrap();
        let qn = compute_quadruple(&path_of(negated), &draw, &nc).unwrap();
        // Bitwise equality: fl(-m - d) = -fl(m + d) under round-to-nearest.
        assert_eq!(q.normalized[3], qn.normalized[2]);
        assert_eq!(q.normalized[1], qn.normalized[0]);
    }
}
