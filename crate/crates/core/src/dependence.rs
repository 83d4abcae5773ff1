//! Correlation models and numerical checks of the dependence conditions
//! under which the extremal limit theory applies.
//!
//! Three diagnostics are tracked along growing-n grids:
//!
//! * the Berman statistic rho_n ln n, which must vanish;
//! * the Davis sum of |rho_k|^p for some p > 1, which must stay bounded;
//! * a truncated double-tail sum (the block condition usually written D'),
//!   which must tend to zero along u_n, v_n.
//!
//! Each trajectory is classified as numerically satisfied, numerically
//! violated, or inconclusive; the cutoffs are explicit and documented on
//! [`VerdictCutoffs`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::extremal::NormingConstants;
use crate::normal;
use crate::quad;

/// Correlations are capped strictly below one so that conditional laws and
/// embeddings stay nondegenerate.
pub const RHO_CAP: f64 = 1.0 - 1e-9;

/// Stationary autocorrelation structure rho_k at integer lags.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorrelationModel {
    /// rho_0 = 1, rho_k = 0 for k >= 1.
    Iid,
    /// rho_k = phi^k with |phi| < 1.
    Ar1 { phi: f64 },
    /// rho_k = min(cap, c k^-alpha) with c > 0, alpha > 0.
    ///
    /// Not every (c, alpha) pair is a valid autocorrelation sequence: large c
    /// at slow decay pushes the spectral density negative, and path
    /// generation reports an embedding failure. c <= 1 / (2 - 2^-alpha)
    /// keeps the sequence convex and is always safe.
    PowerDecay { c: f64, alpha: f64 },
    /// rho_k = min(cap, c / ln(k + e)) with c > 0.
    LogDecay { c: f64 },
}

impl CorrelationModel {
    pub fn ar1(phi: f64) -> Result<Self> {
        if !phi.is_finite() || phi.abs() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "ar(1) coefficient must satisfy |phi| < 1, got {phi}"
            )));
        }
        Ok(Self::Ar1 { phi })
    }

    pub fn power_decay(c: f64, alpha: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() || !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "power decay needs c > 0 and alpha > 0, got c = {c}, alpha = {alpha}"
            )));
        }
        Ok(Self::PowerDecay { c, alpha })
    }

    pub fn log_decay(c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "log decay needs c > 0, got {c}"
            )));
        }
        Ok(Self::LogDecay { c })
    }

    /// Autocorrelation at lag k; rho_0 = 1 for every model.
    pub fn rho_at(&self, k: u64) -> f64 {
        if k == 0 {
            return 1.0;
        }
        match *self {
            Self::Iid => 0.0,
            Self::Ar1 { phi } => {
                if let Ok(e) = i32::try_from(k) {
                    phi.powi(e)
                } else {
                    let mag = phi.abs().powf(k as f64);
                    if phi < 0.0 && k % 2 == 1 {
                        -mag
                    } else {
                        mag
                    }
                }
            }
            Self::PowerDecay { c, alpha } => (c * (k as f64).powf(-alpha)).min(RHO_CAP),
            Self::LogDecay { c } => (c / ((k as f64) + std::f64::consts::E).ln()).min(RHO_CAP),
        }
    }
}

/// rho_n ln n. Requires n >= 2.
pub fn berman_statistic(model: &CorrelationModel, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "the Berman statistic needs n >= 2, got {n}"
        )));
    }
    Ok(model.rho_at(n) * (n as f64).ln())
}

/// Partial sum of |rho_k|^p for k = 1..=n_terms. Requires p > 1.
pub fn davis_sum(model: &CorrelationModel, p: f64, n_terms: u64) -> Result<f64> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "the Davis sum needs p > 1, got {p}"
        )));
    }
    if n_terms == 0 {
        return Err(Error::InvalidParameter("the Davis sum needs at least one term".into()));
    }
    let mut total = 0.0;
    for k in 1..=n_terms {
        total += model.rho_at(k).abs().powf(p);
    }
    Ok(total)
}

/// Integration beyond this many standard deviations is truncated; the
/// discarded mass is below 1e-16.
const BVN_CLIP: f64 = 8.5;
const BVN_TOL: f64 = 1e-13;

/// P(a_lo < X <= a_hi, b_lo < Y <= b_hi) for a standard bivariate normal
/// pair with correlation rho in (-1, 1). Infinite bounds are allowed; each
/// interval must have lo < hi. Absolute accuracy is well inside 1e-10.
pub fn bvn_rect(a_lo: f64, a_hi: f64, b_lo: f64, b_hi: f64, rho: f64) -> Result<f64> {
    if !(a_lo < a_hi) {
        return Err(Error::InvalidInterval { lo: a_lo, hi: a_hi });
    }
    if !(b_lo < b_hi) {
        return Err(Error::InvalidInterval { lo: b_lo, hi: b_hi });
    }
    if !rho.is_finite() || rho.abs() >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "bvn correlation must lie in (-1, 1), got {rho}"
        )));
    }
    if rho == 0.0 {
        let p = normal::interval_prob(a_lo, a_hi) * normal::interval_prob(b_lo, b_hi);
        return Ok(p.clamp(0.0, 1.0));
    }
    let lo = a_lo.max(-BVN_CLIP);
    let hi = a_hi.min(BVN_CLIP);
    if !(lo < hi) {
        return Ok(0.0);
    }
    let s = ((1.0 - rho) * (1.0 + rho)).sqrt();
    let integrand = |t: f64| {
        let c_lo = if b_lo == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            (b_lo - rho * t) / s
        };
        let c_hi = if b_hi == f64::INFINITY {
            f64::INFINITY
        } else {
            (b_hi - rho * t) / s
        };
        normal::pdf(t) * normal::interval_prob(c_lo, c_hi)
    };
    let value = quad::adaptive_simpson(&integrand, lo, hi, BVN_TOL);
    Ok(value.clamp(0.0, 1.0))
}

/// Truncated double-tail sum
///
/// n * sum_{j=1..floor(n/k)} [ P(X > u, Y_j > u) + P(X > u, Y_j <= v)
///                           + P(X <= v, Y_j > u) + P(X <= v, Y_j <= v) ]
///
/// at u = u_n(x), v = v_n(y), where Y_j is the lag-j companion. Requires
/// 1 <= k <= n and finite levels with v < u.
pub fn dprime_sum(
    model: &CorrelationModel,
    n: u64,
    k: u64,
    x: f64,
    y: f64,
    norming: &NormingConstants,
) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "block parameter must satisfy 1 <= k <= n, got k = {k}, n = {n}"
        )));
    }
    if !x.is_finite() || !y.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "levels must be finite, got x = {x}, y = {y}"
        )));
    }
    let u = norming.u_threshold(x);
    let v = norming.v_threshold(y);
    if !(v < u) {
        return Err(Error::InvalidInterval { lo: v, hi: u });
    }
    let lags = n / k;
    let terms = exec::map_collect(lags, 0, |i| {
        let rho = model.rho_at(i + 1);
        let uu = bvn_rect(u, f64::INFINITY, u, f64::INFINITY, rho)?;
        let uv = bvn_rect(u, f64::INFINITY, f64::NEG_INFINITY, v, rho)?;
        let vu = bvn_rect(f64::NEG_INFINITY, v, u, f64::INFINITY, rho)?;
        let vv = bvn_rect(f64::NEG_INFINITY, v, f64::NEG_INFINITY, v, rho)?;
        Ok(uu + uv + vu + vv)
    });
    let mut total = 0.0;
    for term in terms {
        total += term?;
    }
    Ok(n as f64 * total)
}

/// Outcome of a numerical condition check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    SatisfiedNumerically,
    ViolatedNumerically,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::SatisfiedNumerically => "SatisfiedNumerically",
            Verdict::ViolatedNumerically => "ViolatedNumerically",
            Verdict::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

/// Cutoffs behind the verdicts.
///
/// A vanishing trajectory (Berman, D') is satisfied when its last value sits
/// below `decay_level` in absolute value and has not grown over the last
/// decade of n; it is violated when it is above the level and has not
/// shrunk. A bounded-sum trajectory (Davis) is satisfied when the last
/// decade added less than `davis_tail`; it is violated when that increment
/// is at least `stall_ratio` times the previous decade's, i.e. the series
/// shows no sign of tailing off. Everything else is inconclusive.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerdictCutoffs {
    pub decay_level: f64,
    pub davis_tail: f64,
    pub stall_ratio: f64,
}

impl Default for VerdictCutoffs {
    fn default() -> Self {
        Self {
            decay_level: 0.05,
            davis_tail: 1e-6,
            stall_ratio: 0.9,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConditionVerdicts {
    pub berman: Verdict,
    pub davis: Verdict,
    pub dprime: Verdict,
}

/// Trajectories and verdicts for one correlation model.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub berman_values: Vec<(u64, f64)>,
    pub davis_partial_sums: Vec<(u64, f64)>,
    pub dprime_values: Vec<(u64, f64)>,
    pub verdicts: ConditionVerdicts,
}

impl ConditionReport {
    /// Rows (condition, n_or_N, value) followed by a verdict block.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("condition,n_or_N,value\n");
        for &(n, v) in &self.berman_values {
            out.push_str(&format!("berman,{n},{v}\n"));
        }
        for &(n, v) in &self.davis_partial_sums {
            out.push_str(&format!("davis,{n},{v}\n"));
        }
        for &(n, v) in &self.dprime_values {
            out.push_str(&format!("dprime,{n},{v}\n"));
        }
        out.push_str(&format!("verdict,berman,{}\n", self.verdicts.berman));
        out.push_str(&format!("verdict,davis,{}\n", self.verdicts.davis));
        out.push_str(&format!("verdict,dprime,{}\n", self.verdicts.dprime));
        out
    }
}

/// Evaluation grid for [`run_diagnostics`]. The D' check uses block
/// parameter k = max(2, floor(sqrt(n))) at levels (x, y).
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticGrid {
    pub berman_ns: Vec<u64>,
    pub davis_ns: Vec<u64>,
    pub dprime_ns: Vec<u64>,
    pub dprime_x: f64,
    pub dprime_y: f64,
}

impl Default for DiagnosticGrid {
    fn default() -> Self {
        Self {
            berman_ns: vec![100, 1_000, 10_000, 100_000, 1_000_000],
            davis_ns: vec![100, 1_000, 10_000, 100_000, 1_000_000],
            dprime_ns: vec![100, 1_000, 10_000],
            dprime_x: 0.0,
            dprime_y: 0.0,
        }
    }
}

/// The last value of a trajectory together with the value one decade of n
/// earlier (the largest entry at or below last_n / 10).
fn decade_back(series: &[(u64, f64)]) -> Option<((u64, f64), (u64, f64))> {
    let &last = series.last()?;
    let cut = last.0 / 10;
    let earlier = series[..series.len() - 1]
        .iter()
        .rev()
        .find(|(n, _)| *n <= cut)?;
    Some((*earlier, last))
}

fn decay_verdict(series: &[(u64, f64)], level: f64) -> Verdict {
    match decade_back(series) {
        None => Verdict::Inconclusive,
        Some(((_, v_ref), (_, v_last))) => {
            let below = v_last.abs() < level;
            let shrinking = v_last.abs() <= v_ref.abs();
            if below && shrinking {
                Verdict::SatisfiedNumerically
            } else if !below && !shrinking {
                Verdict::ViolatedNumerically
            } else {
                Verdict::Inconclusive
            }
        }
    }
}

fn bounded_sum_verdict(series: &[(u64, f64)], tail: f64, stall_ratio: f64) -> Verdict {
    let Some(((n_ref, s_ref), (_, s_last))) = decade_back(series) else {
        return Verdict::Inconclusive;
    };
    let inc_last = s_last - s_ref;
    if inc_last < tail {
        return Verdict::SatisfiedNumerically;
    }
    let upto_ref = &series[..series.iter().position(|&(n, _)| n == n_ref).unwrap() + 1];
    match decade_back(upto_ref) {
        None => Verdict::Inconclusive,
        Some(((_, s_ref2), _)) => {
            let inc_prev = s_ref - s_ref2;
            if inc_last >= stall_ratio * inc_prev {
                Verdict::ViolatedNumerically
            } else {
                Verdict::Inconclusive
            }
        }
    }
}

/// Classifies precomputed trajectories. Each series must be sorted by n.
pub fn classify_conditions(
    berman: &[(u64, f64)],
    davis: &[(u64, f64)],
    dprime: &[(u64, f64)],
    cutoffs: &VerdictCutoffs,
) -> ConditionVerdicts {
    ConditionVerdicts {
        berman: decay_verdict(berman, cutoffs.decay_level),
        davis: bounded_sum_verdict(davis, cutoffs.davis_tail, cutoffs.stall_ratio),
        dprime: decay_verdict(dprime, cutoffs.decay_level),
    }
}

/// Evaluates all three trajectories for one model and classifies them.
pub fn run_diagnostics(
    model: &CorrelationModel,
    davis_p: f64,
    grid: &DiagnosticGrid,
    cutoffs: &VerdictCutoffs,
) -> Result<ConditionReport> {
    let mut berman_values = Vec::with_capacity(grid.berman_ns.len());
    for &n in &grid.berman_ns {
        berman_values.push((n, berman_statistic(model, n)?));
    }

    if !grid.davis_ns.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidParameter(
            "davis grid must be strictly increasing".into(),
        ));
    }
    if !(davis_p > 1.0) || !davis_p.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "the Davis sum needs p > 1, got {davis_p}"
        )));
    }
    let mut davis_partial_sums = Vec::with_capacity(grid.davis_ns.len());
    let mut running = 0.0;
    let mut k = 1u64;
    for &n_terms in &grid.davis_ns {
        while k <= n_terms {
            running += model.rho_at(k).abs().powf(davis_p);
            k += 1;
        }
        davis_partial_sums.push((n_terms, running));
    }

    let mut dprime_values = Vec::with_capacity(grid.dprime_ns.len());
    for &n in &grid.dprime_ns {
        let block = 2.max((n as f64).sqrt().floor() as u64);
        let norming = crate::extremal::gaussian_norming(n)?;
        dprime_values.push((
            n,
            dprime_sum(model, n, block, grid.dprime_x, grid.dprime_y, &norming)?,
        ));
    }

    let verdicts = classify_conditions(&berman_values, &davis_partial_sums, &dprime_values, cutoffs);
    Ok(ConditionReport {
        berman_values,
        davis_partial_sums,
        dprime_values,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extremal::gaussian_norming;
    use proptest::prelude::*;

    fn orthant(rho: f64) -> f64 {
        bvn_rect(0.0, f64::INFINITY, 0.0, f64::INFINITY, rho).unwrap()
    }

    #[test]
    fn rho_at_lag_zero_is_one() {
        let models = [
            CorrelationModel::Iid,
            CorrelationModel::ar1(-0.7).unwrap(),
            CorrelationModel::power_decay(2.0, 0.5).unwrap(),
            CorrelationModel::log_decay(1.0).unwrap(),
        ];
        for m in &models {
            assert_eq!(m.rho_at(0), 1.0);
            for k in [1u64, 2, 10, 1_000, 10_000_000] {
                assert!(m.rho_at(k).abs() < 1.0, "{m:?} at lag {k}");
            }
        }
    }

    #[test]
    fn rho_at_examples() {
        let ar = CorrelationModel::ar1(0.6).unwrap();
        assert!((ar.rho_at(3) - 0.216).abs() < 1e-15);
        let neg = CorrelationModel::ar1(-0.5).unwrap();
        assert_eq!(neg.rho_at(2), 0.25);
        assert_eq!(neg.rho_at(3), -0.125);
        let pd = CorrelationModel::power_decay(2.0, 1.0).unwrap();
        assert_eq!(pd.rho_at(1), RHO_CAP);
        assert_eq!(pd.rho_at(4), 0.5);
        let ld = CorrelationModel::log_decay(1.0).unwrap();
        assert!((ld.rho_at(1) - 0.761_462_859_614_66).abs() < 1e-12);
    }

    #[test]
    fn constructor_validation() {
        assert!(CorrelationModel::ar1(1.0).is_err());
        assert!(CorrelationModel::ar1(f64::INFINITY).is_err());
        assert!(CorrelationModel::power_decay(0.0, 1.0).is_err());
        assert!(CorrelationModel::power_decay(1.0, -1.0).is_err());
        assert!(CorrelationModel::log_decay(0.0).is_err());
    }

    #[test]
    fn berman_trajectories() {
        let ar = CorrelationModel::ar1(0.5).unwrap();
        assert!(berman_statistic(&ar, 100).unwrap().abs() < 1e-25);
        let pd = CorrelationModel::power_decay(1.0, 0.5).unwrap();
        let b = berman_statistic(&pd, 1_000_000).unwrap();
        assert!((b - 0.013_815_510_557_964_274).abs() < 1e-4);
        let ld = CorrelationModel::log_decay(1.0).unwrap();
        assert!((berman_statistic(&ld, 1_000_000).unwrap() - 1.0).abs() < 1e-3);
        assert!(berman_statistic(&ar, 1).is_err());
    }

    #[test]
    fn davis_reference_values() {
        let ar = CorrelationModel::ar1(0.5).unwrap();
        // Geometric series: sum of 0.25^k over k >= 1 is 1/3.
        assert!((davis_sum(&ar, 2.0, 100).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let pd = CorrelationModel::power_decay(0.9, 0.5).unwrap();
        // |rho_k|^2 = 0.81 / k, so the sum is 0.81 times the harmonic number H_100.
        assert!((davis_sum(&pd, 2.0, 100).unwrap() - 4.201_775_789_288_093).abs() < 1e-9);
        assert!(davis_sum(&ar, 1.0, 10).is_err());
        assert!(davis_sum(&ar, 2.0, 0).is_err());
    }

    #[test]
    fn bvn_orthant_values() {
        assert!((orthant(0.5) - 1.0 / 3.0).abs() < 1e-11);
        assert!((orthant(-0.3) - 0.201_506_657_989_660_85).abs() < 1e-11);
        assert!((orthant(0.9) - 0.428_216_853_435_646_86).abs() < 1e-11);
        assert!((orthant(0.999_999) - 0.499_774_920_902_204_13).abs() < 1e-9);
        assert!((orthant(0.0) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn bvn_box_and_marginals() {
        let boxed = bvn_rect(-1.0, 1.0, -1.0, 1.0, 0.0).unwrap();
        assert!((boxed - 0.466_064_942_674_392_27).abs() < 1e-12);
        let marginal = bvn_rect(-1.0, 1.0, f64::NEG_INFINITY, f64::INFINITY, 0.7).unwrap();
        assert!((marginal - 0.682_689_492_137_085_9).abs() < 1e-11);
        let clipped = bvn_rect(9.0, f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, 0.3).unwrap();
        assert_eq!(clipped, 0.0);
    }

    #[test]
    fn bvn_input_errors() {
        assert!(bvn_rect(1.0, 1.0, 0.0, 1.0, 0.0).is_err());
        assert!(bvn_rect(0.0, 1.0, 2.0, 1.0, 0.0).is_err());
        assert!(bvn_rect(f64::NAN, 1.0, 0.0, 1.0, 0.0).is_err());
        assert!(bvn_rect(0.0, 1.0, 0.0, 1.0, 1.0).is_err());
        assert!(bvn_rect(0.0, 1.0, 0.0, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn dprime_iid_factorizes() {
        for &(n, k) in &[(100u64, 5u64), (100, 10), (200, 10)] {
            let norming = gaussian_norming(n).unwrap();
            let value = dprime_sum(&CorrelationModel::Iid, n, k, 0.0, 0.0, &norming).unwrap();
            let u = norming.u_threshold(0.0);
            let v = norming.v_threshold(0.0);
            let tail = normal::cdf_upper(u) + normal::cdf(v);
            let expected = n as f64 * (n / k) as f64 * tail * tail;
            assert!(
                (value - expected).abs() <= 1e-9,
                "n = {n}, k = {k}: {value} vs {expected}"
            );
        }
    }

    #[test]
    fn dprime_shrinks_with_larger_blocks() {
        let model = CorrelationModel::ar1(0.5).unwrap();
        let n = 10_000;
        let norming = gaussian_norming(n).unwrap();
        let values: Vec<f64> = [5u64, 10, 50]
            .iter()
            .map(|&k| dprime_sum(&model, n, k, 0.0, 0.0, &norming).unwrap())
            .collect();
        assert!(values[0] >= values[1] && values[1] >= values[2], "{values:?}");
        assert!(values.iter().all(|v| *v > 0.0));
    }

    #[test]
    fn dprime_input_errors() {
        let norming = gaussian_norming(100).unwrap();
        let m = CorrelationModel::Iid;
        assert!(dprime_sum(&m, 100, 0, 0.0, 0.0, &norming).is_err());
        assert!(dprime_sum(&m, 100, 101, 0.0, 0.0, &norming).is_err());
        assert!(dprime_sum(&m, 100, 10, f64::INFINITY, 0.0, &norming).is_err());
    }

    #[test]
    fn verdicts_for_shipped_models() {
        let cutoffs = VerdictCutoffs::default();
        let grid = DiagnosticGrid::default();

        let iid = run_diagnostics(&CorrelationModel::Iid, 2.0, &grid, &cutoffs).unwrap();
        assert_eq!(iid.verdicts.berman, Verdict::SatisfiedNumerically);
        assert_eq!(iid.verdicts.davis, Verdict::SatisfiedNumerically);
        assert_eq!(iid.verdicts.dprime, Verdict::SatisfiedNumerically);

        let ar = run_diagnostics(&CorrelationModel::ar1(0.5).unwrap(), 2.0, &grid, &cutoffs).unwrap();
        assert_eq!(ar.verdicts.berman, Verdict::SatisfiedNumerically);
        assert_eq!(ar.verdicts.davis, Verdict::SatisfiedNumerically);

        // Slow decay: the Berman statistic still vanishes but the squared
        // sum is harmonic, so the Davis check must flag it.
        let pd = CorrelationModel::power_decay(1.0, 0.5).unwrap();
        let pd_report = run_diagnostics(&pd, 2.0, &grid, &cutoffs).unwrap();
        assert_eq!(pd_report.verdicts.berman, Verdict::SatisfiedNumerically);
        assert_eq!(pd_report.verdicts.davis, Verdict::ViolatedNumerically);

        let ld = CorrelationModel::log_decay(1.0).unwrap();
        let ld_report = run_diagnostics(&ld, 2.0, &grid, &cutoffs).unwrap();
        assert_eq!(ld_report.verdicts.berman, Verdict::ViolatedNumerically);
        assert_eq!(ld_report.verdicts.davis, Verdict::ViolatedNumerically);
    }

    #[test]
    fn short_series_are_inconclusive() {
        let cutoffs = VerdictCutoffs::default();
        let v = classify_conditions(&[(100, 0.0)], &[(100, 1.0)], &[], &cutoffs);
        assert_eq!(v.berman, Verdict::Inconclusive);
        assert_eq!(v.davis, Verdict::Inconclusive);
        assert_eq!(v.dprime, Verdict::Inconclusive);
    }

    #[test]
    fn report_csv_shape() {
        let report = ConditionReport {
            berman_values: vec![(100, 0.5)],
            davis_partial_sums: vec![(100, 1.25)],
            dprime_values: vec![(100, 0.01)],
            verdicts: ConditionVerdicts {
                berman: Verdict::Inconclusive,
                davis: Verdict::SatisfiedNumerically,
                dprime: Verdict::ViolatedNumerically,
            },
        };
        let csv = report.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "condition,n_or_N,value");
        assert_eq!(lines[1], "berman,100,0.5");
        assert_eq!(lines[4], "verdict,berman,Inconclusive");
        assert_eq!(lines[6], "verdict,dprime,ViolatedNumerically");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn bvn_swap_symmetry(
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            c in -3.0f64..3.0,
            d in -3.0f64..3.0,
            rho in -0.95f64..0.95,
        ) {
            let (a_lo, a_hi) = if a < b { (a, b) } else { (b, a) };
            let (b_lo, b_hi) = if c < d { (c, d) } else { (d, c) };
            prop_assume!(a_lo < a_hi && b_lo < b_hi);
            let p = bvn_rect(a_lo, a_hi, b_lo, b_hi, rho).unwrap();
            let q = bvn_rect(b_lo, b_hi, a_lo, a_hi, rho).unwrap();
            prop_assert!((p - q).abs() < 1e-9, "{p} vs {q}");
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn bvn_zero_rho_factorizes(
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
            c in -3.0f64..3.0,
            d in -3.0f64..3.0,
        ) {
            let (a_lo, a_hi) = if a < b { (a, b) } else { (b, a) };
            let (b_lo, b_hi) = if c < d { (c, d) } else { (d, c) };
            prop_assume!(a_lo < a_hi && b_lo < b_hi);
            let joint = bvn_rect(a_lo, a_hi, b_lo, b_hi, 0.0).unwrap();
            let product = crate::normal::interval_prob(a_lo, a_hi)
                * crate::normal::interval_prob(b_lo, b_hi);
            prop_assert!((joint - product).abs() < 1e-12, "{joint} vs {product}");
        }

        #[test]
        fn bvn_monotone_in_box(
            a in -2.0f64..0.0,
            b in 0.0f64..2.0,
            grow in 0.01f64..1.5,
            rho in -0.95f64..0.95,
        ) {
            let small = bvn_rect(a, b, a, b, rho).unwrap();
            let large = bvn_rect(a - grow, b + grow, a, b, rho).unwrap();
            prop_assert!(large >= small - 1e-12, "{large} < {small}");
        }

        #[test]
        fn davis_monotone(
            phi in 0.1f64..0.9,
            p1 in 1.1f64..2.0,
            extra in 0.1f64..2.0,
            n in 2u64..200,
        ) {
            let model = CorrelationModel::ar1(phi).unwrap();
            let s1 = davis_sum(&model, p1, n).unwrap();
            let s2 = davis_sum(&model, p1, n + 10).unwrap();
            prop_assert!(s2 >= s1);
            let harder = davis_sum(&model, p1 + extra, n).unwrap();
            prop_assert!(harder <= s1 + 1e-12);
        }
    }
}
