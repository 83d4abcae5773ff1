//! Monte Carlo engine: generates replicates, evaluates threshold events on
//! the four extremes, and compares empirical frequencies with the limiting
//! law and with exact finite-n references.
//!
//! Replicates are seeded individually from (base seed, stream, n, replicate
//! index), so results are bit-identical for any worker count and any n in a
//! sweep is independent of the others.

use serde::Serialize;

use crate::dependence::CorrelationModel;
use crate::error::{Error, Result};
use crate::exec;
use crate::extremal::{compute_quadruple, gaussian_norming, ExtremalQuadruple, NormingConstants};
use crate::genpath::{generate_ar1, generate_iid, CirculantEmbedding, SamplePath};
use crate::limitlaw::{expectation_over_p, LimitSpec, ThresholdQuad};
use crate::missing::{draw_indicators, MissingnessModel, PDistribution};
use crate::normal;
use crate::seeding::{replicate_rng, Stream};

/// Source of the norming constants for a run.
#[derive(Debug, Clone, Serialize)]
pub enum NormingSpec {
    /// The Gaussian sequence at the run's n.
    Gaussian,
    /// Caller-supplied constants; their n must match the run's n.
    Explicit(NormingConstants),
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub correlation: CorrelationModel,
    pub missingness: MissingnessModel,
    pub n: u64,
    pub reps: u64,
    pub quads: Vec<ThresholdQuad>,
    pub norming: NormingSpec,
    pub base_seed: u64,
    /// 0 uses every core; 1 runs sequentially.
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("sample length n must be positive".into()));
        }
        if self.reps == 0 {
            return Err(Error::InvalidConfig("replicate count must be positive".into()));
        }
        self.resolved_norming()?;
        self.missingness.induced_p_distribution(self.n)?;
        Ok(())
    }

    pub fn resolved_norming(&self) -> Result<NormingConstants> {
        match &self.norming {
            NormingSpec::Gaussian => gaussian_norming(self.n),
            NormingSpec::Explicit(nc) => {
                if nc.n != self.n {
                    return Err(Error::InvalidConfig(format!(
                        "norming constants are for n = {}, run has n = {}",
                        nc.n, self.n
                    )));
                }
                Ok(*nc)
            }
        }
    }
}

/// The four extremes of one replicate, plus the extremes of the unobserved
/// complement needed to evaluate joint events.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ReplicateRecord {
    pub replicate: u64,
    pub quadruple: ExtremalQuadruple,
    /// Maximum over unobserved entries; -inf when everything is observed.
    pub max_rest: f64,
    /// Minimum over unobserved entries; +inf when everything is observed.
    pub min_rest: f64,
}

/// One threshold quadruple's empirical frequency against the limit value.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EstimateRow {
    pub quad: ThresholdQuad,
    pub empirical: f64,
    pub std_err: f64,
    pub theoretical: f64,
    pub abs_dev: f64,
    /// abs_dev / std_err; infinite when the standard error vanishes but the
    /// deviation does not.
    pub dev_in_se: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub norming: NormingConstants,
    pub rows: Vec<EstimateRow>,
    pub records: Vec<ReplicateRecord>,
    /// Replicates whose observed subsample was empty.
    pub empty_observation_count: u64,
}

/// Raw thresholds and limit exponents of one quadruple under a norming.
///
/// The quad's 2-levels cut the box for the observed subsample, the 1-levels
/// the box for the rest of the sample. The joint event holds when every
/// observed entry lies in (v2, u2] and every unobserved entry in (v1, u1];
/// its probability is E[A^(S_n) B^(n - S_n)] under independence, which is
/// what converges to the limit law for any fraction law. Whenever the raw
/// boxes nest ((v1, u1] containing (v2, u2]) this is exactly the event
/// {v2 < m(eps) <= M(eps) <= u2, v1 < m <= M <= u1} on the four extremes;
/// a convention can map ordered levels to non-nested boxes, and there the
/// per-group reading is the one the limit law describes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EventThresholds {
    /// Cap and floor for the observed subsample, from (x2, y2).
    pub u2: f64,
    pub v2: f64,
    /// Cap and floor for the unobserved rest, from (x1, y1).
    pub u1: f64,
    pub v1: f64,
    /// Limit exponent paired with P.
    pub t2: f64,
    /// Limit exponent paired with 1 - P.
    pub t1: f64,
}

pub fn event_thresholds(
    q: &ThresholdQuad,
    norming: &NormingConstants,
    spec: &LimitSpec,
) -> EventThresholds {
    EventThresholds {
        u2: norming.u_threshold(q.x2),
        v2: norming.v_threshold(q.y2),
        u1: norming.u_threshold(q.x1),
        v1: norming.v_threshold(q.y1),
        t2: spec.g.tail(q.x2) + spec.h.tail(q.y2),
        t1: spec.g.tail(q.x1) + spec.h.tail(q.y1),
    }
}

/// Whether one replicate satisfies the joint interval event. An empty group
/// satisfies its box vacuously.
pub fn event_holds(rec: &ReplicateRecord, t: &EventThresholds) -> bool {
    let q = &rec.quadruple;
    let obs_ok = q.s_n == 0 || (t.v2 < q.min_obs && q.max_obs <= t.u2);
    let rest_ok = rec.max_rest == f64::NEG_INFINITY
        || (t.v1 < rec.min_rest && rec.max_rest <= t.u1);
    obs_ok && rest_ok
}

enum PathSampler {
    Iid,
    Ar1(f64),
    Circulant(CirculantEmbedding),
}

impl PathSampler {
    fn build(model: &CorrelationModel, n: u64) -> Result<Self> {
        Ok(match model {
            CorrelationModel::Iid => Self::Iid,
            CorrelationModel::Ar1 { phi } => Self::Ar1(*phi),
            other => Self::Circulant(CirculantEmbedding::new(other, n)?),
        })
    }

    fn sample(
        &self,
        model: &CorrelationModel,
        n: u64,
        rng: &mut impl rand::Rng,
    ) -> Result<SamplePath> {
        match self {
            Self::Iid => generate_iid(n, rng),
            Self::Ar1(phi) => generate_ar1(n, *phi, rng),
            Self::Circulant(embedding) => SamplePath::new(model.clone(), embedding.sample(rng)),
        }
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    cfg.validate()?;
    let norming = cfg.resolved_norming()?;
    let sampler = PathSampler::build(&cfg.correlation, cfg.n)?;
    let drawn = exec::map_collect(cfg.reps, cfg.workers, |r| -> Result<ReplicateRecord> {
        let mut path_rng = replicate_rng(cfg.base_seed, Stream::Path, cfg.n, r);
        let path = sampler.sample(&cfg.correlation, cfg.n, &mut path_rng)?;
        let mut ind_rng = replicate_rng(cfg.base_seed, Stream::Indicator, cfg.n, r);
        let draw = draw_indicators(&cfg.missingness, cfg.n, r, &mut ind_rng)?;
        let quadruple = compute_quadruple(&path, &draw, &norming)?;
        let mut max_rest = f64::NEG_INFINITY;
        let mut min_rest = f64::INFINITY;
        for (&x, &obs) in path.values().iter().zip(&draw.indicators) {
            if !obs {
                if x > max_rest {
                    max_rest = x;
                }
                if x < min_rest {
                    min_rest = x;
                }
            }
        }
        Ok(ReplicateRecord {
            replicate: r,
            quadruple,
            max_rest,
            min_rest,
        })
    });
    let mut records = Vec::with_capacity(drawn.len());
    for record in drawn {
        records.push(record?);
    }

    let spec = LimitSpec::gumbel();
    let pd = cfg.missingness.induced_p_distribution(cfg.n)?;
    let rows = cfg
        .quads
        .iter()
        .map(|q| estimate_row(q, &records, &norming, &spec, &pd))
        .collect();
    let empty_observation_count = records.iter().filter(|r| r.quadruple.s_n == 0).count() as u64;
    Ok(ExperimentResult {
        norming,
        rows,
        records,
        empty_observation_count,
    })
}

fn estimate_row(
    q: &ThresholdQuad,
    records: &[ReplicateRecord],
    norming: &NormingConstants,
    spec: &LimitSpec,
    pd: &PDistribution,
) -> EstimateRow {
    let th = event_thresholds(q, norming, spec);
    let count = records.iter().filter(|r| event_holds(r, &th)).count();
    let reps = records.len() as f64;
    let empirical = count as f64 / reps;
    let std_err = (empirical * (1.0 - empirical) / reps).sqrt();
    let theoretical = expectation_over_p(pd, th.t2, th.t1);
    let abs_dev = (empirical - theoretical).abs();
    let dev_in_se = if std_err > 0.0 {
        abs_dev / std_err
    } else if abs_dev == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    EstimateRow {
        quad: *q,
        empirical,
        std_err,
        theoretical,
        abs_dev,
        dev_in_se,
    }
}

fn pow_n(x: f64, n: u64) -> f64 {
    if let Ok(e) = i32::try_from(n) {
        x.powi(e)
    } else {
        (n as f64 * x.ln()).exp()
    }
}

/// Exact finite-n probability of the joint event for an iid standard normal
/// path of length n:
///
/// ```text
/// P(observed entries in (v2, u2], unobserved entries in (v1, u1])
///   = E[ A^(S_n) B^(n - S_n) ],   A = Phi(u2) - Phi(v2), B = Phi(u1) - Phi(v1)
/// ```
///
/// The boxes must nest: [v2, u2] inside [v1, u1], so that the event equals
/// the four-extremes event {v2 < m(eps) <= M(eps) <= u2, v1 < m <= M <= u1}.
/// The expectation over S_n is taken in closed form where the mechanism
/// admits one (Bernoulli counts collapse by the binomial theorem, chains by
/// a forward product, patterns by direct counting); continuous fraction
/// laws integrate by quadrature, or by Monte Carlo over P when `mc_over_p`
/// is positive, seeded from `seed`.
pub fn iid_oracle(
    u2: f64,
    v2: f64,
    u1: f64,
    v1: f64,
    n: u64,
    missingness: &MissingnessModel,
    mc_over_p: u64,
    seed: u64,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("the oracle needs n >= 1".into()));
    }
    if !(v2 < u2) {
        return Err(Error::InvalidInterval { lo: v2, hi: u2 });
    }
    if !(v1 < u1) {
        return Err(Error::InvalidInterval { lo: v1, hi: u1 });
    }
    if v1 > v2 || u2 > u1 {
        return Err(Error::InvalidParameter(format!(
            "the observed box [{v2}, {u2}] must nest inside the complete box [{v1}, {u1}]"
        )));
    }
    let a = normal::interval_prob(v2, u2);
    let b = normal::interval_prob(v1, u1);
    let value = match missingness {
        MissingnessModel::IidBernoulli { p } => pow_n(p * a + (1.0 - p) * b, n),
        MissingnessModel::Exchangeable { p_distribution } => {
            if mc_over_p > 0 {
                let mut rng = replicate_rng(seed, Stream::Oracle, n, 0);
                let total: f64 = (0..mc_over_p)
                    .map(|_| {
                        let p = p_distribution.sample(&mut rng);
                        pow_n(p * a + (1.0 - p) * b, n)
                    })
                    .sum();
                total / mc_over_p as f64
            } else {
                p_distribution.expect(|p| pow_n(p * a + (1.0 - p) * b, n))
            }
        }
        MissingnessModel::TwoStateMarkov { p01, p10 } => {
            let pi1 = p01 / (p01 + p10);
            let mut state0 = (1.0 - pi1) * b;
            let mut state1 = pi1 * a;
            for _ in 1..n {
                let next0 = (state0 * (1.0 - p01) + state1 * p10) * b;
                let next1 = (state0 * p01 + state1 * (1.0 - p10)) * a;
                state0 = next0;
                state1 = next1;
            }
            state0 + state1
        }
        MissingnessModel::DeterministicPattern { patterns } => {
            let weight = 1.0 / patterns.len() as f64;
            let mut total = 0.0;
            for pattern in patterns {
                if (pattern.len() as u64) < n {
                    return Err(Error::InvalidParameter(format!(
                        "pattern of length {} is shorter than n = {n}",
                        pattern.len()
                    )));
                }
                let s = pattern[..n as usize].iter().filter(|&&o| o).count() as u64;
                total += weight * pow_n(a, s) * pow_n(b, n - s);
            }
            total
        }
    };
    Ok(value)
}

/// Difference between the empirical joint frequency of the single-threshold
/// event {v < m <= M <= u} and the product of its max-part and min-part
/// frequencies, at u = u_n(x), v = v_n(y). The two parts share a sample, so
/// the gap measures the asymptotic independence of maxima and minima.
pub fn independence_gap(
    records: &[ReplicateRecord],
    norming: &NormingConstants,
    x: f64,
    y: f64,
) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::InvalidParameter("no replicates to evaluate".into()));
    }
    let u = norming.u_threshold(x);
    let v = norming.v_threshold(y);
    if !(v < u) {
        return Err(Error::InvalidInterval { lo: v, hi: u });
    }
    let mut joint = 0u64;
    let mut max_part = 0u64;
    let mut min_part = 0u64;
    for r in records {
        let q = &r.quadruple;
        let max_ok = q.max_all <= u;
        let min_ok = v < q.min_all;
        if max_ok && min_ok {
            joint += 1;
        }
        if max_ok {
            max_part += 1;
        }
        if min_ok {
            min_part += 1;
        }
    }
    let m = records.len() as f64;
    Ok(joint as f64 / m - (max_part as f64 / m) * (min_part as f64 / m))
}

/// Distribution summary of the normalized gaps between observed and
/// complete extremes. Replicates with an empty observed subsample carry no
/// gap and are excluded (their count is reported).
#[derive(Debug, Clone, Serialize)]
pub struct DifferenceSummary {
    pub grid: Vec<f64>,
    /// P((min_obs - min_all) / c <= t) along the grid.
    pub min_gap_cdf: Vec<f64>,
    /// P((max_all - max_obs) / a <= t) along the grid.
    pub max_gap_cdf: Vec<f64>,
    pub min_gap_quantiles: Vec<(f64, f64)>,
    pub max_gap_quantiles: Vec<(f64, f64)>,
    pub included: u64,
    pub excluded: u64,
}

const QUANTILE_LEVELS: [f64; 4] = [0.5, 0.9, 0.95, 0.99];

fn empirical_quantiles(sorted: &[f64]) -> Vec<(f64, f64)> {
    QUANTILE_LEVELS
        .iter()
        .map(|&q| {
            let idx = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len()) - 1;
            (q, sorted[idx])
        })
        .collect()
}

pub fn difference_statistic(
    records: &[ReplicateRecord],
    norming: &NormingConstants,
) -> Result<DifferenceSummary> {
    let mut min_gaps = Vec::new();
    let mut max_gaps = Vec::new();
    let mut excluded = 0u64;
    for r in records {
        let q = &r.quadruple;
        if q.s_n == 0 {
            excluded += 1;
            continue;
        }
        min_gaps.push((q.min_obs - q.min_all) / norming.c);
        max_gaps.push((q.max_all - q.max_obs) / norming.a);
    }
    if min_gaps.is_empty() {
        return Err(Error::InvalidParameter(
            "every replicate had an empty observed subsample".into(),
        ));
    }
    min_gaps.sort_by(f64::total_cmp);
    max_gaps.sort_by(f64::total_cmp);
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 10.0).collect();
    let m = min_gaps.len() as f64;
    let cdf = |sorted: &[f64]| -> Vec<f64> {
        grid.iter()
            .map(|&t| sorted.partition_point(|&v| v <= t) as f64 / m)
            .collect()
    };
    Ok(DifferenceSummary {
        min_gap_cdf: cdf(&min_gaps),
        max_gap_cdf: cdf(&max_gaps),
        min_gap_quantiles: empirical_quantiles(&min_gaps),
        max_gap_quantiles: empirical_quantiles(&max_gaps),
        grid,
        included: min_gaps.len() as u64,
        excluded,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepPoint {
    pub n: u64,
    pub rows: Vec<EstimateRow>,
    pub max_abs_dev: f64,
    /// Standard error of the row attaining the maximal deviation.
    pub se_at_max: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub points: Vec<SweepPoint>,
}

/// Reruns the experiment along an increasing list of sample lengths.
pub fn convergence_sweep(base: &ExperimentConfig, n_list: &[u64]) -> Result<SweepReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidConfig("the sweep needs at least one n".into()));
    }
    if !n_list.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::InvalidConfig("sweep lengths must be strictly increasing".into()));
    }
    if base.quads.is_empty() {
        return Err(Error::InvalidConfig("the sweep needs at least one quadruple".into()));
    }
    let mut points = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let cfg = ExperimentConfig {
            n,
            quads: base.quads.clone(),
            correlation: base.correlation.clone(),
            missingness: base.missingness.clone(),
            norming: base.norming.clone(),
            ..*base
        };
        let result = run_experiment(&cfg)?;
        let worst = result
            .rows
            .iter()
            .max_by(|a, b| a.abs_dev.total_cmp(&b.abs_dev))
            .unwrap();
        points.push(SweepPoint {
            n,
            max_abs_dev: worst.abs_dev,
            se_at_max: worst.std_err,
            rows: result.rows,
        });
    }
    Ok(SweepReport { points })
}

/// CSV of estimate rows; deterministic for fixed input.
pub fn estimates_to_csv(rows: &[EstimateRow]) -> String {
    let mut out = String::from("x2,y2,x1,y1,empirical,std_err,theoretical,abs_dev,dev_in_se\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.quad.x2,
            r.quad.y2,
            r.quad.x1,
            r.quad.y1,
            r.empirical,
            r.std_err,
            r.theoretical,
            r.abs_dev,
            r.dev_in_se
        ));
    }
    out
}

/// CSV of raw replicate extremes. Empty observed subsamples print their
/// sentinel infinities.
pub fn records_to_csv(records: &[ReplicateRecord]) -> String {
    let mut out =
        String::from("replicate,M_eps,m_eps,M,m,s_n,norm_M_eps,norm_m_eps,norm_M,norm_m\n");
    for r in records {
        let q = &r.quadruple;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.replicate,
            q.max_obs,
            q.min_obs,
            q.max_all,
            q.min_all,
            q.s_n,
            q.normalized[0],
            q.normalized[1],
            q.normalized[2],
            q.normalized[3]
        ));
    }
    out
}
