//! Missingness mechanisms and the distribution of the observed fraction.
//!
//! Each replicate carries a 0/1 indicator sequence; entry t is observed when
//! the indicator is 1. The limit theory only sees the indicators through the
//! law of the asymptotic observed fraction P, so every mechanism also knows
//! the `PDistribution` it induces.

use rand::{Rng, RngExt};
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::exec;
use crate::quad;
use crate::seeding::{replicate_rng, Stream};

/// Law of the limiting observed fraction P on [0, 1].
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PDistribution {
    PointMass { p: f64 },
    Uniform { a: f64, b: f64 },
    Beta { alpha: f64, beta: f64 },
    /// Atoms (value, weight); weights sum to one.
    Discrete { atoms: Vec<(f64, f64)> },
}

impl PDistribution {
    pub fn point_mass(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "a point mass needs p in [0, 1], got {p}"
            )));
        }
        Ok(Self::PointMass { p })
    }

    pub fn uniform(a: f64, b: f64) -> Result<Self> {
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "a uniform fraction law needs 0 <= a < b <= 1, got [{a}, {b}]"
            )));
        }
        Ok(Self::Uniform { a, b })
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() || !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta shape parameters must be positive, got ({alpha}, {beta})"
            )));
        }
        Ok(Self::Beta { alpha, beta })
    }

    pub fn discrete(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("a discrete law needs at least one atom".into()));
        }
        let mut total = 0.0;
        for &(v, w) in &atoms {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "discrete atom {v} lies outside [0, 1]"
                )));
            }
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "discrete weight {w} must be nonnegative"
                )));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "discrete weights sum to {total}, expected 1"
            )));
        }
        Ok(Self::Discrete { atoms })
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::PointMass { p } => *p,
            Self::Uniform { a, b } => 0.5 * (a + b),
            Self::Beta { alpha, beta } => alpha / (alpha + beta),
            Self::Discrete { atoms } => atoms.iter().map(|(v, w)| v * w).sum(),
        }
    }

    /// E[f(P)]. Exact for atomic laws; Gauss-Legendre over the support for
    /// the continuous ones, with the beta density folded into the integrand.
    pub fn expect(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        match self {
            Self::PointMass { p } => f(*p),
            Self::Discrete { atoms } => atoms.iter().map(|&(v, w)| w * f(v)).sum(),
            Self::Uniform { a, b } => quad::gl64().integrate(*a, *b, f) / (b - a),
            Self::Beta { alpha, beta } => {
                let ln_norm = libm::lgamma(*alpha) + libm::lgamma(*beta) - libm::lgamma(alpha + beta);
                quad::gl64().integrate(0.0, 1.0, |p| {
                    let ln_density = (alpha - 1.0) * p.ln() + (beta - 1.0) * (1.0 - p).ln() - ln_norm;
                    ln_density.exp() * f(p)
                })
            }
        }
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self {
            Self::PointMass { p } => *p,
            Self::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
            Self::Beta { alpha, beta } => {
                rand_distr::Beta::new(*alpha, *beta).unwrap().sample(rng)
            }
            Self::Discrete { atoms } => {
                let u = rng.random::<f64>();
                let mut acc = 0.0;
                for &(v, w) in atoms {
                    acc += w;
                    if u < acc {
                        return v;
                    }
                }
                atoms.last().unwrap().0
            }
        }
    }
}

/// Mechanism generating the indicator sequence of one replicate.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MissingnessModel {
    /// Independent observation probability p per entry.
    IidBernoulli { p: f64 },
    /// P is drawn once per replicate, then entries are iid Bernoulli(P).
    Exchangeable { p_distribution: PDistribution },
    /// Stationary two-state chain with transition probabilities
    /// p01 = P(0 -> 1) and p10 = P(1 -> 0), started from its stationary law.
    TwoStateMarkov { p01: f64, p10: f64 },
    /// Fixed indicator patterns; replicate r uses pattern r mod (number of
    /// patterns). Each pattern must be at least as long as the sample.
    DeterministicPattern { patterns: Vec<Vec<bool>> },
}

impl MissingnessModel {
    pub fn iid_bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "observation probability must lie in [0, 1], got {p}"
            )));
        }
        Ok(Self::IidBernoulli { p })
    }

    pub fn exchangeable(p_distribution: PDistribution) -> Self {
        Self::Exchangeable { p_distribution }
    }

    pub fn two_state_markov(p01: f64, p10: f64) -> Result<Self> {
        for (name, v) in [("p01", p01), ("p10", p10)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {v}"
                )));
            }
        }
        if p01 + p10 <= 0.0 {
            return Err(Error::InvalidParameter(
                "a two-state chain needs p01 + p10 > 0 for a unique stationary law".into(),
            ));
        }
        Ok(Self::TwoStateMarkov { p01, p10 })
    }

    pub fn deterministic(pattern: Vec<bool>) -> Result<Self> {
        Self::deterministic_cycle(vec![pattern])
    }

    pub fn deterministic_cycle(patterns: Vec<Vec<bool>>) -> Result<Self> {
        if patterns.is_empty() || patterns.iter().any(|p| p.is_empty()) {
            return Err(Error::InvalidParameter(
                "deterministic missingness needs at least one nonempty pattern".into(),
            ));
        }
        Ok(Self::DeterministicPattern { patterns })
    }

    /// Stationary probability of state 1 for the chain variants; the plain
    /// observation probability otherwise. Undefined for patterns.
    pub fn stationary_p(&self) -> Option<f64> {
        match self {
            Self::IidBernoulli { p } => Some(*p),
            Self::TwoStateMarkov { p01, p10 } => Some(p01 / (p01 + p10)),
            _ => None,
        }
    }

    /// Law of the limiting observed fraction for samples of length n.
    pub fn induced_p_distribution(&self, n: u64) -> Result<PDistribution> {
        match self {
            Self::IidBernoulli { p } => Ok(PDistribution::PointMass { p: *p }),
            Self::Exchangeable { p_distribution } => Ok(p_distribution.clone()),
            Self::TwoStateMarkov { p01, p10 } => Ok(PDistribution::PointMass {
                p: p01 / (p01 + p10),
            }),
            Self::DeterministicPattern { patterns } => {
                let mut atoms = Vec::with_capacity(patterns.len());
                let weight = 1.0 / patterns.len() as f64;
                for pattern in patterns {
                    let mean = pattern_mean(pattern, n)?;
                    atoms.push((mean, weight));
                }
                if atoms.len() == 1 {
                    Ok(PDistribution::PointMass { p: atoms[0].0 })
                } else {
                    PDistribution::discrete(atoms)
                }
            }
        }
    }
}

fn pattern_mean(pattern: &[bool], n: u64) -> Result<f64> {
    let n = n as usize;
    if pattern.len() < n {
        return Err(Error::InvalidParameter(format!(
            "pattern of length {} is shorter than the sample length {n}",
            pattern.len()
        )));
    }
    let ones = pattern[..n].iter().filter(|&&b| b).count();
    Ok(ones as f64 / n as f64)
}

/// Indicators of one replicate.
#[derive(Debug, Clone)]
pub struct IndicatorDraw {
    pub indicators: Vec<bool>,
    pub s_n: u64,
    /// The P drawn for an exchangeable replicate; None for other mechanisms.
    pub realized_p: Option<f64>,
}

/// Draws the indicator sequence for one replicate. The replicate index
/// selects the pattern for deterministic mechanisms and is otherwise unused.
pub fn draw_indicators(
    model: &MissingnessModel,
    n: u64,
    replicate: u64,
    rng: &mut impl Rng,
) -> Result<IndicatorDraw> {
    if n == 0 {
        return Err(Error::InvalidParameter("indicator length must be positive".into()));
    }
    let mut realized_p = None;
    let indicators: Vec<bool> = match model {
        MissingnessModel::IidBernoulli { p } => {
            (0..n).map(|_| rng.random::<f64>() < *p).collect()
        }
        MissingnessModel::Exchangeable { p_distribution } => {
            let p = p_distribution.sample(rng);
            realized_p = Some(p);
            (0..n).map(|_| rng.random::<f64>() < p).collect()
        }
        MissingnessModel::TwoStateMarkov { p01, p10 } => {
            let pi1 = p01 / (p01 + p10);
            let mut state = rng.random::<f64>() < pi1;
            let mut out = Vec::with_capacity(n as usize);
            out.push(state);
            for _ in 1..n {
                let u = rng.random::<f64>();
                state = if state { u >= *p10 } else { u < *p01 };
                out.push(state);
            }
            out
        }
        MissingnessModel::DeterministicPattern { patterns } => {
            let pattern = &patterns[(replicate % patterns.len() as u64) as usize];
            pattern_mean(pattern, n)?;
            pattern[..n as usize].to_vec()
        }
    };
    let s_n = indicators.iter().filter(|&&b| b).count() as u64;
    Ok(IndicatorDraw {
        indicators,
        s_n,
        realized_p,
    })
}

fn binomial_draw(n: u64, p: f64, rng: &mut impl Rng) -> u64 {
    if p <= 0.0 {
        0
    } else if p >= 1.0 {
        n
    } else {
        rand_distr::Binomial::new(n, p).unwrap().sample(rng)
    }
}

/// Smallest epsilon on the grid i/1000 with P(|S_n/n - P| > epsilon) <
/// epsilon, the exceedance probability estimated from `reps` replicates.
/// Mechanisms whose count given P is binomial draw S_n directly; the chain
/// is simulated; patterns are counted exactly.
pub fn kyfan_estimate(
    model: &MissingnessModel,
    n: u64,
    reps: u64,
    base_seed: u64,
) -> Result<f64> {
    if n == 0 || reps == 0 {
        return Err(Error::InvalidParameter(
            "the Ky Fan estimate needs n >= 1 and reps >= 1".into(),
        ));
    }
    let draws = exec::map_collect(reps, 0, |r| -> Result<f64> {
        let mut rng = replicate_rng(base_seed, Stream::KyFan, n, r);
        let (s_n, p) = match model {
            MissingnessModel::IidBernoulli { p } => (binomial_draw(n, *p, &mut rng), *p),
            MissingnessModel::Exchangeable { p_distribution } => {
                let p = p_distribution.sample(&mut rng);
                (binomial_draw(n, p, &mut rng), p)
            }
            MissingnessModel::TwoStateMarkov { .. } => {
                let draw = draw_indicators(model, n, r, &mut rng)?;
                (draw.s_n, model.stationary_p().unwrap())
            }
            MissingnessModel::DeterministicPattern { patterns } => {
                let pattern = &patterns[(r % patterns.len() as u64) as usize];
                let ones = pattern_mean(pattern, n)? * n as f64;
                (ones.round() as u64, pattern_mean(pattern, pattern.len() as u64)?)
            }
        };
        Ok((s_n as f64 / n as f64 - p).abs())
    });
    let mut deviations = Vec::with_capacity(reps as usize);
    for d in draws {
        deviations.push(d?);
    }
    deviations.sort_by(f64::total_cmp);
    for i in 1..=1000u32 {
        let eps = f64::from(i) / 1000.0;
        let exceed = deviations.len() - deviations.partition_point(|&d| d <= eps);
        if (exceed as f64) < eps * reps as f64 {
            return Ok(eps);
        }
    }
    Ok(1.0)
}
