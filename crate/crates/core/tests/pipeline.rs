//! Cross-module runs: samplers against each other, missingness models
//! against their reductions, and the engine against the finite-n oracle.

use exlab_core::dependence::CorrelationModel;
use exlab_core::engine::{
    difference_statistic, estimates_to_csv, event_thresholds, iid_oracle, records_to_csv,
    run_experiment, ExperimentConfig, NormingSpec,
};
use exlab_core::extremal::{gaussian_norming, Convention, NormingConstants};
use exlab_core::genpath::{generate_ar1, generate_circulant};
use exlab_core::limitlaw::{LimitSpec, ThresholdQuad};
use exlab_core::missing::{MissingnessModel, PDistribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn general_linear(n: u64) -> NormingConstants {
    let gs = gaussian_norming(n).unwrap();
    NormingConstants::new(gs.a, gs.b, gs.a, -gs.b, n, Convention::GeneralLinear).unwrap()
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn lag1_corr(values: &[f64]) -> f64 {
    let m = mean(values);
    let var = values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64;
    let cov = values[..values.len() - 1]
        .iter()
        .zip(&values[1..])
        .map(|(a, b)| (a - m) * (b - m))
        .sum::<f64>()
        / (values.len() - 1) as f64;
    cov / var
}

/// The recursive and the spectral sampler target the same process; their
/// lag-1 statistics must agree with each other and with phi.
#[test]
fn recursive_and_circulant_ar1_agree() {
    let phi = 0.6;
    let model = CorrelationModel::ar1(phi).unwrap();
    let n = 4_096u64;
    let reps = 200;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut rec = Vec::with_capacity(reps);
    let mut circ = Vec::with_capacity(reps);
    for _ in 0..reps {
        rec.push(lag1_corr(generate_ar1(n, phi, &mut rng).unwrap().values()));
        circ.push(lag1_corr(generate_circulant(n, &model, &mut rng).unwrap().values()));
    }
    // Standard error of a lag-1 estimate is about sqrt((1 - phi^2) / n);
    // averaging reps of them shrinks it by sqrt(reps).
    let se = ((1.0 - phi * phi) / n as f64).sqrt() / (reps as f64).sqrt();
    let (mr, mc) = (mean(&rec), mean(&circ));
    assert!((mr - phi).abs() < 5.0 * se, "recursive lag-1 {mr} vs {phi}");
    assert!((mc - phi).abs() < 5.0 * se, "circulant lag-1 {mc} vs {phi}");
    assert!((mr - mc).abs() < 7.0 * se, "samplers disagree: {mr} vs {mc}");
}

/// A degenerate exchangeable mechanism consumes no randomness for its
/// fraction draw, so it must reproduce the Bernoulli run byte for byte.
#[test]
fn exchangeable_point_mass_collapses_to_bernoulli() {
    let base = ExperimentConfig {
        correlation: CorrelationModel::Iid,
        missingness: MissingnessModel::iid_bernoulli(0.3).unwrap(),
        n: 500,
        reps: 400,
        quads: vec![ThresholdQuad::new(0.0, 1.0, 1.0, 0.0).unwrap()],
        norming: NormingSpec::Gaussian,
        base_seed: 909,
        workers: 0,
    };
    let bernoulli = run_experiment(&base).unwrap();
    let exchangeable = run_experiment(&ExperimentConfig {
        missingness: MissingnessModel::exchangeable(PDistribution::point_mass(0.3).unwrap()),
        ..base
    })
    .unwrap();
    assert_eq!(
        records_to_csv(&bernoulli.records),
        records_to_csv(&exchangeable.records)
    );
    assert_eq!(
        estimates_to_csv(&bernoulli.rows),
        estimates_to_csv(&exchangeable.rows)
    );
}

/// Independent data at a nesting norming: empirical frequencies sit on the
/// exact finite-n law, not merely near the limit.
#[test]
fn engine_matches_oracle_at_scale() {
    let n = 10_000u64;
    let reps = 4_000u64;
    let norming = general_linear(n);
    let quads = vec![
        ThresholdQuad::new(-0.5, 1.0, 1.0, -1.0).unwrap(),
        ThresholdQuad::new(0.0, 0.5, 2.0, 0.5).unwrap(),
        ThresholdQuad::new(0.5, 2.0, 0.5, -0.5).unwrap(),
    ];
    let cfg = ExperimentConfig {
        correlation: CorrelationModel::Iid,
        missingness: MissingnessModel::two_state_markov(0.3, 0.2).unwrap(),
        n,
        reps,
        quads: quads.clone(),
        norming: NormingSpec::Explicit(norming),
        base_seed: 910,
        workers: 0,
    };
    let result = run_experiment(&cfg).unwrap();
    let spec = LimitSpec::gumbel();
    for (q, row) in quads.iter().zip(&result.rows) {
        let th = event_thresholds(q, &norming, &spec);
        let oracle = iid_oracle(th.u2, th.v2, th.u1, th.v1, n, &cfg.missingness, 0, 0).unwrap();
        let se = (oracle * (1.0 - oracle) / reps as f64).sqrt().max(1e-6);
        assert!(
            (row.empirical - oracle).abs() <= 4.0 * se,
            "empirical {} vs oracle {oracle} at quad {q:?}",
            row.empirical
        );
    }
}

/// The gap distributions start at zero mass, end at full mass, never
/// decrease, and account for every replicate with an observed entry.
#[test]
fn difference_statistic_is_a_distribution() {
    let cfg = ExperimentConfig {
        correlation: CorrelationModel::Iid,
        missingness: MissingnessModel::iid_bernoulli(0.5).unwrap(),
        n: 1_000,
        reps: 2_000,
        quads: vec![],
        norming: NormingSpec::Gaussian,
        base_seed: 911,
        workers: 0,
    };
    let result = run_experiment(&cfg).unwrap();
    let summary = difference_statistic(&result.records, &result.norming).unwrap();
    assert_eq!(
        summary.included + summary.excluded,
        cfg.reps,
        "replicates lost by the gap summary"
    );
    assert_eq!(summary.excluded, result.empty_observation_count);
    for cdf in [&summary.min_gap_cdf, &summary.max_gap_cdf] {
        assert!(cdf.windows(2).all(|w| w[0] <= w[1]), "gap CDF not monotone");
        assert!(*cdf.first().unwrap() >= 0.0);
        // Gap statistics are nonnegative, so the top of the grid holds
        // nearly all mass at this scale.
        assert!(*cdf.last().unwrap() > 0.99);
    }
    for (_, q) in summary
        .min_gap_quantiles
        .iter()
        .chain(&summary.max_gap_quantiles)
    {
        assert!(*q >= 0.0, "negative gap quantile");
    }
}
