//! Acceptance suite: library-level criteria checked against brute-force
//! oracles and seeded simulation, one printed line per criterion.

mod common;

use std::time::Instant;

use perfmap::{
    cost_from_map_binary, exact_choice_probabilities, fit_cdf_univariate, fit_growth_exponent,
    fit_monotone_multivariate, fit_parametric, run_regret_experiment, run_sequential_design,
    sample_actions, weighted_pava, CostCdf, CostModel, EstimatorKind, MarketModel,
    ParametricFamily, Phase, RegretConfig, SequentialDesignConfig, Streams,
};
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use common::{
    binomial_loglik, grid_isotonic_objective, grid_monotone_loglik, ks_distance, log_log_slope,
    median, partition_oracle_objective, report, weighted_objective,
};

#[test]
fn criterion_01_pava_matches_grid_oracle() {
    let start = Instant::now();
    let mut rng = Streams::new(1001).stream(0);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..1000 {
        let len = rng.random_range(1..=5);
        let y: Vec<f64> = (0..len).map(|_| rng.random()).collect();
        let w: Vec<f64> = (0..len).map(|_| rng.random_range(0.1..5.0)).collect();
        let fit = weighted_pava(&y, &w).unwrap();
        for pair in fit.windows(2) {
            assert!(pair[0] <= pair[1] + 1e-12);
        }
        let excess = weighted_objective(&y, &w, &fit) - grid_isotonic_objective(&y, &w);
        worst = worst.max(excess);
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        1,
        "isotonic objective vs grid oracle",
        worst <= 1e-6 && elapsed < 30.0,
        &format!("worst excess {worst:.2e} over 1000 instances in {elapsed:.1}s"),
    );
}

#[test]
fn criterion_02_multivariate_fit_matches_partition_oracle() {
    let start = Instant::now();
    let mut rng = Streams::new(1002).stream(0);
    let mut worst_above = f64::NEG_INFINITY;
    let mut worst_below = f64::NEG_INFINITY;
    for _ in 0..200 {
        let n = rng.random_range(2..=6);
        let points: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random()]).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.2..3.0)).collect();
        let fit = fit_monotone_multivariate(&points, &y, &w).unwrap();
        let fit_obj = weighted_objective(&y, &w, &fit.fitted_values);
        let oracle = partition_oracle_objective(&points, &y, &w);
        worst_above = worst_above.max(fit_obj - oracle);
        worst_below = worst_below.max(oracle - fit_obj);
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        2,
        "multivariate objective vs partition oracle",
        worst_above <= 1e-6 && worst_below <= 1e-9 && elapsed < 120.0,
        &format!(
            "worst excess {worst_above:.2e}, worst shortfall {worst_below:.2e}, {elapsed:.1}s"
        ),
    );
}

#[test]
fn criterion_03_least_squares_fit_maximizes_likelihood() {
    let mut rng = Streams::new(1003).stream(0);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let len = rng.random_range(1..=4);
        let pi: Vec<f64> = (0..len).map(|_| rng.random_range(0.05..0.95)).collect();
        let n: Vec<f64> = (0..len).map(|_| rng.random_range(5..50) as f64).collect();
        let fitted = weighted_pava(&pi, &n).unwrap();
        let shortfall = grid_monotone_loglik(&pi, &n) - binomial_loglik(&pi, &n, &fitted);
        worst = worst.max(shortfall);
    }
    report(
        3,
        "least-squares fit attains the monotone likelihood maximum",
        worst <= 1e-6,
        &format!("worst likelihood shortfall {worst:.2e} over 100 instances"),
    );
}

#[test]
fn criterion_04_sup_norm_error_shrinks_at_the_isotonic_rate() {
    let start = Instant::now();
    let truth = CostCdf::ProbitNormal { mu: 0.5, sigma: 0.25 };
    let design_points = 100usize;
    let sizes = [1_000u64, 10_000, 100_000];
    let mut medians = Vec::new();
    for (si, &total) in sizes.iter().enumerate() {
        let per_point = total / design_points as u64;
        let mut errors: Vec<f64> = (0..10)
            .map(|seed| {
                let mut rng = Streams::new(1004 + seed).stream(si as u64);
                let obs: Vec<(f64, f64, f64)> = (0..design_points)
                    .map(|i| {
                        let b = (i as f64 + 0.5) / design_points as f64;
                        let p = truth.evaluate(b);
                        let hits = Binomial::new(per_point, p).unwrap().sample(&mut rng);
                        (b, hits as f64 / per_point as f64, per_point as f64)
                    })
                    .collect();
                let fit = fit_cdf_univariate(&obs).unwrap();
                (0..512)
                    .map(|j| {
                        let b = 0.05 + 0.9 * j as f64 / 511.0;
                        (fit.evaluate_scalar(b) - truth.evaluate(b)).abs()
                    })
                    .fold(0.0, f64::max)
            })
            .collect();
        medians.push(median(&mut errors));
    }
    let nonincreasing = medians.windows(2).all(|w| w[1] <= w[0]);
    let sizes_f: Vec<f64> = sizes.iter().map(|&n| n as f64).collect();
    let slope = log_log_slope(&sizes_f, &medians);
    let elapsed = start.elapsed().as_secs_f64();
    report(
        4,
        "sup-norm convergence rate",
        nonincreasing && (-0.5..=-0.15).contains(&slope) && elapsed < 60.0,
        &format!(
            "median errors {:.4}/{:.4}/{:.4}, log-log slope {slope:.3}, {elapsed:.1}s",
            medians[0], medians[1], medians[2]
        ),
    );
}

#[test]
fn criterion_05_constructed_costs_reproduce_the_target_map() {
    let maps: Vec<(&str, fn(f64) -> f64)> = vec![
        ("identity", |b| b),
        ("square", |b| b * b),
        ("atoms", |b| 0.2 + 0.6 * b),
    ];
    let mut worst = f64::NEG_INFINITY;
    for (_, g) in &maps {
        let model = cost_from_map_binary(*g, 1.0).unwrap();
        for seed in [101u64, 102, 103] {
            let mut rng = Streams::new(seed).stream(0);
            let samples: Vec<f64> = (0..100_000)
                .map(|_| model.sample_vector(&mut rng)[1])
                .collect();
            let ks = ks_distance(&samples, g, 0.0, 1.0, 2001);
            worst = worst.max(ks);
        }
    }
    report(
        5,
        "cost construction round trip",
        worst <= 0.01,
        &format!("worst Kolmogorov distance {worst:.4} over 3 maps x 3 seeds"),
    );
}

#[test]
fn criterion_06_sampled_actions_match_choice_probabilities() {
    let n = 100_000usize;
    let mc = 4_000_000usize;
    let mut worst_sigma = f64::NEG_INFINITY;

    let cases: Vec<(CostModel, Vec<f64>)> = vec![
        (CostModel::univariate(|b: f64| b.clamp(0.0, 1.0), 1.0).unwrap(), vec![0.0, 0.42]),
        (
            CostModel::multivariate_gaussian(
                vec![0.0, 0.3, 0.6],
                vec![
                    vec![0.00, 0.00, 0.00],
                    vec![0.00, 0.09, 0.03],
                    vec![0.00, 0.03, 0.16],
                ],
            )
            .unwrap(),
            vec![0.0, 0.5, 0.4],
        ),
        (
            CostModel::multivariate_gaussian(
                vec![0.0, 0.2, 0.4, 0.6],
                vec![
                    vec![0.00, 0.00, 0.00, 0.00],
                    vec![0.00, 0.09, 0.02, 0.01],
                    vec![0.00, 0.02, 0.12, 0.03],
                    vec![0.00, 0.01, 0.03, 0.16],
                ],
            )
            .unwrap(),
            vec![0.0, 0.45, 0.55, 0.5],
        ),
    ];

    for (i, (model, benefits)) in cases.iter().enumerate() {
        let mut rng = Streams::new(1006 + i as u64).stream(0);
        let exact = exact_choice_probabilities(model, benefits, mc, &mut rng).unwrap();
        let actions = sample_actions(model, benefits, n, &mut rng).unwrap();
        let mut freq = vec![0.0; model.action_count()];
        for a in actions {
            freq[a] += 1.0 / n as f64;
        }
        for (a, (&f, &p)) in freq.iter().zip(&exact).enumerate() {
            let se = (p.max(1e-9) * (1.0 - p).max(1e-9) * (1.0 / n as f64 + 1.0 / mc as f64))
                .sqrt();
            let sigmas = (f - p).abs() / se.max(1e-12);
            worst_sigma = worst_sigma.max(sigmas);
            assert!(
                sigmas <= 3.0,
                "action {a} of case {i}: frequency {f:.5} vs probability {p:.5} ({sigmas:.2} SE)"
            );
        }
    }
    report(
        6,
        "action frequencies vs choice probabilities",
        worst_sigma <= 3.0,
        &format!("worst deviation {worst_sigma:.2} binomial SE for 2-4 actions"),
    );
}

#[test]
fn criterion_07_sequential_design_reduces_efficiency_loss() {
    let start = Instant::now();
    let costs = [
        ("uniform", CostCdf::Uniform),
        ("square", CostCdf::Power { exponent: 2.0 }),
        ("probit", CostCdf::ProbitNormal { mu: 0.5, sigma: 0.2 }),
    ];
    let mut all_pass = true;
    let mut details = Vec::new();
    for (name, cost) in costs {
        let market = MarketModel::new(4.0, 1.0, 1.0, cost).unwrap();
        let mut config = SequentialDesignConfig::new(64, 6);
        config.mise_replications = 200;
        let mut first = Vec::new();
        let mut last = Vec::new();
        for seed in 0..10 {
            let trace = run_sequential_design(&market, &config, &Streams::new(2000 + seed)).unwrap();
            first.push(trace.episodes[0].rel);
            last.push(trace.episodes[5].rel);
        }
        let m_first = median(&mut first);
        let m_last = median(&mut last);
        let ok = m_last < m_first && m_last < 0.15;
        all_pass &= ok;
        details.push(format!("{name} {m_first:.3}->{m_last:.3}"));
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        7,
        "sequential design efficiency trend",
        all_pass && elapsed < 300.0,
        &format!("median REL {} in {elapsed:.0}s", details.join(", ")),
    );
}

#[test]
fn criterion_08_regret_grows_at_the_isotonic_exponent() {
    let start = Instant::now();
    let market = MarketModel::new(4.0, 1.0, 1.0, CostCdf::Uniform).unwrap();

    let mut exponents: Vec<f64> = (0..10)
        .map(|seed| {
            let config = RegretConfig::new(8192, 8, EstimatorKind::Isotonic);
            let trace = run_regret_experiment(&market, &config, &Streams::new(3000 + seed)).unwrap();
            fit_growth_exponent(&trace.cumulative_regret(), 0.9)
                .unwrap()
                .expect("isotonic runs accumulate positive regret")
        })
        .collect();
    let m = median(&mut exponents);

    let oracle_config = RegretConfig::new(8192, 8, EstimatorKind::Oracle);
    let oracle = run_regret_experiment(&market, &oracle_config, &Streams::new(3100)).unwrap();
    let mut prev = 0.0;
    let mut oracle_clean = true;
    for d in &oracle.deployments {
        if d.phase == Phase::Exploit && d.regret_cum != prev {
            oracle_clean = false;
        }
        prev = d.regret_cum;
    }

    let elapsed = start.elapsed().as_secs_f64();
    report(
        8,
        "regret growth exponent",
        (0.55..=0.95).contains(&m) && oracle_clean && elapsed < 600.0,
        &format!(
            "median exponent {m:.3} (target 0.75), oracle exploitation regret zero: {oracle_clean}, {elapsed:.0}s"
        ),
    );
}

#[test]
fn criterion_10_parametric_fits_are_exact_on_noiseless_data() {
    let (mu, sigma) = (0.3, 1.7);
    let mut worst = f64::NEG_INFINITY;
    for family in [ParametricFamily::Probit, ParametricFamily::Logit] {
        let obs: Vec<(f64, f64)> = (0..21)
            .map(|i| {
                let b = -2.0 + 5.0 * i as f64 / 20.0;
                (b, family.cdf((b - mu) / sigma))
            })
            .collect();
        let fit = fit_parametric(&obs, family).unwrap();
        worst = worst.max((fit.mu - mu).abs());
        worst = worst.max((fit.sigma.unwrap() - sigma).abs());
    }
    let degenerate = fit_parametric(&[(0.0, 0.8), (1.0, 0.2)], ParametricFamily::Probit)
        .unwrap()
        .is_degenerate();
    report(
        10,
        "parametric exactness and degenerate branch",
        worst <= 1e-9 && degenerate,
        &format!("worst parameter error {worst:.2e}, degenerate branch {degenerate}"),
    );
}
