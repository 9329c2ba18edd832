//! Cross-module integration: simulated markets feed the estimators, the
//! estimators feed the decision layer, and the result lands near the truth.

mod common;

use perfmap::{
    assemble_distribution_map, estimate_direct, estimated_pr, exact_choice_probabilities,
    fit_cdf_univariate, fit_monotone_multivariate, sample_actions, BenefitProfile, ContrastMatrix,
    CostCdf, CostModel, FittedCdf, MapFromCdf, MarketMap, MarketModel, Streams,
};
use rand::Rng;

use common::median;

/// Simulated investment outcomes on a b-grid, aggregated to success shares.
fn simulated_shares(
    market: &MarketModel,
    grid: &[f64],
    n: usize,
    streams: &Streams,
) -> Vec<(f64, f64, f64)> {
    grid.iter()
        .enumerate()
        .map(|(i, &b)| {
            let mut rng = streams.stream(i as u64);
            let theta = market.threshold_for_incentive(b).unwrap();
            let samples = market.simulate(theta, n, &mut rng);
            let skilled = samples.iter().filter(|s| s.action == 1).count();
            (b, skilled as f64 / n as f64, n as f64)
        })
        .collect()
}

#[test]
fn simulated_market_to_isotonic_fit_recovers_the_cost_cdf() {
    let market = MarketModel::new(4.0, 1.0, 1.0, CostCdf::Power { exponent: 2.0 }).unwrap();
    let b_max = market.incentive_curve().range_max();
    let grid: Vec<f64> = (0..60).map(|i| b_max * (i as f64 + 0.5) / 60.0).collect();
    let streams = Streams::new(7101);

    let observations = simulated_shares(&market, &grid, 2000, &streams);
    let fit = fit_cdf_univariate(&observations).unwrap();

    let worst = grid
        .iter()
        .map(|&b| (fit.evaluate_scalar(b) - market.cost_cdf().evaluate(b)).abs())
        .fold(0.0, f64::max);
    assert!(worst < 0.05, "sup-norm error {worst} from 2000 samples per point");
}

#[test]
fn fitted_map_minimizer_lands_near_the_true_optimum() {
    for (label, cost) in [
        ("uniform", CostCdf::Uniform),
        ("power", CostCdf::Power { exponent: 2.0 }),
        ("probit", CostCdf::ProbitNormal { mu: 0.5, sigma: 0.25 }),
    ] {
        let market = MarketModel::new(4.0, 1.0, 1.0, cost).unwrap();
        let b_max = market.incentive_curve().range_max();
        let grid: Vec<f64> = (0..80).map(|i| b_max * (i as f64 + 0.5) / 80.0).collect();
        let streams = Streams::new(7103);

        let observations = simulated_shares(&market, &grid, 4000, &streams);
        let cdf = FittedCdf::Isotonic(fit_cdf_univariate(&observations).unwrap());
        let map = MapFromCdf::new(&market, &cdf);

        let theta_grid: Vec<f64> = (0..256).map(|i| i as f64 / 255.0).collect();
        let losses = |theta: f64| market.loss_expectations(theta).to_vec();
        let (theta_hat, _) = estimated_pr(&map, losses, &theta_grid).unwrap();
        let (theta_star, pr_star) = market.true_optimum(&theta_grid).unwrap();

        let excess = market.performative_risk(theta_hat) - pr_star;
        assert!(
            excess >= -1e-12 && excess < 0.02,
            "{label}: deploying the fitted argmin costs {excess} over the optimum \
             (theta_hat {theta_hat}, theta_star {theta_star})"
        );
    }
}

#[test]
fn oracle_map_reproduces_the_true_risk_curve() {
    let market = MarketModel::new(4.0, 1.0, 1.0, CostCdf::Uniform).unwrap();
    let theta_grid: Vec<f64> = (0..64).map(|i| i as f64 / 63.0).collect();
    let losses = |theta: f64| market.loss_expectations(theta).to_vec();
    let (_, curve) = estimated_pr(&MarketMap(&market), losses, &theta_grid).unwrap();
    for (theta, pr) in theta_grid.iter().zip(&curve) {
        assert_eq!(*pr, market.performative_risk(*theta));
    }
}

#[test]
fn sampled_actions_to_assembled_map_tracks_exact_probabilities() {
    let count = 3;
    let models = 60;
    let per_model = 4000;
    let streams = Streams::new(7105);

    let mut cov = vec![vec![0.0; count]; count];
    for (a, row) in cov.iter_mut().enumerate().skip(1) {
        row[a] = 1.0;
    }
    let cost = CostModel::multivariate_gaussian(vec![0.0; count], cov).unwrap();

    let mut benefit_rng = streams.stream(0);
    let benefits: Vec<Vec<f64>> = (0..models)
        .map(|_| (0..count).map(|_| -1.0 + 2.0 * benefit_rng.random::<f64>()).collect())
        .collect();

    let mut observed = Vec::with_capacity(models);
    let mut truths = Vec::with_capacity(models);
    for (m, benefit) in benefits.iter().enumerate() {
        let mut rng = streams.stream(10 + m as u64);
        let actions = sample_actions(&cost, benefit, per_model, &mut rng).unwrap();
        observed.push(estimate_direct(&actions, count).unwrap());
        truths.push(exact_choice_probabilities(&cost, benefit, 100_000, &mut rng).unwrap());
    }

    let weights = vec![per_model as f64; models];
    let fits = (1..count)
        .map(|a| {
            let contrast = ContrastMatrix::new(a, count).unwrap();
            let points: Vec<Vec<f64>> =
                benefits.iter().map(|b| contrast.apply(b).unwrap()).collect();
            let y: Vec<f64> = observed.iter().map(|probs| probs[a]).collect();
            fit_monotone_multivariate(&points, &y, &weights).unwrap()
        })
        .collect();
    let map = assemble_distribution_map(
        fits,
        BenefitProfile::new(count, |theta: &[f64]| theta.to_vec()).unwrap(),
    )
    .unwrap();

    let mut errors: Vec<f64> = benefits
        .iter()
        .zip(&truths)
        .map(|(benefit, truth)| {
            let estimate = map.evaluate_from_benefits(benefit).unwrap();
            truth
                .iter()
                .zip(&estimate)
                .map(|(t, e)| (t - e).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let typical = median(&mut errors);
    assert!(typical < 0.05, "median sup-norm error {typical} across {models} benefit vectors");
}
