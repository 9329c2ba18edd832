use std::path::Path;

use perfmap::{
    assemble_distribution_map, estimate_direct, exact_choice_probabilities,
    fit_monotone_multivariate, sample_actions, BenefitProfile, ContrastMatrix, CostModel,
};
use rand::Rng;
use rayon::prelude::*;

use crate::config::FitMultivariateParams;
use crate::error::{Error, Result};
use crate::experiments::replication_streams;
use crate::output::{row, write_csv, write_plot_script};

/// Fit the full action-distribution map of a Gaussian-cost population from
/// sampled actions across many deployed benefit vectors; emits per-model
/// true and fitted choice probabilities.
///
/// The status quo action costs nothing; the remaining actions have jointly
/// standard normal costs. Benefit vectors play the role of the model
/// parameter, so the assembled map is evaluated directly from them.
pub fn run(params: &FitMultivariateParams, seed: u64, out_dir: &Path) -> Result<Vec<String>> {
    let count = params.actions;
    let mut cov = vec![vec![0.0; count]; count];
    for (a, cov_row) in cov.iter_mut().enumerate().skip(1) {
        cov_row[a] = 1.0;
    }
    let cost = CostModel::multivariate_gaussian(vec![0.0; count], cov)?;
    let streams = replication_streams(seed, 0);

    let mut benefit_rng = streams.stream(1);
    let width = params.benefit_high - params.benefit_low;
    let benefits: Vec<Vec<f64>> = (0..params.models)
        .map(|_| {
            (0..count).map(|_| params.benefit_low + width * benefit_rng.random::<f64>()).collect()
        })
        .collect();

    let truths: Vec<Vec<f64>> = benefits
        .par_iter()
        .enumerate()
        .map(|(m, b)| {
            let mut rng = streams.stream(100 + m as u64);
            exact_choice_probabilities(&cost, b, params.mc_samples, &mut rng)
        })
        .collect::<perfmap::Result<_>>()?;

    let mut sample_rng = streams.stream(2);
    let observed: Vec<Vec<f64>> = benefits
        .iter()
        .map(|b| {
            let actions = sample_actions(&cost, b, params.per_model_n, &mut sample_rng)?;
            estimate_direct(&actions, count)
        })
        .collect::<perfmap::Result<_>>()?;

    let contrasts: Vec<ContrastMatrix> = (1..count)
        .map(|a| ContrastMatrix::new(a, count))
        .collect::<perfmap::Result<_>>()?;
    let weights = vec![params.per_model_n as f64; params.models];
    let fits = contrasts
        .iter()
        .zip(1..count)
        .map(|(contrast, a)| {
            let points: Vec<Vec<f64>> =
                benefits.iter().map(|b| contrast.apply(b)).collect::<perfmap::Result<_>>()?;
            let y: Vec<f64> = observed.iter().map(|pi| pi[a]).collect();
            fit_monotone_multivariate(&points, &y, &weights)
        })
        .collect::<perfmap::Result<Vec<_>>>()?;
    let profile = BenefitProfile::new(count, |theta: &[f64]| theta.to_vec())
        .map_err(|e| Error::Run(e.to_string()))?;
    let estimate = assemble_distribution_map(fits, profile)?;

    let mut rows = Vec::with_capacity(params.models * count);
    for (m, b) in benefits.iter().enumerate() {
        let fitted = estimate.evaluate_from_benefits(b)?;
        for a in 0..count {
            rows.push(row(&[
                m.to_string(),
                a.to_string(),
                truths[m][a].to_string(),
                fitted[a].to_string(),
            ]));
        }
    }

    let csv = write_csv(out_dir, "fit_multivariate.csv", "m,action,pi_true,pi_hat", &rows)?;
    let plot = write_plot_script(
        out_dir,
        "fit_multivariate.gp",
        "set xlabel 'pi_true'\nset ylabel 'pi_hat'\nset size square\n\
         plot 'fit_multivariate.csv' using 3:4 with points pointtype 7 pointsize 0.3, x with lines\n",
    )?;
    Ok(vec![csv, plot])
}
