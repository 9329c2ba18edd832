use std::path::Path;

use perfmap::rng::Streams;
use perfmap::{
    assemble_distribution_map, exact_choice_probabilities, fit_monotone_multivariate,
    BenefitProfile, ContrastMatrix, CostModel, MonotoneFit,
};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::config::AppendixCParams;
use crate::error::Result;
use crate::experiments::replication_streams;
use crate::output::{row, write_csv, write_plot_script};

/// Consistency sweep: cumulative squared estimation error of the fitted
/// choice-probability map against sample size, per replication.
///
/// One shared pool of benefit draws and exact choice probabilities feeds
/// every replication; replications differ only in the observation noise.
/// Refitting on the first `N` models at each checkpoint keeps successive
/// rows nested, so the error trend reflects estimator convergence alone.
pub fn run(params: &AppendixCParams, seed: u64, out_dir: &Path) -> Result<Vec<String>> {
    let count = params.actions;
    let cost = CostModel::multivariate_gaussian(vec![0.0; count], identity(count))?;
    let streams = replication_streams(seed, 0);

    let mut benefit_rng = streams.stream(1);
    let width = params.benefit_high - params.benefit_low;
    let benefits: Vec<Vec<f64>> = (0..params.models)
        .map(|_| {
            (0..count)
                .map(|_| params.benefit_low + width * benefit_rng.random::<f64>())
                .collect()
        })
        .collect();

    let truths: Vec<Vec<f64>> = (0..params.models)
        .into_par_iter()
        .map(|m| {
            let mut rng = streams.stream(100 + m as u64);
            exact_choice_probabilities(&cost, &benefits[m], params.mc_samples, &mut rng)
        })
        .collect::<perfmap::Result<_>>()?;

    let contrasts: Vec<ContrastMatrix> = (1..count)
        .map(|a| ContrastMatrix::new(a, count))
        .collect::<perfmap::Result<_>>()?;
    let points: Vec<Vec<Vec<f64>>> = contrasts
        .iter()
        .map(|c| benefits.iter().map(|b| c.apply(b)).collect::<perfmap::Result<_>>())
        .collect::<perfmap::Result<_>>()?;

    let checkpoints: Vec<usize> = (1..=10).map(|i| i * params.models / 10).collect();
    let rows: Vec<Vec<String>> = (0..params.replications as u64)
        .into_par_iter()
        .map(|r| replication_rows(params, &streams, r, &benefits, &truths, &points, &checkpoints))
        .collect::<Result<_>>()?;

    let csv = write_csv(
        out_dir,
        "appendix_c.csv",
        "replication,N,cum_error",
        &rows.into_iter().flatten().collect::<Vec<_>>(),
    )?;
    let plot = write_plot_script(
        out_dir,
        "appendix_c.gp",
        "set xlabel 'models N'\nset ylabel 'cumulative squared error'\n\
         plot 'appendix_c.csv' using 2:3 with points\n",
    )?;
    Ok(vec![csv, plot])
}

#[allow(clippy::too_many_arguments)]
fn replication_rows(
    params: &AppendixCParams,
    streams: &Streams,
    replication: u64,
    benefits: &[Vec<f64>],
    truths: &[Vec<f64>],
    points: &[Vec<Vec<f64>>],
    checkpoints: &[usize],
) -> Result<Vec<String>> {
    let count = params.actions;
    let mut noise_rng = streams.stream(5000 + replication);
    // The status quo probability is one minus the rest, so only actions 1..
    // carry independent measurement noise.
    let observed: Vec<Vec<f64>> = truths
        .iter()
        .map(|truth| {
            truth[1..]
                .iter()
                .map(|&p| {
                    let z: f64 = StandardNormal.sample(&mut noise_rng);
                    (p + params.noise_sd * z).clamp(0.0, 1.0)
                })
                .collect()
        })
        .collect();

    let mut rows = Vec::with_capacity(checkpoints.len());
    for &n in checkpoints {
        let weights = vec![1.0; n];
        let fits: Vec<MonotoneFit> = (0..count - 1)
            .map(|j| {
                let y: Vec<f64> = observed[..n].iter().map(|obs| obs[j]).collect();
                fit_monotone_multivariate(&points[j][..n], &y, &weights)
            })
            .collect::<perfmap::Result<_>>()?;
        let map = assemble_distribution_map(
            fits,
            BenefitProfile::new(count, |theta: &[f64]| theta.to_vec())?,
        )?;

        let mut cum_error = 0.0;
        for (truth, benefit) in truths.iter().zip(benefits).take(n) {
            let estimate = map.evaluate_from_benefits(benefit)?;
            cum_error += truth
                .iter()
                .zip(&estimate)
                .map(|(t, e)| (t - e) * (t - e))
                .sum::<f64>();
        }
        rows.push(row(&[replication.to_string(), n.to_string(), cum_error.to_string()]));
    }
    Ok(rows)
}

fn identity(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|i| (0..count).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}
