use std::path::Path;

use perfmap::{fit_growth_exponent, run_regret_experiment, RegretConfig, RegretTrace};
use rayon::prelude::*;

use crate::config::RegretRunParams;
use crate::error::Result;
use crate::experiments::replication_streams;
use crate::output::{opt_cell, row, write_csv, write_plot_script};

/// Explore/exploit regret loop; emits replication 0's deployment log and
/// the fitted growth exponent of every replication.
pub fn run(params: &RegretRunParams, seed: u64, out_dir: &Path) -> Result<Vec<String>> {
    let market = params.market.build()?;
    let config = RegretConfig {
        budget: params.budget,
        tau0: params.tau0,
        alpha: params.alpha,
        per_point_n: params.per_point_n,
        theta_grid_points: params.theta_grid_points,
        estimator: params.estimator,
        density_bins: params.density_bins,
    };

    let traces: Vec<RegretTrace> = (0..params.replications as u64)
        .into_par_iter()
        .map(|r| run_regret_experiment(&market, &config, &replication_streams(seed, r)))
        .collect::<perfmap::Result<_>>()?;

    let rows: Vec<String> = traces[0]
        .deployments
        .iter()
        .map(|d| {
            row(&[
                d.m.to_string(),
                d.episode.to_string(),
                d.phase.to_string(),
                d.b.to_string(),
                d.theta.to_string(),
                d.pr.to_string(),
                d.regret_cum.to_string(),
            ])
        })
        .collect();
    let csv =
        write_csv(out_dir, "regret_run.csv", "m,episode,phase,b,theta,pr,regret_cum", &rows)?;

    let exponent_rows: Vec<String> = traces
        .iter()
        .enumerate()
        .map(|(r, trace)| {
            let exponent = fit_growth_exponent(&trace.cumulative_regret(), params.tail_fraction)?;
            Ok(row(&[r.to_string(), opt_cell(exponent)]))
        })
        .collect::<Result<_>>()?;
    let exponents =
        write_csv(out_dir, "regret_exponents.csv", "replication,exponent", &exponent_rows)?;

    let plot = write_plot_script(
        out_dir,
        "regret_run.gp",
        "set xlabel 'deployment m'\nset ylabel 'cumulative regret'\nset logscale xy\n\
         plot 'regret_run.csv' using 1:7 with lines\n",
    )?;
    Ok(vec![csv, exponents, plot])
}
