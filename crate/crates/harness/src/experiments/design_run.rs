use std::path::Path;

use perfmap::{run_sequential_design, EpisodeTrace, SequentialDesignConfig};
use rayon::prelude::*;

use crate::config::DesignRunParams;
use crate::error::Result;
use crate::experiments::{median, replication_streams};
use crate::output::{row, write_csv, write_plot_script};

/// Episode-doubling sequential design; emits one row per episode with
/// MISE and REL medians across replications.
pub fn run(params: &DesignRunParams, seed: u64, out_dir: &Path) -> Result<Vec<String>> {
    let market = params.market.build()?;
    let config = SequentialDesignConfig {
        tau0: params.tau0,
        episodes: params.episodes,
        per_point_n: params.per_point_n,
        density_bins: params.density_bins,
        mise_replications: params.mise_replications,
    };

    let traces: Vec<EpisodeTrace> = (0..params.replications as u64)
        .into_par_iter()
        .map(|r| run_sequential_design(&market, &config, &replication_streams(seed, r)))
        .collect::<perfmap::Result<_>>()?;

    let rows: Vec<String> = (0..params.episodes)
        .map(|k| {
            let mut mise: Vec<f64> = traces.iter().map(|t| t.episodes[k].mise).collect();
            let mut mise_dstar: Vec<f64> =
                traces.iter().map(|t| t.episodes[k].mise_dstar).collect();
            let mut rel: Vec<f64> = traces.iter().map(|t| t.episodes[k].rel).collect();
            row(&[
                (k + 1).to_string(),
                traces[0].episodes[k].length.to_string(),
                median(&mut mise).to_string(),
                median(&mut mise_dstar).to_string(),
                median(&mut rel).to_string(),
            ])
        })
        .collect();

    let csv = write_csv(out_dir, "design_run.csv", "episode,length,mise,mise_dstar,rel", &rows)?;
    let plot = write_plot_script(
        out_dir,
        "design_run.gp",
        "set xlabel 'episode'\nset ylabel 'relative efficiency loss'\n\
         plot 'design_run.csv' using 1:5 with linespoints\n",
    )?;
    Ok(vec![csv, plot])
}
