//! Experiment harness: JSON-configured, seeded runs of the estimation and
//! decision experiments, persisted as CSV tables with gnuplot scripts and a
//! manifest that pins the resolved configuration.

pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::Value;

pub use config::{ExperimentKind, RunConfig};
pub use error::{Error, Result};
pub use manifest::RunManifest;

/// Command-line overrides layered on top of the config file.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub threads: Option<usize>,
}

/// A finished run: where the artifacts landed and the manifest describing them.
#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
}

/// Loads a JSON config file, applies overrides, and executes the run.
pub fn run_from_path(path: &Path, overrides: &Overrides) -> Result<RunOutcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut config = RunConfig::from_json(&text)?;
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    if let Some(out) = &overrides.out {
        config.output_dir = out.clone();
    }
    run(&config, overrides.threads)
}

/// Executes a validated run configuration.
///
/// `threads` bounds the rayon pool for this run only; it affects wall-clock
/// time, never results, because all randomness flows through per-replication
/// derived streams merged in index order.
pub fn run(config: &RunConfig, threads: Option<usize>) -> Result<RunOutcome> {
    match threads {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Run(format!("thread pool: {e}")))?;
            pool.install(|| run_inner(config))
        }
        None => run_inner(config),
    }
}

fn run_inner(config: &RunConfig) -> Result<RunOutcome> {
    let start = Instant::now();
    let out_dir = config.output_dir.clone();
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Error::Run(format!("create {}: {e}", out_dir.display())))?;

    let (artifacts, resolved) = dispatch(config, &out_dir)?;

    // Echo the config with params fully resolved (defaults filled in) so the
    // manifest alone reproduces the run.
    let mut echo = to_value(config)?;
    echo["params"] = resolved;
    let manifest = RunManifest::new(
        config.experiment.stem(),
        config.seed,
        echo,
        artifacts,
        start.elapsed().as_secs_f64(),
    );
    manifest.write(&out_dir)?;
    Ok(RunOutcome { out_dir, manifest })
}

fn dispatch(config: &RunConfig, out_dir: &Path) -> Result<(Vec<String>, Value)> {
    let seed = config.seed;
    match config.experiment {
        ExperimentKind::FitUnivariate => {
            let params: config::FitUnivariateParams = config::parse_params(&config.params)?;
            params.validate()?;
            Ok((experiments::fit_univariate::run(&params, seed, out_dir)?, to_value(&params)?))
        }
        ExperimentKind::FitMultivariate => {
            let params: config::FitMultivariateParams = config::parse_params(&config.params)?;
            params.validate()?;
            Ok((experiments::fit_multivariate::run(&params, seed, out_dir)?, to_value(&params)?))
        }
        ExperimentKind::DesignRun => {
            let params: config::DesignRunParams = config::parse_params(&config.params)?;
            params.validate()?;
            Ok((experiments::design_run::run(&params, seed, out_dir)?, to_value(&params)?))
        }
        ExperimentKind::RegretRun => {
            let params: config::RegretRunParams = config::parse_params(&config.params)?;
            params.validate()?;
            Ok((experiments::regret_run::run(&params, seed, out_dir)?, to_value(&params)?))
        }
        ExperimentKind::AppendixC => {
            let params: config::AppendixCParams = config::parse_params(&config.params)?;
            params.validate()?;
            Ok((experiments::appendix_c::run(&params, seed, out_dir)?, to_value(&params)?))
        }
    }
}

fn to_value<T: serde::Serialize>(value: &T) -> Result<Value> {
    serde_json::to_value(value).map_err(|e| Error::Run(format!("serialize config: {e}")))
}
