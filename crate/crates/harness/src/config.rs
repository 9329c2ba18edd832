//! Run configuration: a small top-level envelope plus one parameter block
//! per experiment kind, all JSON with unknown keys rejected.

use std::path::PathBuf;

use perfmap::{CostCdf, EstimatorKind, MarketModel};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

/// Top-level run configuration.
///
/// `params` stays untyped here; each experiment parses it into its own
/// parameter block so unknown keys are rejected against the right schema.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    /// Master RNG seed; every stream in the run derives from it.
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub params: Value,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    FitUnivariate,
    FitMultivariate,
    DesignRun,
    RegretRun,
    AppendixC,
}

impl ExperimentKind {
    /// Basename used for this experiment's artifact files.
    pub fn stem(&self) -> &'static str {
        match self {
            ExperimentKind::FitUnivariate => "fit_univariate",
            ExperimentKind::FitMultivariate => "fit_multivariate",
            ExperimentKind::DesignRun => "design_run",
            ExperimentKind::RegretRun => "regret_run",
            ExperimentKind::AppendixC => "appendix_c",
        }
    }
}

/// Parse an experiment's parameter block, using defaults when absent.
pub fn parse_params<T>(params: &Value) -> Result<T>
where
    T: serde::de::DeserializeOwned + Default,
{
    if params.is_null() {
        Ok(T::default())
    } else {
        serde_json::from_value(params.clone()).map_err(|e| Error::Config(format!("params: {e}")))
    }
}

/// Labor-market parameters shared by the univariate experiments.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarketParams {
    pub wage: f64,
    pub delta0: f64,
    pub delta1: f64,
    pub cost: CostCdf,
}

impl Default for MarketParams {
    fn default() -> Self {
        MarketParams { wage: 4.0, delta0: 1.0, delta1: 1.0, cost: CostCdf::Uniform }
    }
}

impl MarketParams {
    pub fn build(&self) -> Result<MarketModel> {
        MarketModel::new(self.wage, self.delta0, self.delta1, self.cost.clone())
            .map_err(|e| Error::Config(format!("market: {e}")))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitUnivariateParams {
    pub market: MarketParams,
    /// Design points drawn uniformly on the incentive range.
    pub design_points: usize,
    /// Agents simulated per design point; `null` observes exact proportions.
    pub per_point_n: Option<u64>,
    pub estimator: EstimatorKind,
}

impl Default for FitUnivariateParams {
    fn default() -> Self {
        FitUnivariateParams {
            market: MarketParams::default(),
            design_points: 100,
            per_point_n: Some(1000),
            estimator: EstimatorKind::Isotonic,
        }
    }
}

impl FitUnivariateParams {
    pub fn validate(&self) -> Result<()> {
        if self.design_points < 2 {
            return Err(Error::Config(format!(
                "design_points: need at least 2, got {}",
                self.design_points
            )));
        }
        if self.per_point_n == Some(0) {
            return Err(Error::Config("per_point_n: must be positive".into()));
        }
        self.market.build().map(|_| ())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitMultivariateParams {
    /// Action count; costs are jointly standard normal.
    pub actions: usize,
    /// Deployed models, each with a fresh benefit vector.
    pub models: usize,
    /// Agents simulated per model.
    pub per_model_n: usize,
    /// Benefit entries are i.i.d. Uniform(benefit_low, benefit_high).
    pub benefit_low: f64,
    pub benefit_high: f64,
    /// Monte Carlo draws behind each exact choice probability.
    pub mc_samples: usize,
}

impl Default for FitMultivariateParams {
    fn default() -> Self {
        FitMultivariateParams {
            actions: 3,
            models: 200,
            per_model_n: 1000,
            benefit_low: -1.0,
            benefit_high: 1.0,
            mc_samples: 200_000,
        }
    }
}

impl FitMultivariateParams {
    pub fn validate(&self) -> Result<()> {
        if !(2..=6).contains(&self.actions) {
            return Err(Error::Config(format!("actions: need 2..=6, got {}", self.actions)));
        }
        if self.models == 0 || self.per_model_n == 0 {
            return Err(Error::Config("models and per_model_n must be positive".into()));
        }
        if !(self.benefit_low < self.benefit_high) {
            return Err(Error::Config(format!(
                "benefit bounds: need benefit_low < benefit_high, got [{}, {}]",
                self.benefit_low, self.benefit_high
            )));
        }
        if self.mc_samples < 1000 {
            return Err(Error::Config(format!(
                "mc_samples: need at least 1000, got {}",
                self.mc_samples
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DesignRunParams {
    pub market: MarketParams,
    pub tau0: u64,
    pub episodes: usize,
    pub per_point_n: Option<u64>,
    pub density_bins: usize,
    pub mise_replications: usize,
    /// Independent repetitions of the whole loop; the CSV reports
    /// per-episode medians across them.
    pub replications: usize,
}

impl Default for DesignRunParams {
    fn default() -> Self {
        DesignRunParams {
            market: MarketParams::default(),
            tau0: 64,
            episodes: 6,
            per_point_n: Some(50),
            density_bins: 64,
            mise_replications: 20,
            replications: 1,
        }
    }
}

impl DesignRunParams {
    pub fn validate(&self) -> Result<()> {
        if self.tau0 < 2 {
            return Err(Error::Config(format!("tau0: need at least 2, got {}", self.tau0)));
        }
        if self.episodes == 0 || self.density_bins == 0 || self.mise_replications == 0 {
            return Err(Error::Config(
                "episodes, density_bins, and mise_replications must be positive".into(),
            ));
        }
        if self.per_point_n == Some(0) {
            return Err(Error::Config("per_point_n: must be positive".into()));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications: must be positive".into()));
        }
        self.market.build().map(|_| ())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegretRunParams {
    pub market: MarketParams,
    pub budget: u64,
    pub tau0: u64,
    /// Exploration exponent; `null` takes the estimator's default.
    pub alpha: Option<f64>,
    pub per_point_n: Option<u64>,
    pub theta_grid_points: usize,
    pub density_bins: usize,
    pub estimator: EstimatorKind,
    pub replications: usize,
    /// Tail fraction of positive-regret deployments behind the fitted
    /// growth exponent.
    pub tail_fraction: f64,
}

impl Default for RegretRunParams {
    fn default() -> Self {
        RegretRunParams {
            market: MarketParams::default(),
            budget: 8192,
            tau0: 8,
            alpha: None,
            per_point_n: Some(50),
            theta_grid_points: 256,
            density_bins: 64,
            estimator: EstimatorKind::Isotonic,
            replications: 1,
            tail_fraction: 0.9,
        }
    }
}

impl RegretRunParams {
    pub fn validate(&self) -> Result<()> {
        if self.tau0 < 2 || self.budget < self.tau0 {
            return Err(Error::Config(format!(
                "schedule: need 2 <= tau0 <= budget, got tau0 {} budget {}",
                self.tau0, self.budget
            )));
        }
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a <= 1.0) {
                return Err(Error::Config(format!("alpha: need (0, 1], got {a}")));
            }
        }
        if self.per_point_n == Some(0) {
            return Err(Error::Config("per_point_n: must be positive".into()));
        }
        if self.theta_grid_points < 2 {
            return Err(Error::Config(format!(
                "theta_grid_points: need at least 2, got {}",
                self.theta_grid_points
            )));
        }
        if self.density_bins == 0 || self.replications == 0 {
            return Err(Error::Config("density_bins and replications must be positive".into()));
        }
        if !(self.tail_fraction > 0.0 && self.tail_fraction <= 1.0) {
            return Err(Error::Config(format!(
                "tail_fraction: need (0, 1], got {}",
                self.tail_fraction
            )));
        }
        self.market.build().map(|_| ())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AppendixCParams {
    /// Action count; the reproduced figures use 4 and 5.
    pub actions: usize,
    /// Deployed models M; error checkpoints sit at multiples of M/10.
    pub models: usize,
    /// Standard deviation of the additive proportion noise.
    pub noise_sd: f64,
    /// Replications sharing benefits and truths, varying only the noise.
    pub replications: usize,
    /// Monte Carlo draws behind each exact choice probability.
    pub mc_samples: usize,
    pub benefit_low: f64,
    pub benefit_high: f64,
}

impl Default for AppendixCParams {
    fn default() -> Self {
        AppendixCParams {
            actions: 4,
            models: 500,
            noise_sd: 0.1,
            replications: 10,
            mc_samples: 200_000,
            benefit_low: -1.0,
            benefit_high: 1.0,
        }
    }
}

impl AppendixCParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.actions == 4 || self.actions == 5) {
            return Err(Error::Config(format!("actions: need 4 or 5, got {}", self.actions)));
        }
        if self.models < 10 {
            return Err(Error::Config(format!("models: need at least 10, got {}", self.models)));
        }
        if !(self.noise_sd >= 0.0) {
            return Err(Error::Config(format!("noise_sd: need >= 0, got {}", self.noise_sd)));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications: must be positive".into()));
        }
        if self.mc_samples < 1000 {
            return Err(Error::Config(format!(
                "mc_samples: need at least 1000, got {}",
                self.mc_samples
            )));
        }
        if !(self.benefit_low < self.benefit_high) {
            return Err(Error::Config(format!(
                "benefit bounds: need benefit_low < benefit_high, got [{}, {}]",
                self.benefit_low, self.benefit_high
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = RunConfig::from_json(r#"{"experiment": "design-run", "seed": 7}"#).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::DesignRun);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.output_dir, PathBuf::from("runs"));
        let params: DesignRunParams = parse_params(&cfg.params).unwrap();
        assert_eq!(params.tau0, 64);
        assert_eq!(params.episodes, 6);
    }

    #[test]
    fn missing_seed_is_a_config_error_naming_the_field() {
        let err = RunConfig::from_json(r#"{"experiment": "design-run"}"#).unwrap_err();
        assert!(err.to_string().contains("seed"), "{err}");
    }

    #[test]
    fn unknown_top_level_key_is_rejected() {
        let err =
            RunConfig::from_json(r#"{"experiment": "design-run", "seed": 1, "sed": 2}"#).unwrap_err();
        assert!(err.to_string().contains("sed"), "{err}");
    }

    #[test]
    fn unknown_params_key_is_rejected() {
        let cfg = RunConfig::from_json(
            r#"{"experiment": "regret-run", "seed": 1, "params": {"budgets": 100}}"#,
        )
        .unwrap();
        let err = parse_params::<RegretRunParams>(&cfg.params).unwrap_err();
        assert!(err.to_string().contains("budgets"), "{err}");
    }

    #[test]
    fn cost_cdf_round_trips_through_json() {
        let cfg = RunConfig::from_json(
            r#"{"experiment": "fit-univariate", "seed": 3,
                "params": {"market": {"cost": {"kind": "probit-normal", "mu": 0.5, "sigma": 0.2}}}}"#,
        )
        .unwrap();
        let params: FitUnivariateParams = parse_params(&cfg.params).unwrap();
        assert_eq!(params.market.cost, CostCdf::ProbitNormal { mu: 0.5, sigma: 0.2 });
        assert_eq!(params.design_points, 100);
    }

    #[test]
    fn out_of_range_parameters_are_rejected() {
        let bad_alpha = RegretRunParams { alpha: Some(1.5), ..RegretRunParams::default() };
        assert!(bad_alpha.validate().is_err());
        let bad_actions = AppendixCParams { actions: 3, ..AppendixCParams::default() };
        assert!(bad_actions.validate().is_err());
        let bad_tau = DesignRunParams { tau0: 1, ..DesignRunParams::default() };
        assert!(bad_tau.validate().is_err());
    }
}
