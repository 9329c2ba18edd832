//! Learning how a deployed decision rule reshapes the population it scores.
//!
//! A population of agents reacts to a published model parameter only through
//! a finite action: each agent plays the action maximizing benefit minus a
//! random cost, so the induced action distribution is a monotone function of
//! benefit gaps. This crate estimates that map from deployment data (shape-
//! constrained least squares in one or several dimensions, or a two-parameter
//! quantile-regression shortcut), allocates future deployments where the map
//! is noisiest, and closes the loop with an explore/exploit schedule whose
//! cumulative regret can be traced and rate-checked.

pub mod action;
pub mod design;
pub mod error;
pub mod market;
pub mod monotone;
pub mod parametric;
pub mod proportions;
pub mod regret;
pub mod rng;

pub use action::{
    cost_from_map_binary, exact_choice_probabilities, sample_actions, ActionSpace, BenefitProfile,
    ContrastMatrix, CostModel,
};
pub use error::{Error, Result};
pub use design::{
    mise_monte_carlo, optimal_density, relative_efficiency, run_sequential_design, sample_design,
    sigma_from_cdf, sigma_from_fit, DesignDensity, EpisodeRecord, EpisodeTrace,
    SequentialDesignConfig,
};
pub use market::{CostCdf, IncentiveCurve, MarketModel, MarketSample};
pub use monotone::{
    assemble_distribution_map, fit_cdf_univariate, fit_monotone_multivariate, weighted_pava,
    DistributionMap, DistributionMapEstimate, MonotoneFit,
};
pub use parametric::{fit_parametric, ParametricFamily, ParametricFit};
pub use proportions::{
    estimate_direct, estimate_moment_matching, smallest_singular_value, ProportionObservation,
};
pub use regret::{
    episode_schedule, estimated_pr, fit_growth_exponent, run_regret_experiment, DeploymentRecord,
    EpisodeDiagnostic, EpisodeSchedule, EstimatorKind, FittedCdf, MapFromCdf, MarketMap, Phase,
    RegretConfig, RegretTrace,
};
pub use rng::Streams;
