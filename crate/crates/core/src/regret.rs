//! Performative-risk minimization with explore/exploit episodes.
//!
//! Deployments are split into doubling episodes. Each episode spends a
//! sublinear exploration budget on thresholds drawn through the current
//! design density, refits the cost CDF from the observed switching
//! proportions, and exploits the plug-in risk minimizer for the remainder.
//! Regret is accounted against the best fixed threshold on the evaluation
//! grid, and the realized growth exponent is read off the cumulative-regret
//! curve.

use serde::{Deserialize, Serialize};

use crate::design::{optimal_density, sigma_from_cdf, DesignDensity};
use crate::error::{Error, Result};
use crate::market::{CostCdf, MarketModel};
use crate::monotone::{fit_cdf_univariate, DistributionMap, MonotoneFit};
use crate::parametric::{fit_parametric, ParametricFamily, ParametricFit};
use crate::rng::Streams;

const POWER_ROUND_TOL: f64 = 1e-9;
const PLUGIN_BOUND_SLACK: f64 = 1e-9;

/// Exploration/exploitation lengths of one episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EpisodeLengths {
    pub total: u64,
    pub explore: u64,
    pub exploit: u64,
}

/// Doubling episode schedule under a deployment budget.
#[derive(Debug, Clone, Serialize)]
pub struct EpisodeSchedule {
    pub tau0: u64,
    pub budget: u64,
    pub alpha: f64,
    pub episodes: Vec<EpisodeLengths>,
}

fn exploration_length(total: u64, alpha: f64) -> u64 {
    let raw = (total as f64).powf(alpha);
    let nearest = raw.round();
    // Integer powers land exactly despite powf noise; everything else
    // rounds up.
    let len = if (raw - nearest).abs() <= POWER_ROUND_TOL {
        nearest as u64
    } else {
        raw.ceil() as u64
    };
    len.clamp(1, total)
}

/// Episode lengths `tau0 * 2^(k-1)` covering at most `budget` deployments,
/// each exploring for `min(total, ceil(total^alpha))` of them.
pub fn episode_schedule(budget: u64, tau0: u64, alpha: f64) -> Result<EpisodeSchedule> {
    if tau0 < 2 {
        return Err(Error::InvalidArgument(format!(
            "first episode length {tau0} must be at least 2"
        )));
    }
    if budget < tau0 {
        return Err(Error::InvalidArgument(format!(
            "budget {budget} cannot fit the first episode of length {tau0}"
        )));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "exploration exponent {alpha} outside (0, 1]"
        )));
    }
    let mut episodes = Vec::new();
    let mut used = 0u64;
    let mut length = tau0;
    while used + length <= budget {
        let explore = exploration_length(length, alpha);
        episodes.push(EpisodeLengths { total: length, explore, exploit: length - explore });
        used += length;
        length *= 2;
    }
    Ok(EpisodeSchedule { tau0, budget, alpha, episodes })
}

/// CDF estimator deployed inside the regret loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    Isotonic,
    ParametricProbit,
    ParametricLogit,
    /// Uses the true cost CDF; a control that isolates exploration regret.
    Oracle,
}

impl EstimatorKind {
    /// Exploration exponent `1/(1 + eta)` minimizing total regret for the
    /// estimator's convergence rate `eta`.
    pub fn default_alpha(&self) -> f64 {
        match self {
            // Isotonic rate eta = 1/3; parametric rate eta = 1/2.
            EstimatorKind::Isotonic | EstimatorKind::Oracle => 0.75,
            EstimatorKind::ParametricProbit | EstimatorKind::ParametricLogit => 2.0 / 3.0,
        }
    }
}

/// A fitted (or oracle) switching-cost CDF.
#[derive(Debug, Clone)]
pub enum FittedCdf {
    Isotonic(MonotoneFit),
    Parametric(ParametricFit),
    Oracle(CostCdf),
}

impl FittedCdf {
    /// Estimated switching probability at gap `b`.
    pub fn evaluate(&self, b: f64) -> f64 {
        match self {
            FittedCdf::Isotonic(fit) => fit.evaluate_scalar(b),
            FittedCdf::Parametric(fit) => fit.predict_or_step(b),
            FittedCdf::Oracle(cdf) => cdf.evaluate(b),
        }
    }
}

/// Binary distribution map induced by a fitted CDF through a market's
/// incentive curve: the skilled share at `theta` is the CDF at the
/// incentive.
pub struct MapFromCdf<'a> {
    market: &'a MarketModel,
    cdf: &'a FittedCdf,
}

impl<'a> MapFromCdf<'a> {
    pub fn new(market: &'a MarketModel, cdf: &'a FittedCdf) -> Self {
        MapFromCdf { market, cdf }
    }
}

impl DistributionMap for MapFromCdf<'_> {
    fn action_count(&self) -> usize {
        2
    }

    fn evaluate(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let pi = self.cdf.evaluate(self.market.incentive(theta[0])).clamp(0.0, 1.0);
        Ok(vec![1.0 - pi, pi])
    }
}

/// The exact distribution map of a market; [`estimated_pr`] through it
/// reproduces the true risk bit for bit.
pub struct MarketMap<'a>(pub &'a MarketModel);

impl DistributionMap for MarketMap<'_> {
    fn action_count(&self) -> usize {
        2
    }

    fn evaluate(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let pi = self.0.skilled_proportion(theta[0]);
        Ok(vec![1.0 - pi, pi])
    }
}

/// Plug-in risk curve and its grid minimizer.
///
/// The estimated risk at `theta` mixes the per-action expected losses by
/// the estimated action distribution; ties go to the smallest grid point.
pub fn estimated_pr<M: DistributionMap + ?Sized>(
    map: &M,
    loss_expectations: impl Fn(f64) -> Vec<f64>,
    theta_grid: &[f64],
) -> Result<(f64, Vec<f64>)> {
    if theta_grid.is_empty() {
        return Err(Error::InvalidArgument("empty threshold grid".into()));
    }
    let mut values = Vec::with_capacity(theta_grid.len());
    let mut best: Option<(f64, f64)> = None;
    for &theta in theta_grid {
        let probs = map.evaluate(&[theta])?;
        let losses = loss_expectations(theta);
        if losses.len() != probs.len() {
            return Err(Error::Shape(format!(
                "{} loss expectations for {} actions",
                losses.len(),
                probs.len()
            )));
        }
        let pr: f64 = probs.iter().zip(losses.iter()).map(|(p, l)| p * l).sum();
        values.push(pr);
        if best.map_or(true, |(_, v)| pr < v) {
            best = Some((theta, pr));
        }
    }
    Ok((best.expect("nonempty grid").0, values))
}

/// Configuration of a regret experiment.
#[derive(Debug, Clone, Serialize)]
pub struct RegretConfig {
    /// Total deployment budget.
    pub budget: u64,
    /// First-episode length.
    pub tau0: u64,
    /// Exploration exponent; `None` takes the estimator's default.
    pub alpha: Option<f64>,
    /// Agents simulated per deployment; `None` observes exact proportions.
    pub per_point_n: Option<u64>,
    /// Evaluation grid size on `[0, 1]`.
    pub theta_grid_points: usize,
    pub estimator: EstimatorKind,
    /// Bins of the exploration densities.
    pub density_bins: usize,
}

impl RegretConfig {
    pub fn new(budget: u64, tau0: u64, estimator: EstimatorKind) -> Self {
        RegretConfig {
            budget,
            tau0,
            alpha: None,
            per_point_n: Some(50),
            theta_grid_points: 256,
            estimator,
            density_bins: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Explore,
    Exploit,
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Phase::Explore => write!(f, "explore"),
            Phase::Exploit => write!(f, "exploit"),
        }
    }
}

/// One deployment of the loop.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DeploymentRecord {
    pub m: u64,
    pub episode: usize,
    pub phase: Phase,
    /// Incentive induced by the deployed threshold.
    pub b: f64,
    pub theta: f64,
    /// True performative risk of the deployment.
    pub pr: f64,
    pub regret_cum: f64,
}

/// Per-episode exploitation diagnostics, including both sides of the
/// plug-in risk bound `|PR - PR_hat|(theta_hat) <= L1(D, D_hat) * sup|E|`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EpisodeDiagnostic {
    pub episode: usize,
    pub theta_hat: f64,
    pub estimated_pr: f64,
    pub true_pr: f64,
    pub plugin_gap: f64,
    pub plugin_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegretTrace {
    pub deployments: Vec<DeploymentRecord>,
    pub diagnostics: Vec<EpisodeDiagnostic>,
    pub theta_star: f64,
    pub pr_star: f64,
}

impl RegretTrace {
    pub fn cumulative_regret(&self) -> Vec<f64> {
        self.deployments.iter().map(|d| d.regret_cum).collect()
    }
}

const EXPLORE_STREAM_BASE: u64 = 500;
const RESAMPLE_LIMIT: usize = 100;

/// Explore/exploit regret loop against a market.
///
/// Exploration thresholds come from inverting incentives drawn through the
/// current design density and snap to the evaluation grid, so every regret
/// increment compares grid points and stays nonnegative exactly.
/// Exploitation repeats the plug-in minimizer of the episode's refit. The
/// plug-in bound is checked every episode and recorded in the diagnostics.
pub fn run_regret_experiment(
    market: &MarketModel,
    config: &RegretConfig,
    streams: &Streams,
) -> Result<RegretTrace> {
    if config.theta_grid_points < 2 {
        return Err(Error::InvalidArgument("threshold grid needs at least 2 points".into()));
    }
    if config.density_bins == 0 {
        return Err(Error::InvalidArgument("density bins must be positive".into()));
    }
    if let Some(n) = config.per_point_n {
        if n == 0 {
            return Err(Error::InvalidArgument("per-point sample size must be positive".into()));
        }
    }
    let alpha = config.alpha.unwrap_or_else(|| config.estimator.default_alpha());
    let schedule = episode_schedule(config.budget, config.tau0, alpha)?;

    let grid_n = config.theta_grid_points;
    let grid: Vec<f64> = (0..grid_n)
        .map(|i| i as f64 / (grid_n - 1) as f64)
        .collect();
    let (theta_star, pr_star) = market.true_optimum(&grid)?;

    let curve = market.incentive_curve();
    let b_max = curve.range_max();
    let edges: Vec<f64> = (0..=config.density_bins)
        .map(|i| b_max * i as f64 / config.density_bins as f64)
        .collect();
    let sup_loss: f64 = grid
        .iter()
        .flat_map(|&t| market.loss_expectations(t))
        .map(f64::abs)
        .fold(0.0, f64::max);

    let snap = |theta: f64| {
        let idx = (theta * (grid_n - 1) as f64).round() as usize;
        grid[idx.min(grid_n - 1)]
    };

    let mut density = DesignDensity::uniform(0.0, b_max)?;
    let mut deployments = Vec::with_capacity(schedule.episodes.iter().map(|e| e.total as usize).sum());
    let mut diagnostics = Vec::with_capacity(schedule.episodes.len());
    let mut regret_cum = 0.0;
    let mut m = 0u64;

    for (k, lengths) in schedule.episodes.iter().enumerate() {
        let episode = k + 1;
        let mut rng = streams.stream(EXPLORE_STREAM_BASE + episode as u64);
        let mut obs = Vec::with_capacity(lengths.explore as usize);

        for _ in 0..lengths.explore {
            let mut theta = None;
            for _ in 0..RESAMPLE_LIMIT {
                let b = density.sample(&mut rng);
                match curve.invert_smallest(b) {
                    Ok(t) => {
                        theta = Some(snap(t));
                        break;
                    }
                    Err(_) => continue,
                }
            }
            let theta = theta.ok_or_else(|| {
                Error::Numerical("could not draw an invertible incentive".into())
            })?;
            let b = market.incentive(theta);
            match config.per_point_n {
                Some(n) => {
                    let samples = market.simulate(theta, n as usize, &mut rng);
                    let hits = samples.iter().filter(|s| s.action == 1).count();
                    obs.push((b, hits as f64 / n as f64, n as f64));
                }
                None => obs.push((b, market.skilled_proportion(theta), 1.0)),
            }
            let pr = market.performative_risk(theta);
            m += 1;
            regret_cum += pr - pr_star;
            deployments.push(DeploymentRecord {
                m,
                episode,
                phase: Phase::Explore,
                b,
                theta,
                pr,
                regret_cum,
            });
        }

        let fitted = match config.estimator {
            EstimatorKind::Isotonic => FittedCdf::Isotonic(fit_cdf_univariate(&obs)?),
            EstimatorKind::ParametricProbit => {
                let pairs: Vec<(f64, f64)> = obs.iter().map(|&(b, p, _)| (b, p)).collect();
                FittedCdf::Parametric(fit_parametric(&pairs, ParametricFamily::Probit)?)
            }
            EstimatorKind::ParametricLogit => {
                let pairs: Vec<(f64, f64)> = obs.iter().map(|&(b, p, _)| (b, p)).collect();
                FittedCdf::Parametric(fit_parametric(&pairs, ParametricFamily::Logit)?)
            }
            EstimatorKind::Oracle => FittedCdf::Oracle(market.cost_cdf().clone()),
        };

        let map = MapFromCdf::new(market, &fitted);
        let (theta_hat, pr_values) =
            estimated_pr(&map, |t| market.loss_expectations(t).to_vec(), &grid)?;
        let hat_idx = grid
            .iter()
            .position(|t| *t == theta_hat)
            .expect("minimizer comes from the grid");
        let estimated = pr_values[hat_idx];
        let true_pr = market.performative_risk(theta_hat);

        let d_hat = map.evaluate(&[theta_hat])?;
        let pi_true = market.skilled_proportion(theta_hat);
        let l1 = (d_hat[0] - (1.0 - pi_true)).abs() + (d_hat[1] - pi_true).abs();
        let plugin_gap = (true_pr - estimated).abs();
        let plugin_bound = l1 * sup_loss;
        if plugin_gap > plugin_bound + PLUGIN_BOUND_SLACK {
            return Err(Error::Numerical(format!(
                "plug-in gap {plugin_gap} exceeds its bound {plugin_bound} in episode {episode}"
            )));
        }
        diagnostics.push(EpisodeDiagnostic {
            episode,
            theta_hat,
            estimated_pr: estimated,
            true_pr,
            plugin_gap,
            plugin_bound,
        });

        let b_hat = market.incentive(theta_hat);
        for _ in 0..lengths.exploit {
            m += 1;
            regret_cum += true_pr - pr_star;
            deployments.push(DeploymentRecord {
                m,
                episode,
                phase: Phase::Exploit,
                b: b_hat,
                theta: theta_hat,
                pr: true_pr,
                regret_cum,
            });
        }

        density = optimal_density(&edges, &sigma_from_cdf(|b| fitted.evaluate(b), &edges))?;
    }

    Ok(RegretTrace { deployments, diagnostics, theta_star, pr_star })
}

/// Least-squares slope of `log(cumulative regret)` against `log(m)` over
/// the last `tail_fraction` of deployments with positive regret.
///
/// Returns `None` when fewer than two such deployments exist (an oracle
/// run with zero regret, for instance).
pub fn fit_growth_exponent(regret_cum: &[f64], tail_fraction: f64) -> Result<Option<f64>> {
    if regret_cum.len() < 16 {
        return Err(Error::InvalidArgument(format!(
            "need at least 16 deployments, got {}",
            regret_cum.len()
        )));
    }
    if !(tail_fraction > 0.0 && tail_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "tail fraction {tail_fraction} outside (0, 1]"
        )));
    }
    let positive: Vec<(f64, f64)> = regret_cum
        .iter()
        .enumerate()
        .filter(|(_, r)| **r > 0.0)
        .map(|(i, r)| (((i + 1) as f64).ln(), r.ln()))
        .collect();
    if positive.len() < 2 {
        return Ok(None);
    }
    let start = positive.len() - ((positive.len() as f64 * tail_fraction).ceil() as usize)
        .clamp(2, positive.len());
    let tail = &positive[start..];
    let n = tail.len() as f64;
    let x_bar = tail.iter().map(|(x, _)| x).sum::<f64>() / n;
    let y_bar = tail.iter().map(|(_, y)| y).sum::<f64>() / n;
    let sxx: f64 = tail.iter().map(|(x, _)| (x - x_bar) * (x - x_bar)).sum();
    if sxx == 0.0 {
        return Ok(None);
    }
    let sxy: f64 = tail.iter().map(|(x, y)| (x - x_bar) * (y - y_bar)).sum();
    Ok(Some(sxy / sxx))
}
