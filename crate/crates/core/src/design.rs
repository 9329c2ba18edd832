//! Variance-weighted sampling designs for CDF estimation.
//!
//! With binomial observation noise the pointwise standard deviation of an
//! estimated switching probability is `sqrt(F(b)(1 - F(b)))`, so sampling
//! effort is best spent where that noise scale is large. This module builds
//! the matching piecewise-constant design density (with a floor keeping
//! support everywhere), samples from it by inverse CDF, scores designs by
//! Monte Carlo mean integrated squared error, and runs the episode-doubling
//! loop that re-estimates the density from each episode's own fit.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::market::MarketModel;
use crate::monotone::{fit_cdf_univariate, MonotoneFit};
use crate::rng::Streams;

/// Relative density floor: every bin keeps at least this fraction of the
/// peak noise scale so no region becomes unsampleable.
pub const DENSITY_FLOOR: f64 = 0.01;
/// Grid resolution for integrated-squared-error quadrature.
pub const INTEGRATION_POINTS: usize = 512;

/// Piecewise-constant probability density on an interval.
#[derive(Debug, Clone, Serialize)]
pub struct DesignDensity {
    bin_edges: Vec<f64>,
    bin_density: Vec<f64>,
}

fn validate_edges(bin_edges: &[f64]) -> Result<()> {
    if bin_edges.len() < 2 {
        return Err(Error::InvalidArgument("need at least two bin edges".into()));
    }
    if bin_edges.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidArgument("bin edges must be finite".into()));
    }
    if bin_edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("bin edges must be strictly increasing".into()));
    }
    Ok(())
}

impl DesignDensity {
    /// Uniform density on `[lo, hi]`.
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        validate_edges(&[lo, hi])?;
        Ok(DesignDensity { bin_edges: vec![lo, hi], bin_density: vec![1.0 / (hi - lo)] })
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn bin_density(&self) -> &[f64] {
        &self.bin_density
    }

    pub fn support(&self) -> (f64, f64) {
        (self.bin_edges[0], *self.bin_edges.last().expect("nonempty edges"))
    }

    /// Density value at `b`; zero outside the support.
    pub fn pdf(&self, b: f64) -> f64 {
        let (lo, hi) = self.support();
        if b < lo || b > hi {
            return 0.0;
        }
        let idx = self
            .bin_edges
            .partition_point(|e| *e <= b)
            .saturating_sub(1)
            .min(self.bin_density.len() - 1);
        self.bin_density[idx]
    }

    /// Probability mass at or below `b`.
    pub fn cdf(&self, b: f64) -> f64 {
        let (lo, hi) = self.support();
        if b <= lo {
            return 0.0;
        }
        if b >= hi {
            return 1.0;
        }
        let mut acc = 0.0;
        for (w, d) in self.bin_edges.windows(2).zip(&self.bin_density) {
            if b >= w[1] {
                acc += d * (w[1] - w[0]);
            } else {
                acc += d * (b - w[0]);
                break;
            }
        }
        acc
    }

    /// Quantile transform of `u` in `[0, 1)`; exactly uniform within bins.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let mut cum = 0.0;
        for (w, d) in self.bin_edges.windows(2).zip(&self.bin_density) {
            let mass = d * (w[1] - w[0]);
            if u < cum + mass || w[1] >= self.support().1 {
                return (w[0] + (u - cum) / d).clamp(w[0], w[1]);
            }
            cum += mass;
        }
        self.support().1
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.inverse_cdf(rng.random())
    }
}

/// Design density proportional to `max(sigma, floor * max sigma)` per bin,
/// normalized to integrate to one over the edges.
///
/// `sigma` holds one nonnegative noise scale per bin. An all-zero profile
/// falls back to the uniform density on the same bins.
pub fn optimal_density(bin_edges: &[f64], sigma: &[f64]) -> Result<DesignDensity> {
    validate_edges(bin_edges)?;
    if sigma.len() != bin_edges.len() - 1 {
        return Err(Error::Shape(format!(
            "{} sigma values for {} bins",
            sigma.len(),
            bin_edges.len() - 1
        )));
    }
    if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(Error::InvalidArgument("sigma values must be finite and nonnegative".into()));
    }
    let max_sigma = sigma.iter().cloned().fold(0.0, f64::max);
    let (lo, hi) = (bin_edges[0], *bin_edges.last().expect("validated edges"));
    if max_sigma == 0.0 {
        let d = 1.0 / (hi - lo);
        return Ok(DesignDensity {
            bin_edges: bin_edges.to_vec(),
            bin_density: vec![d; sigma.len()],
        });
    }
    let floor = DENSITY_FLOOR * max_sigma;
    let raw: Vec<f64> = sigma.iter().map(|s| s.max(floor)).collect();
    let z: f64 = raw
        .iter()
        .zip(bin_edges.windows(2))
        .map(|(r, w)| r * (w[1] - w[0]))
        .sum();
    Ok(DesignDensity {
        bin_edges: bin_edges.to_vec(),
        bin_density: raw.into_iter().map(|r| r / z).collect(),
    })
}

/// Binomial noise scale `sqrt(F(b)(1 - F(b)))` of a CDF at each bin
/// midpoint.
pub fn sigma_from_cdf(cdf: impl Fn(f64) -> f64, bin_edges: &[f64]) -> Vec<f64> {
    bin_edges
        .windows(2)
        .map(|w| {
            let f = cdf(0.5 * (w[0] + w[1])).clamp(0.0, 1.0);
            (f * (1.0 - f)).sqrt()
        })
        .collect()
}

/// Noise scales implied by a fitted univariate CDF.
pub fn sigma_from_fit(fit: &MonotoneFit, bin_edges: &[f64]) -> Vec<f64> {
    sigma_from_cdf(|b| fit.evaluate_scalar(b), bin_edges)
}

/// Draw `n` points from the density.
pub fn sample_design<R: Rng + ?Sized>(density: &DesignDensity, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| density.sample(rng)).collect()
}

/// Trapezoid quadrature of `(predict - truth)^2` on the standard grid.
pub fn integrated_squared_error(
    predict: impl Fn(f64) -> f64,
    truth: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
) -> f64 {
    let n = INTEGRATION_POINTS;
    let h = (hi - lo) / (n - 1) as f64;
    let mut acc = 0.0;
    for j in 0..n {
        let b = lo + h * j as f64;
        let e = predict(b) - truth(b);
        let term = e * e;
        acc += if j == 0 || j == n - 1 { 0.5 * term } else { term };
    }
    acc * h
}

/// Monte Carlo mean integrated squared error of the isotonic estimator
/// under a design density.
///
/// Each replication draws `points_per_rep` gaps from the density, observes
/// proportions with `Binomial(per_point_n)` noise around `true_cdf`
/// (noiseless when `per_point_n` is `None`), fits the isotonic CDF, and
/// integrates the squared error over the density's support. Replication `r`
/// draws its gaps from stream `stream_base + 2r` and its noise from
/// `stream_base + 2r + 1`; every point consumes exactly one gap draw and
/// `per_point_n` noise draws, so two densities compared at the same base
/// see comonotone point sets and coupled noise (common random numbers).
pub fn mise_monte_carlo(
    true_cdf: &dyn Fn(f64) -> f64,
    density: &DesignDensity,
    per_point_n: Option<u64>,
    points_per_rep: usize,
    replications: usize,
    streams: &Streams,
    stream_base: u64,
) -> Result<f64> {
    if replications == 0 || points_per_rep == 0 {
        return Err(Error::InvalidArgument(
            "need at least one replication and one point per replication".into(),
        ));
    }
    if let Some(n) = per_point_n {
        if n == 0 {
            return Err(Error::InvalidArgument("per-point sample size must be positive".into()));
        }
    }
    let (lo, hi) = density.support();
    let mut total = 0.0;
    for r in 0..replications {
        let mut point_rng = streams.stream(stream_base + 2 * r as u64);
        let mut noise_rng = streams.stream(stream_base + 2 * r as u64 + 1);
        let mut obs = Vec::with_capacity(points_per_rep);
        for _ in 0..points_per_rep {
            let b = density.sample(&mut point_rng);
            let p = true_cdf(b).clamp(0.0, 1.0);
            match per_point_n {
                Some(n) => {
                    let hits = (0..n).filter(|_| noise_rng.random::<f64>() < p).count();
                    obs.push((b, hits as f64 / n as f64, n as f64));
                }
                None => obs.push((b, p, 1.0)),
            }
        }
        let fit = fit_cdf_univariate(&obs)?;
        total += integrated_squared_error(|b| fit.evaluate_scalar(b), &*true_cdf, lo, hi);
    }
    Ok(total / replications as f64)
}

/// Efficiency lost relative to the optimal design: `1 - mise_dstar /
/// mise_d`. Negative values are legitimate sampling noise.
pub fn relative_efficiency(mise_d: f64, mise_dstar: f64) -> Result<f64> {
    if !(mise_d > 0.0) || !(mise_dstar > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "MISE values must be positive, got {mise_d} and {mise_dstar}"
        )));
    }
    Ok(1.0 - mise_dstar / mise_d)
}

/// Configuration of the episode-doubling design loop.
#[derive(Debug, Clone, Serialize)]
pub struct SequentialDesignConfig {
    /// First-episode length; doubles each episode.
    pub tau0: u64,
    /// Number of episodes.
    pub episodes: usize,
    /// Agents simulated per deployed model; `None` observes exact
    /// proportions.
    pub per_point_n: Option<u64>,
    /// Bins of the design densities.
    pub density_bins: usize,
    /// Replications inside each MISE estimate.
    pub mise_replications: usize,
}

impl SequentialDesignConfig {
    pub fn new(tau0: u64, episodes: usize) -> Self {
        SequentialDesignConfig {
            tau0,
            episodes,
            per_point_n: Some(50),
            density_bins: 64,
            mise_replications: 20,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.tau0 < 2 {
            return Err(Error::InvalidArgument(format!(
                "first episode length {} must be at least 2",
                self.tau0
            )));
        }
        if self.episodes == 0 || self.density_bins == 0 || self.mise_replications == 0 {
            return Err(Error::InvalidArgument(
                "episodes, density bins, and MISE replications must be positive".into(),
            ));
        }
        if let Some(n) = self.per_point_n {
            if n == 0 {
                return Err(Error::InvalidArgument("per-point sample size must be positive".into()));
            }
        }
        Ok(())
    }
}

/// One episode of the sequential design loop.
///
/// `mise`, `mise_dstar`, and `rel` grade the episode's density at the
/// final-episode budget with shared random numbers, so the REL column
/// tracks how close the density is to the oracle design rather than how
/// large the episode happened to be.
#[derive(Debug, Clone, Serialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub length: u64,
    pub density: DesignDensity,
    pub fit: MonotoneFit,
    pub mise: f64,
    pub mise_dstar: f64,
    pub rel: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpisodeTrace {
    pub episodes: Vec<EpisodeRecord>,
}

const EPISODE_STREAM_BASE: u64 = 100;
const MISE_STREAM_BASE: u64 = 1_000_000;

/// Episode-doubling sequential design against a market simulator.
///
/// Episode 1 samples gaps uniformly on the incentive range; episode `k`
/// has length `tau0 * 2^(k-1)`, refits the CDF on its own data alone, and
/// the next density follows the refit's noise scales. Every episode's MISE
/// (and the oracle-design MISE driving REL) is estimated against the true
/// cost CDF at the final-episode budget from one shared set of random
/// numbers, so REL differences across episodes and against the oracle
/// design reflect the densities alone.
pub fn run_sequential_design(
    market: &MarketModel,
    config: &SequentialDesignConfig,
    streams: &Streams,
) -> Result<EpisodeTrace> {
    config.validate()?;
    let curve = market.incentive_curve();
    let b_max = curve.range_max();
    let edges: Vec<f64> = (0..=config.density_bins)
        .map(|i| b_max * i as f64 / config.density_bins as f64)
        .collect();
    let true_cdf = |b: f64| market.cost_cdf().evaluate(b);
    let oracle_density = optimal_density(&edges, &sigma_from_cdf(true_cdf, &edges))?;
    let eval_length = (config.tau0 << (config.episodes - 1)) as usize;
    let mise_dstar = mise_monte_carlo(
        &true_cdf,
        &oracle_density,
        config.per_point_n,
        eval_length,
        config.mise_replications,
        streams,
        MISE_STREAM_BASE,
    )?;

    let mut density = DesignDensity::uniform(0.0, b_max)?;
    let mut episodes = Vec::with_capacity(config.episodes);
    for k in 1..=config.episodes {
        let length = config.tau0 << (k - 1);
        let mut rng = streams.stream(EPISODE_STREAM_BASE + k as u64);
        let mut obs = Vec::with_capacity(length as usize);
        for _ in 0..length {
            let b = density.sample(&mut rng);
            match config.per_point_n {
                Some(n) => {
                    let theta = market.threshold_for_incentive(b)?;
                    let samples = market.simulate(theta, n as usize, &mut rng);
                    let hits = samples.iter().filter(|s| s.action == 1).count();
                    obs.push((b, hits as f64 / n as f64, n as f64));
                }
                None => obs.push((b, true_cdf(b), 1.0)),
            }
        }
        let fit = fit_cdf_univariate(&obs)?;

        let mise = mise_monte_carlo(
            &true_cdf,
            &density,
            config.per_point_n,
            eval_length,
            config.mise_replications,
            streams,
            MISE_STREAM_BASE,
        )?;
        let rel = relative_efficiency(mise, mise_dstar)?;

        let next_density = optimal_density(&edges, &sigma_from_fit(&fit, &edges))?;
        episodes.push(EpisodeRecord { episode: k, length, density, fit, mise, mise_dstar, rel });
        density = next_density;
    }
    Ok(EpisodeTrace { episodes })
}
