//! Parametric location-scale estimation of the choice CDF.
//!
//! For binary choice the probability of switching at gap `b` is `F((b -
//! mu) / sigma)` when the cost law lies in a location-scale family with
//! standard CDF `F`. Mapping observed proportions through the quantile
//! function `F^{-1}` turns that into a line in `b`, so the fit is ordinary
//! least squares on the quantile scale. A nonpositive slope cannot be
//! inverted into a scale and yields a degenerate fit that only supports
//! step-function evaluation.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

const PROPORTION_CLIP: f64 = 1e-6;
const PROPORTION_SLACK: f64 = 1e-9;

/// Location-scale family for the switching-cost law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParametricFamily {
    Probit,
    Logit,
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

fn normal_pdf(x: f64) -> f64 {
    (-(x * x) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn probit_quantile(p: f64) -> f64 {
    let n = standard_normal();
    let mut x = n.inverse_cdf(p);
    // Two Newton corrections sharpen the library quantile to full precision.
    for _ in 0..2 {
        let d = normal_pdf(x);
        if d > 0.0 {
            x -= (n.cdf(x) - p) / d;
        }
    }
    x
}

impl ParametricFamily {
    /// Standard CDF of the family.
    pub fn cdf(&self, z: f64) -> f64 {
        match self {
            ParametricFamily::Probit => standard_normal().cdf(z),
            ParametricFamily::Logit => 1.0 / (1.0 + (-z).exp()),
        }
    }

    /// Standard quantile function; `p` must lie strictly inside `(0, 1)`.
    pub fn quantile(&self, p: f64) -> f64 {
        match self {
            ParametricFamily::Probit => probit_quantile(p),
            ParametricFamily::Logit => (p / (1.0 - p)).ln(),
        }
    }
}

/// Fitted location-scale model; `sigma` is absent when the quantile-scale
/// slope was nonpositive and no valid scale exists.
#[derive(Debug, Clone, Serialize)]
pub struct ParametricFit {
    pub family: ParametricFamily,
    pub mu: f64,
    pub sigma: Option<f64>,
}

impl ParametricFit {
    pub fn is_degenerate(&self) -> bool {
        self.sigma.is_none()
    }

    /// Predicted switching probability at gap `b`.
    pub fn predict(&self, b: f64) -> Result<f64> {
        if !b.is_finite() {
            return Err(Error::InvalidArgument(format!("gap {b} is not finite")));
        }
        match self.sigma {
            Some(s) => Ok(self.family.cdf((b - self.mu) / s)),
            None => Err(Error::DegenerateModel),
        }
    }

    /// Prediction that tolerates a degenerate fit by falling back to a unit
    /// step at the fitted location.
    pub fn predict_or_step(&self, b: f64) -> f64 {
        match self.sigma {
            Some(s) => self.family.cdf((b - self.mu) / s),
            None => {
                if b >= self.mu {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// Least-squares fit of `(mu, sigma)` from binary observations
/// `(b_m, pi_m)` on the quantile scale.
///
/// Proportions are clipped into `[1e-6, 1 - 1e-6]` before the quantile
/// transform. The slope of `F^{-1}(pi)` on `b` estimates `1 / sigma`; a
/// nonpositive (or undefined) slope produces a degenerate fit located at
/// the mean gap.
pub fn fit_parametric(
    observations: &[(f64, f64)],
    family: ParametricFamily,
) -> Result<ParametricFit> {
    if observations.is_empty() {
        return Err(Error::InvalidArgument("no observations to fit".into()));
    }
    let mut bs = Vec::with_capacity(observations.len());
    let mut phis = Vec::with_capacity(observations.len());
    for &(b, pi) in observations {
        if !b.is_finite() {
            return Err(Error::InvalidArgument(format!("gap {b} is not finite")));
        }
        if !pi.is_finite() || pi < -PROPORTION_SLACK || pi > 1.0 + PROPORTION_SLACK {
            return Err(Error::Range(format!("proportion {pi} outside [0, 1]")));
        }
        bs.push(b);
        phis.push(family.quantile(pi.clamp(PROPORTION_CLIP, 1.0 - PROPORTION_CLIP)));
    }

    let m = bs.len() as f64;
    let b_bar = bs.iter().sum::<f64>() / m;
    let phi_bar = phis.iter().sum::<f64>() / m;
    let sxx: f64 = bs.iter().map(|b| (b - b_bar) * (b - b_bar)).sum();
    let sxy: f64 = bs
        .iter()
        .zip(&phis)
        .map(|(b, phi)| (b - b_bar) * (phi - phi_bar))
        .sum();

    if sxx <= 0.0 {
        return Ok(ParametricFit { family, mu: b_bar, sigma: None });
    }
    let slope = sxy / sxx;
    if slope <= 0.0 {
        return Ok(ParametricFit { family, mu: b_bar, sigma: None });
    }
    let sigma = 1.0 / slope;
    let mu = b_bar - sigma * phi_bar;
    Ok(ParametricFit { family, mu, sigma: Some(sigma) })
}
