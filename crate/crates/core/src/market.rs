//! Binary screening market.
//!
//! A firm pays `wage` to applicants whose score exceeds a deployed threshold.
//! Unskilled scores have CDF `theta^k_u`, skilled scores `theta^k_s` with
//! `k_s > k_u`, so skill shifts scores upward. An agent's incentive to become
//! skilled is the wage times the gain in passing probability; the population
//! skilled share is the cost CDF evaluated at that incentive. The firm's risk
//! charges `delta0` per passing unskilled agent and rewards `delta1` per
//! passing skilled agent, giving a closed-form performative risk over the
//! threshold.

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

const INVERSION_TOL: f64 = 1e-10;

/// Closed-form nondecreasing cost CDF on `[0, inf)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CostCdf {
    /// `F(x) = min(x, 1)`: costs uniform on `[0, 1]`.
    Uniform,
    /// `F(x) = min(x, 1)^exponent`.
    Power { exponent: f64 },
    /// `F(x) = Phi((x - mu) / sigma)`.
    ProbitNormal { mu: f64, sigma: f64 },
    /// `F(x) = 1 / (1 + exp(-(x - mu) / sigma))`.
    Logistic { mu: f64, sigma: f64 },
}

impl CostCdf {
    pub fn validate(&self) -> Result<()> {
        match self {
            CostCdf::Uniform => Ok(()),
            CostCdf::Power { exponent } if *exponent > 0.0 => Ok(()),
            CostCdf::Power { exponent } => Err(Error::InvalidArgument(format!(
                "power cost CDF needs a positive exponent, got {exponent}"
            ))),
            CostCdf::ProbitNormal { sigma, .. } | CostCdf::Logistic { sigma, .. }
                if *sigma > 0.0 =>
            {
                Ok(())
            }
            CostCdf::ProbitNormal { sigma, .. } | CostCdf::Logistic { sigma, .. } => Err(
                Error::InvalidArgument(format!("cost CDF scale must be positive, got {sigma}")),
            ),
        }
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        match self {
            CostCdf::Uniform => x.clamp(0.0, 1.0),
            CostCdf::Power { exponent } => x.clamp(0.0, 1.0).powf(*exponent),
            CostCdf::ProbitNormal { mu, sigma } => {
                let normal = Normal::new(0.0, 1.0).expect("standard normal");
                normal.cdf((x - mu) / sigma)
            }
            CostCdf::Logistic { mu, sigma } => 1.0 / (1.0 + (-(x - mu) / sigma).exp()),
        }
    }
}

/// One observed applicant: realized score and the action taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketSample {
    pub score: f64,
    pub action: usize,
}

/// Market primitives; thresholds and scores live on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct MarketModel {
    wage: f64,
    delta0: f64,
    delta1: f64,
    unskilled_exponent: f64,
    skilled_exponent: f64,
    cost: CostCdf,
}

impl MarketModel {
    /// Market with the default score families (unskilled uniform, skilled
    /// with CDF `theta^2`).
    pub fn new(wage: f64, delta0: f64, delta1: f64, cost: CostCdf) -> Result<Self> {
        MarketModel::with_score_exponents(wage, delta0, delta1, cost, 1.0, 2.0)
    }

    pub fn with_score_exponents(
        wage: f64,
        delta0: f64,
        delta1: f64,
        cost: CostCdf,
        unskilled_exponent: f64,
        skilled_exponent: f64,
    ) -> Result<Self> {
        if !(wage > 0.0) || !wage.is_finite() {
            return Err(Error::InvalidArgument(format!("wage must be positive, got {wage}")));
        }
        if !(delta0 > 0.0) || !(delta1 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "loss weights must be positive, got ({delta0}, {delta1})"
            )));
        }
        if !(unskilled_exponent >= 1.0) || !(skilled_exponent > unskilled_exponent) {
            return Err(Error::InvalidArgument(format!(
                "score exponents need 1 <= unskilled < skilled, got ({unskilled_exponent}, {skilled_exponent})"
            )));
        }
        cost.validate()?;
        Ok(MarketModel {
            wage,
            delta0,
            delta1,
            unskilled_exponent,
            skilled_exponent,
            cost,
        })
    }

    pub fn wage(&self) -> f64 {
        self.wage
    }

    pub fn delta0(&self) -> f64 {
        self.delta0
    }

    pub fn delta1(&self) -> f64 {
        self.delta1
    }

    pub fn cost_cdf(&self) -> &CostCdf {
        &self.cost
    }

    /// `P(X > theta | unskilled) = 1 - theta^k_u`.
    pub fn survival_unskilled(&self, theta: f64) -> f64 {
        1.0 - theta.clamp(0.0, 1.0).powf(self.unskilled_exponent)
    }

    /// `P(X > theta | skilled) = 1 - theta^k_s`.
    pub fn survival_skilled(&self, theta: f64) -> f64 {
        1.0 - theta.clamp(0.0, 1.0).powf(self.skilled_exponent)
    }

    /// Wage gain from skill at threshold `theta`:
    /// `I(theta) = wage * (survival_skilled - survival_unskilled)`.
    pub fn incentive(&self, theta: f64) -> f64 {
        let t = theta.clamp(0.0, 1.0);
        self.wage * (t.powf(self.unskilled_exponent) - t.powf(self.skilled_exponent))
    }

    /// Equilibrium skilled share `pi(theta) = F_C(I(theta))`.
    pub fn skilled_proportion(&self, theta: f64) -> f64 {
        self.cost.evaluate(self.incentive(theta))
    }

    /// Expected loss per applicant conditional on each action:
    /// `E[l | unskilled] = delta0 * survival_unskilled` and
    /// `E[l | skilled] = -delta1 * survival_skilled`.
    pub fn loss_expectations(&self, theta: f64) -> [f64; 2] {
        [
            self.delta0 * self.survival_unskilled(theta),
            -self.delta1 * self.survival_skilled(theta),
        ]
    }

    /// Population risk of deploying `theta`, mixing the per-action expected
    /// losses by the equilibrium action distribution.
    pub fn performative_risk(&self, theta: f64) -> f64 {
        let pi = self.skilled_proportion(theta);
        let probs = [1.0 - pi, pi];
        let losses = self.loss_expectations(theta);
        probs.iter().zip(losses.iter()).map(|(p, l)| p * l).sum()
    }

    /// Realized loss of one applicant at threshold `theta`.
    pub fn loss(&self, theta: f64, sample: MarketSample) -> f64 {
        if sample.score > theta {
            if sample.action == 1 {
                -self.delta1
            } else {
                self.delta0
            }
        } else {
            0.0
        }
    }

    pub fn incentive_curve(&self) -> IncentiveCurve {
        let ku = self.unskilled_exponent;
        let ks = self.skilled_exponent;
        let theta_peak = (ku / ks).powf(1.0 / (ks - ku));
        let range_max = self.wage * (theta_peak.powf(ku) - theta_peak.powf(ks));
        IncentiveCurve {
            wage: self.wage,
            unskilled_exponent: ku,
            skilled_exponent: ks,
            theta_peak,
            range_max,
        }
    }

    /// Smallest threshold with incentive `b`, to `|I(theta) - b| <= 1e-10`.
    pub fn threshold_for_incentive(&self, b: f64) -> Result<f64> {
        self.incentive_curve().invert_smallest(b)
    }

    /// Scores and actions of `n` independent applicants at threshold `theta`.
    pub fn simulate<R: Rng + ?Sized>(
        &self,
        theta: f64,
        n: usize,
        rng: &mut R,
    ) -> Vec<MarketSample> {
        let pi = self.skilled_proportion(theta);
        (0..n)
            .map(|_| {
                let skilled = rng.random::<f64>() < pi;
                let exponent = if skilled {
                    self.skilled_exponent
                } else {
                    self.unskilled_exponent
                };
                let score = rng.random::<f64>().powf(1.0 / exponent);
                MarketSample { score, action: usize::from(skilled) }
            })
            .collect()
    }

    /// Grid minimizer of the performative risk; ties go to the smallest
    /// threshold.
    pub fn true_optimum(&self, theta_grid: &[f64]) -> Result<(f64, f64)> {
        if theta_grid.is_empty() {
            return Err(Error::InvalidArgument("empty threshold grid".into()));
        }
        let mut best: Option<(f64, f64)> = None;
        for &theta in theta_grid {
            if !(0.0..=1.0).contains(&theta) {
                return Err(Error::Range(format!("threshold {theta} outside [0, 1]")));
            }
            let pr = self.performative_risk(theta);
            let replace = match best {
                None => true,
                Some((t, p)) => pr < p || (pr == p && theta < t),
            };
            if replace {
                best = Some((theta, pr));
            }
        }
        Ok(best.expect("nonempty grid"))
    }
}

/// Incentive as a function of the threshold: rises from zero to `range_max`
/// at `theta_peak`, then falls back to zero at one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncentiveCurve {
    wage: f64,
    unskilled_exponent: f64,
    skilled_exponent: f64,
    theta_peak: f64,
    range_max: f64,
}

impl IncentiveCurve {
    pub fn evaluate(&self, theta: f64) -> f64 {
        let t = theta.clamp(0.0, 1.0);
        self.wage * (t.powf(self.unskilled_exponent) - t.powf(self.skilled_exponent))
    }

    pub fn theta_peak(&self) -> f64 {
        self.theta_peak
    }

    pub fn range_max(&self) -> f64 {
        self.range_max
    }

    /// Smallest `theta` with `evaluate(theta) = b`, found by bisection on the
    /// rising branch `[0, theta_peak]`.
    pub fn invert_smallest(&self, b: f64) -> Result<f64> {
        if !b.is_finite() || b < 0.0 || b > self.range_max + 1e-12 {
            return Err(Error::Range(format!(
                "incentive {b} outside attainable range [0, {}]",
                self.range_max
            )));
        }
        let b = b.min(self.range_max);
        if b == 0.0 {
            return Ok(0.0);
        }
        let (mut lo, mut hi) = (0.0_f64, self.theta_peak);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let v = self.evaluate(mid);
            if (v - b).abs() <= INVERSION_TOL {
                return Ok(mid);
            }
            if v < b {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::Numerical(format!(
            "incentive inversion did not reach {INVERSION_TOL:.0e} for b = {b}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Streams;

    fn unit_market(cost: CostCdf) -> MarketModel {
        MarketModel::new(1.0, 1.0, 1.0, cost).unwrap()
    }

    #[test]
    fn incentive_at_default_scores() {
        let m = unit_market(CostCdf::Uniform);
        assert!((m.incentive(0.5) - 0.25).abs() < 1e-15);
        assert_eq!(m.incentive(0.0), 0.0);
        assert_eq!(m.incentive(1.0), 0.0);
    }

    #[test]
    fn skilled_survival_dominates() {
        let m = unit_market(CostCdf::Uniform);
        for i in 0..=100 {
            let t = i as f64 / 100.0;
            assert!(m.survival_skilled(t) >= m.survival_unskilled(t) - 1e-15);
        }
        assert_eq!(m.survival_skilled(0.0), 1.0);
        assert_eq!(m.survival_skilled(1.0), 0.0);
    }

    #[test]
    fn skilled_proportion_under_quadratic_cost() {
        let m = unit_market(CostCdf::Power { exponent: 2.0 });
        assert!((m.skilled_proportion(0.5) - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn skilled_proportion_is_monotone_in_incentive() {
        let m = MarketModel::new(4.0, 1.0, 1.0, CostCdf::ProbitNormal { mu: 0.5, sigma: 0.2 })
            .unwrap();
        let mut pairs: Vec<(f64, f64)> = (0..=200)
            .map(|i| {
                let t = i as f64 / 200.0;
                (m.incentive(t), m.skilled_proportion(t))
            })
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in pairs.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-12);
        }
    }

    #[test]
    fn performative_risk_at_midpoint() {
        let m = unit_market(CostCdf::Uniform);
        // pi = 0.25, survivals (0.5, 0.75).
        assert!((m.performative_risk(0.5) - 0.1875).abs() < 1e-15);
        assert!((m.performative_risk(0.0) - 1.0).abs() < 1e-15);
        assert_eq!(m.performative_risk(1.0), 0.0);
    }

    #[test]
    fn optimum_on_coarse_grid() {
        let m = unit_market(CostCdf::Uniform);
        let (theta, value) = m.true_optimum(&[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(theta, 1.0);
        assert_eq!(value, 0.0);
    }

    #[test]
    fn optimum_breaks_ties_toward_small_thresholds() {
        let m = unit_market(CostCdf::Uniform);
        let (theta, _) = m.true_optimum(&[1.0, 1.0, 0.5]).unwrap();
        assert_eq!(theta, 1.0);
    }

    #[test]
    fn incentive_curve_peak_and_range() {
        let m = MarketModel::new(4.0, 1.0, 1.0, CostCdf::Uniform).unwrap();
        let curve = m.incentive_curve();
        assert!((curve.theta_peak() - 0.5).abs() < 1e-15);
        assert!((curve.range_max() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn threshold_inversion_hits_tolerance() {
        let m = MarketModel::new(4.0, 1.0, 1.0, CostCdf::Uniform).unwrap();
        let theta = m.threshold_for_incentive(1.0).unwrap();
        assert!((theta - 0.5).abs() < 1e-5);
        assert!((m.incentive(theta) - 1.0).abs() <= 1e-10);
        assert_eq!(m.threshold_for_incentive(0.0).unwrap(), 0.0);
        let theta = m.threshold_for_incentive(0.36).unwrap();
        // Smaller root of 4 t (1 - t) = 0.36 is 0.1.
        assert!((theta - 0.1).abs() < 1e-6);
        assert!(matches!(m.threshold_for_incentive(1.2), Err(Error::Range(_))));
    }

    #[test]
    fn simulated_loss_matches_risk() {
        let m = MarketModel::new(4.0, 1.0, 1.0, CostCdf::Uniform).unwrap();
        let streams = Streams::new(11);
        for (i, &theta) in [0.0, 0.25, 0.5, 0.75, 1.0].iter().enumerate() {
            let samples = m.simulate(theta, 100_000, &mut streams.stream(i as u64));
            let losses: Vec<f64> = samples.iter().map(|&s| m.loss(theta, s)).collect();
            let n = losses.len() as f64;
            let mean = losses.iter().sum::<f64>() / n;
            let var = losses.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0);
            let se = (var / n).sqrt().max(1e-6);
            let pr = m.performative_risk(theta);
            assert!((mean - pr).abs() < 3.0 * se, "theta {theta}: mean {mean} vs pr {pr}");
        }
    }

    #[test]
    fn simulated_scores_follow_the_action_families() {
        let m = MarketModel::new(4.0, 1.0, 1.0, CostCdf::Uniform).unwrap();
        let samples = m.simulate(0.5, 200_000, &mut Streams::new(12).stream(0));
        // At theta = 0.5 under uniform cost every agent is skilled; scores
        // should then follow the CDF t^2.
        assert!(samples.iter().all(|s| s.action == 1));
        let below = samples.iter().filter(|s| s.score <= 0.7).count() as f64;
        assert!((below / 2e5 - 0.49).abs() < 0.01);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(MarketModel::new(0.0, 1.0, 1.0, CostCdf::Uniform).is_err());
        assert!(MarketModel::new(1.0, 0.0, 1.0, CostCdf::Uniform).is_err());
        assert!(CostCdf::Power { exponent: 0.0 }.validate().is_err());
        assert!(CostCdf::ProbitNormal { mu: 0.0, sigma: 0.0 }.validate().is_err());
        assert!(
            MarketModel::with_score_exponents(1.0, 1.0, 1.0, CostCdf::Uniform, 2.0, 2.0).is_err()
        );
    }
}
