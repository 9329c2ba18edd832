//! Strategic action choice.
//!
//! Each agent observes a benefit vector over a finite action set, draws a
//! private cost vector, and plays the action maximizing benefit minus cost.
//! The induced action distribution depends on benefits only through pairwise
//! gaps, which contrast matrices extract. Cost models cover the degenerate
//! zero-cost population, a binary population specified by any nondecreasing
//! cost CDF (realized by its generalized inverse), and correlated Gaussian
//! costs over larger action sets.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Finite action set `{0, 1, .., count-1}`; action 0 is the status quo.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionSpace {
    count: usize,
}

impl ActionSpace {
    pub fn new(count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidArgument(format!(
                "action space needs at least 2 actions, got {count}"
            )));
        }
        Ok(ActionSpace { count })
    }

    pub fn count(&self) -> usize {
        self.count
    }
}

/// Contrast matrix of a reference action: row `a'` maps a benefit vector `B`
/// to the gap `B[a] - B[a']`.
///
/// Shape is `(count-1) x count`; rows are indexed by the competing actions
/// `a' != a` in ascending order. Entry `(u, v)` is `+1` if `v = a`, `-1` if
/// `v = u`'s action label, `0` otherwise, so every row sums to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ContrastMatrix {
    action: usize,
    count: usize,
    rows: Vec<Vec<f64>>,
}

impl ContrastMatrix {
    pub fn new(action: usize, count: usize) -> Result<Self> {
        let space = ActionSpace::new(count)?;
        if action >= space.count() {
            return Err(Error::InvalidArgument(format!(
                "action {action} outside space of {count} actions"
            )));
        }
        let mut rows = Vec::with_capacity(count - 1);
        for other in (0..count).filter(|&o| o != action) {
            let mut row = vec![0.0; count];
            row[action] = 1.0;
            row[other] = -1.0;
            rows.push(row);
        }
        Ok(ContrastMatrix { action, count, rows })
    }

    pub fn action(&self) -> usize {
        self.action
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Competing action labels in row order.
    pub fn row_actions(&self) -> Vec<usize> {
        (0..self.count).filter(|&o| o != self.action).collect()
    }

    /// Gap vector `L_a B`, one entry per competing action.
    pub fn apply(&self, benefits: &[f64]) -> Result<Vec<f64>> {
        if benefits.len() != self.count {
            return Err(Error::InvalidArgument(format!(
                "benefit vector has length {}, expected {}",
                benefits.len(),
                self.count
            )));
        }
        Ok(self
            .rows
            .iter()
            .map(|row| row.iter().zip(benefits).map(|(l, b)| l * b).sum())
            .collect())
    }
}

/// Benefit map of a deployed parameter: `theta -> (B_0(theta), ..)`, with an
/// optional inverse from a scalar action-1 gap back to a parameter achieving
/// it (available for binary populations with invertible incentive).
#[derive(Clone)]
pub struct BenefitProfile {
    count: usize,
    eval: Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
    inverse: Option<Arc<dyn Fn(f64) -> Result<Vec<f64>> + Send + Sync>>,
}

impl BenefitProfile {
    pub fn new<F>(count: usize, eval: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
    {
        ActionSpace::new(count)?;
        Ok(BenefitProfile { count, eval: Arc::new(eval), inverse: None })
    }

    pub fn with_inverse<G>(mut self, inverse: G) -> Self
    where
        G: Fn(f64) -> Result<Vec<f64>> + Send + Sync + 'static,
    {
        self.inverse = Some(Arc::new(inverse));
        self
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn evaluate(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let benefits = (self.eval)(theta);
        if benefits.len() != self.count {
            return Err(Error::Shape(format!(
                "benefit profile returned {} values for {} actions",
                benefits.len(),
                self.count
            )));
        }
        if benefits.iter().any(|b| !b.is_finite()) {
            return Err(Error::Numerical("benefit profile returned a non-finite value".into()));
        }
        Ok(benefits)
    }

    pub fn has_inverse(&self) -> bool {
        self.inverse.is_some()
    }

    /// Parameter achieving action-1 gap `b`.
    pub fn invert(&self, b: f64) -> Result<Vec<f64>> {
        match &self.inverse {
            Some(inv) => inv(b),
            None => Err(Error::InvalidArgument("benefit profile has no inverse".into())),
        }
    }
}

impl fmt::Debug for BenefitProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenefitProfile")
            .field("count", &self.count)
            .field("has_inverse", &self.inverse.is_some())
            .finish()
    }
}

type CdfFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

const CDF_VALIDATION_POINTS: usize = 1025;
const MONOTONE_SLACK: f64 = 1e-12;

/// Gaussian cost vector `C ~ N(mean, cov)`; the factor is precomputed so one
/// draw is a matrix-vector product.
#[derive(Clone)]
pub struct GaussianCost {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
    factor: Vec<f64>,
}

impl GaussianCost {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &[Vec<f64>] {
        &self.cov
    }
}

/// Population cost distribution over the action set.
///
/// Kinds with two actions keep `C_0 = 0`; their action-1 cost is pinned down
/// by a nondecreasing CDF on `[0, b_max]`, with mass `1 - cdf(b_max)` placed
/// at infinity (agents the incentive can never move).
#[derive(Clone)]
pub enum CostModel {
    /// Every agent has zero cost for every action.
    DegenerateZero { count: usize },
    /// Binary population with a named action-1 cost CDF.
    UnivariateCdf { cdf: CdfFn, b_max: f64 },
    /// Cost vector drawn from a multivariate Gaussian.
    MultivariateGaussian(GaussianCost),
    /// Binary population built from a choice-probability map via its
    /// generalized inverse `C_1 = sup { b : g(b) <= U }`.
    GeneralizedInverse { cdf: CdfFn, b_max: f64 },
}

impl fmt::Debug for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostModel::DegenerateZero { count } => {
                f.debug_struct("DegenerateZero").field("count", count).finish()
            }
            CostModel::UnivariateCdf { b_max, .. } => {
                f.debug_struct("UnivariateCdf").field("b_max", b_max).finish()
            }
            CostModel::MultivariateGaussian(g) => {
                f.debug_struct("MultivariateGaussian").field("dim", &g.dim()).finish()
            }
            CostModel::GeneralizedInverse { b_max, .. } => {
                f.debug_struct("GeneralizedInverse").field("b_max", b_max).finish()
            }
        }
    }
}

fn validate_cdf(cdf: &CdfFn, b_max: f64) -> Result<()> {
    if !(b_max > 0.0) || !b_max.is_finite() {
        return Err(Error::InvalidArgument(format!("cdf domain end must be positive, got {b_max}")));
    }
    let mut prev = f64::NEG_INFINITY;
    for i in 0..CDF_VALIDATION_POINTS {
        let b = b_max * i as f64 / (CDF_VALIDATION_POINTS - 1) as f64;
        let v = cdf(b);
        if !v.is_finite() || v < -1e-9 || v > 1.0 + 1e-9 {
            return Err(Error::Shape(format!("cdf value {v} at {b} outside [0, 1]")));
        }
        if v < prev - MONOTONE_SLACK {
            return Err(Error::Shape(format!(
                "cdf decreases near {b}: {v} after {prev}"
            )));
        }
        prev = prev.max(v);
    }
    Ok(())
}

impl CostModel {
    pub fn degenerate_zero(count: usize) -> Result<Self> {
        ActionSpace::new(count)?;
        Ok(CostModel::DegenerateZero { count })
    }

    /// Binary cost model with `C_0 = 0` and `P(C_1 <= b) = cdf(b)` on `[0, b_max]`.
    pub fn univariate<F>(cdf: F, b_max: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let cdf: CdfFn = Arc::new(cdf);
        validate_cdf(&cdf, b_max)?;
        Ok(CostModel::UnivariateCdf { cdf, b_max })
    }

    pub fn multivariate_gaussian(mean: Vec<f64>, cov: Vec<Vec<f64>>) -> Result<Self> {
        let n = mean.len();
        ActionSpace::new(n)?;
        if cov.len() != n || cov.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument(format!("covariance must be {n} x {n}")));
        }
        let scale = cov
            .iter()
            .flat_map(|row| row.iter())
            .fold(1.0_f64, |acc, v| acc.max(v.abs()));
        for i in 0..n {
            for j in 0..i {
                if (cov[i][j] - cov[j][i]).abs() > 1e-9 * scale {
                    return Err(Error::Model(format!("covariance not symmetric at ({i}, {j})")));
                }
            }
        }
        let m = DMatrix::from_fn(n, n, |i, j| 0.5 * (cov[i][j] + cov[j][i]));
        let eig = SymmetricEigen::new(m);
        let min_eig = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -1e-9 * scale {
            return Err(Error::Model(format!(
                "covariance not positive semidefinite: eigenvalue {min_eig:.3e}"
            )));
        }
        let sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| l.max(0.0).sqrt()));
        let factor_mat = &eig.eigenvectors * sqrt;
        let mut factor = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                factor[i * n + j] = factor_mat[(i, j)];
            }
        }
        Ok(CostModel::MultivariateGaussian(GaussianCost { mean, cov, factor }))
    }

    pub fn action_count(&self) -> usize {
        match self {
            CostModel::DegenerateZero { count } => *count,
            CostModel::UnivariateCdf { .. } | CostModel::GeneralizedInverse { .. } => 2,
            CostModel::MultivariateGaussian(g) => g.dim(),
        }
    }

    /// `P(C_1 <= b)` for the binary kinds; `None` otherwise.
    pub fn action1_cdf(&self, b: f64) -> Option<f64> {
        match self {
            CostModel::UnivariateCdf { cdf, b_max }
            | CostModel::GeneralizedInverse { cdf, b_max } => Some(if b < 0.0 {
                0.0
            } else {
                cdf(b.min(*b_max)).clamp(0.0, 1.0)
            }),
            _ => None,
        }
    }

    /// One cost vector; entries can be `+inf` for unaffordable actions.
    pub fn sample_vector<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        match self {
            CostModel::DegenerateZero { count } => vec![0.0; *count],
            CostModel::UnivariateCdf { cdf, b_max }
            | CostModel::GeneralizedInverse { cdf, b_max } => {
                let u: f64 = rng.random();
                vec![0.0, generalized_inverse_draw(cdf, *b_max, u)]
            }
            CostModel::MultivariateGaussian(g) => {
                let n = g.dim();
                let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let mut c = g.mean.clone();
                for i in 0..n {
                    let row = &g.factor[i * n..(i + 1) * n];
                    c[i] += row.iter().zip(&z).map(|(f, zk)| f * zk).sum::<f64>();
                }
                c
            }
        }
    }
}

/// `sup { b in [0, b_max] : cdf(b) <= u }`, with the sub-`cdf(0)` mass as an
/// atom at zero and the above-`cdf(b_max)` mass at infinity.
fn generalized_inverse_draw(cdf: &CdfFn, b_max: f64, u: f64) -> f64 {
    if u < cdf(0.0) {
        return 0.0;
    }
    if u > cdf(b_max) {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (0.0_f64, b_max);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) <= u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Binary cost model realizing a target choice-probability map: the returned
/// population plays action 1 against gap `b` with probability `g(b)`.
///
/// `g` must be nondecreasing from `[0, b_max]` into `[0, 1]`; `g(0)` becomes
/// an atom of costless movers and `1 - g(b_max)` the immovable remainder.
pub fn cost_from_map_binary<F>(g: F, b_max: f64) -> Result<CostModel>
where
    F: Fn(f64) -> f64 + Send + Sync + 'static,
{
    let cdf: CdfFn = Arc::new(g);
    validate_cdf(&cdf, b_max)?;
    Ok(CostModel::GeneralizedInverse { cdf, b_max })
}

fn best_response(benefits: &[f64], costs: &[f64]) -> usize {
    // Ties go to the smallest action index, so the status quo wins a dead heat.
    let mut best = 0usize;
    let mut best_val = benefits[0] - costs[0];
    for a in 1..benefits.len() {
        let v = benefits[a] - costs[a];
        if v > best_val {
            best = a;
            best_val = v;
        }
    }
    best
}

/// Actions of `n` independent agents facing `benefits` under `cost`.
pub fn sample_actions<R: Rng + ?Sized>(
    cost: &CostModel,
    benefits: &[f64],
    n: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if benefits.len() != cost.action_count() {
        return Err(Error::InvalidArgument(format!(
            "benefit vector has length {}, cost model has {} actions",
            benefits.len(),
            cost.action_count()
        )));
    }
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let costs = cost.sample_vector(rng);
        out.push(best_response(benefits, &costs));
    }
    Ok(out)
}

/// Choice-probability vector `D(benefits)` under `cost`.
///
/// Analytic for the zero-cost population and for two-action models (cost-CDF
/// kinds and Gaussians); otherwise estimated from `mc_samples` best-response
/// draws. The output sums to one.
pub fn exact_choice_probabilities<R: Rng + ?Sized>(
    cost: &CostModel,
    benefits: &[f64],
    mc_samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let count = cost.action_count();
    if benefits.len() != count {
        return Err(Error::InvalidArgument(format!(
            "benefit vector has length {}, cost model has {count} actions",
            benefits.len()
        )));
    }
    match cost {
        CostModel::DegenerateZero { .. } => {
            let costs = vec![0.0; count];
            let mut probs = vec![0.0; count];
            probs[best_response(benefits, &costs)] = 1.0;
            Ok(probs)
        }
        CostModel::UnivariateCdf { .. } | CostModel::GeneralizedInverse { .. } => {
            let p1 = cost
                .action1_cdf(benefits[1] - benefits[0])
                .expect("binary kind has an action-1 cdf");
            Ok(vec![1.0 - p1, p1])
        }
        CostModel::MultivariateGaussian(g) if count == 2 => {
            let gap = benefits[1] - benefits[0];
            let mean_diff = g.mean[1] - g.mean[0];
            let var = g.cov[0][0] + g.cov[1][1] - 2.0 * g.cov[0][1];
            let p1 = if var > 0.0 {
                let normal = Normal::new(0.0, 1.0).expect("standard normal");
                normal.cdf((gap - mean_diff) / var.sqrt())
            } else if mean_diff < gap {
                1.0
            } else {
                0.0
            };
            Ok(vec![1.0 - p1, p1])
        }
        CostModel::MultivariateGaussian(_) => {
            if mc_samples == 0 {
                return Err(Error::InvalidArgument(
                    "Monte Carlo evaluation needs mc_samples > 0".into(),
                ));
            }
            let mut counts = vec![0u64; count];
            for _ in 0..mc_samples {
                let costs = cost.sample_vector(rng);
                counts[best_response(benefits, &costs)] += 1;
            }
            Ok(counts.iter().map(|&c| c as f64 / mc_samples as f64).collect())
        }
    }
}
