//! Shape-constrained estimation of choice-probability maps.
//!
//! Choice probabilities are nondecreasing in benefit gaps, so estimation is
//! weighted least squares under a monotonicity constraint. In one dimension
//! the pool-adjacent-violators scan solves it exactly. In several dimensions
//! the constraint is coordinatewise dominance; the fit is computed by
//! Dykstra's alternating projections over the transitive reduction of the
//! dominance DAG together with the `[0, 1]` box, then snapped to the exact
//! block solution its active set implies. Under a binomial sampling model
//! these least-squares fits are also the maximum-likelihood fits.
//!
//! Fitted maps extend off the design by the lower envelope: the prediction
//! at `x` is the largest fitted value among dominated design points, zero
//! when none is dominated.

use serde::Serialize;

use crate::action::{BenefitProfile, ContrastMatrix};
use crate::error::{Error, Result};

const DYKSTRA_TOL: f64 = 1e-8;
const DYKSTRA_MAX_SWEEPS: usize = 100_000;
const ACTIVE_EDGE_TOL: f64 = 1e-7;
const FEASIBILITY_TOL: f64 = 1e-9;
const PROPORTION_SLACK: f64 = 1e-9;

/// Weighted isotonic least-squares fit: the unique nondecreasing minimizer
/// of `sum w_i (y_i - f_i)^2` in the input order.
pub fn weighted_pava(y: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    if y.is_empty() || y.len() != w.len() {
        return Err(Error::InvalidArgument(format!(
            "need matching nonempty inputs, got {} values and {} weights",
            y.len(),
            w.len()
        )));
    }
    if let Some(bad) = w.iter().find(|wi| !(**wi > 0.0) || !wi.is_finite()) {
        return Err(Error::InvalidArgument(format!("weights must be positive, got {bad}")));
    }
    if y.iter().any(|yi| !yi.is_finite()) {
        return Err(Error::InvalidArgument("values must be finite".into()));
    }

    // Blocks of pooled values: (mean, weight, length).
    let mut blocks: Vec<(f64, f64, usize)> = Vec::with_capacity(y.len());
    for (&yi, &wi) in y.iter().zip(w) {
        blocks.push((yi, wi, 1));
        while blocks.len() >= 2 {
            let (v2, w2, n2) = blocks[blocks.len() - 1];
            let (v1, w1, n1) = blocks[blocks.len() - 2];
            if v1 <= v2 {
                break;
            }
            blocks.pop();
            blocks.pop();
            let wsum = w1 + w2;
            blocks.push(((v1 * w1 + v2 * w2) / wsum, wsum, n1 + n2));
        }
    }

    let mut out = Vec::with_capacity(y.len());
    for (v, _, n) in blocks {
        out.extend(std::iter::repeat(v).take(n));
    }
    Ok(out)
}

/// A monotone fit on a finite design.
///
/// `design_points` are `dimension`-vectors (sorted ascending when
/// `dimension == 1`, with exact duplicates pooled); `fitted_values` respect
/// dominance between them.
#[derive(Debug, Clone, Serialize)]
pub struct MonotoneFit {
    pub dimension: usize,
    pub design_points: Vec<Vec<f64>>,
    pub fitted_values: Vec<f64>,
    #[serde(skip)]
    pub weights: Vec<f64>,
}

pub(crate) fn dominated(p: &[f64], q: &[f64]) -> bool {
    p.iter().zip(q).all(|(a, b)| a <= b)
}

impl MonotoneFit {
    /// Lower-envelope prediction at `x`: the largest fitted value among
    /// dominated design points, zero when none is dominated.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        if self.dimension == 1 {
            let b = x[0];
            let idx = self.design_points.partition_point(|p| p[0] <= b);
            if idx == 0 {
                0.0
            } else {
                self.fitted_values[idx - 1]
            }
        } else {
            self.design_points
                .iter()
                .zip(&self.fitted_values)
                .filter(|(p, _)| dominated(p, x))
                .map(|(_, &f)| f)
                .fold(0.0, f64::max)
        }
    }

    /// Prediction at a scalar gap; the fit must be univariate.
    pub fn evaluate_scalar(&self, b: f64) -> f64 {
        debug_assert_eq!(self.dimension, 1);
        self.evaluate(&[b])
    }

    pub fn len(&self) -> usize {
        self.design_points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.design_points.is_empty()
    }
}

fn check_proportion(pi: f64) -> Result<f64> {
    if !pi.is_finite() || pi < -PROPORTION_SLACK || pi > 1.0 + PROPORTION_SLACK {
        return Err(Error::Range(format!("proportion {pi} outside [0, 1]")));
    }
    Ok(pi.clamp(0.0, 1.0))
}

/// Isotonic CDF estimate from binary observations `(b_m, pi_m, n_m)`.
///
/// Observations are sorted by gap, exact duplicate gaps are pooled into one
/// design point with weighted-average value and summed weight (the pooled
/// problem has the same minimizer), and the pooled sequence is fit by
/// [`weighted_pava`].
pub fn fit_cdf_univariate(observations: &[(f64, f64, f64)]) -> Result<MonotoneFit> {
    if observations.is_empty() {
        return Err(Error::InvalidArgument("no observations to fit".into()));
    }
    let mut obs: Vec<(f64, f64, f64)> = Vec::with_capacity(observations.len());
    for &(b, pi, n) in observations {
        if !b.is_finite() {
            return Err(Error::InvalidArgument(format!("gap {b} is not finite")));
        }
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidArgument(format!("sample weight {n} must be positive")));
        }
        obs.push((b, check_proportion(pi)?, n));
    }
    obs.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut points: Vec<f64> = Vec::with_capacity(obs.len());
    let mut values: Vec<f64> = Vec::with_capacity(obs.len());
    let mut weights: Vec<f64> = Vec::with_capacity(obs.len());
    for (b, pi, n) in obs {
        if points.last() == Some(&b) {
            let last = points.len() - 1;
            let wsum = weights[last] + n;
            values[last] = (values[last] * weights[last] + pi * n) / wsum;
            weights[last] = wsum;
        } else {
            points.push(b);
            values.push(pi);
            weights.push(n);
        }
    }

    let fitted = weighted_pava(&values, &weights)?;
    Ok(MonotoneFit {
        dimension: 1,
        design_points: points.into_iter().map(|b| vec![b]).collect(),
        fitted_values: fitted,
        weights,
    })
}

/// Edges of the transitive reduction of the dominance DAG on distinct points.
fn dominance_reduction(points: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let n = points.len();
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in 0..n {
            if i != j && dominated(&points[i], &points[j]) {
                succ[i].push(j);
            }
        }
    }
    let mut edges = Vec::new();
    for i in 0..n {
        for &j in &succ[i] {
            let redundant = succ[i]
                .iter()
                .any(|&k| k != j && dominated(&points[k], &points[j]));
            if !redundant {
                edges.push((i, j));
            }
        }
    }
    edges
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, i: usize) -> usize {
        if self.0[i] != i {
            let root = self.find(self.0[i]);
            self.0[i] = root;
        }
        self.0[i]
    }

    fn union(&mut self, i: usize, j: usize) {
        let (ri, rj) = (self.find(i), self.find(j));
        if ri != rj {
            self.0[ri] = rj;
        }
    }
}

fn objective(y: &[f64], w: &[f64], f: &[f64]) -> f64 {
    y.iter()
        .zip(w)
        .zip(f)
        .map(|((yi, wi), fi)| wi * (yi - fi) * (yi - fi))
        .sum()
}

/// Dykstra's alternating projections for the dominance-constrained weighted
/// least-squares problem, followed by an exact block refit on the active set.
fn fit_partial_order(
    points: &[Vec<f64>],
    y: &[f64],
    w: &[f64],
    edges: &[(usize, usize)],
) -> Result<Vec<f64>> {
    let n = y.len();
    let mut x: Vec<f64> = y.to_vec();
    let mut box_corr = vec![0.0; n];
    let mut edge_corr = vec![(0.0, 0.0); edges.len()];
    let mut converged = false;

    for _ in 0..DYKSTRA_MAX_SWEEPS {
        let prev = x.clone();
        for i in 0..n {
            let v = x[i] + box_corr[i];
            let p = v.clamp(0.0, 1.0);
            box_corr[i] = v - p;
            x[i] = p;
        }
        for (e, &(i, j)) in edges.iter().enumerate() {
            let vi = x[i] + edge_corr[e].0;
            let vj = x[j] + edge_corr[e].1;
            let (pi, pj) = if vi <= vj {
                (vi, vj)
            } else {
                let m = (w[i] * vi + w[j] * vj) / (w[i] + w[j]);
                (m, m)
            };
            edge_corr[e] = (vi - pi, vj - pj);
            x[i] = pi;
            x[j] = pj;
        }
        let delta = x
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if delta < DYKSTRA_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "dominance-constrained fit did not converge in {DYKSTRA_MAX_SWEEPS} sweeps"
        )));
    }

    // The optimum is constant on blocks joined by active constraints, with
    // each block at its clipped weighted mean. Pool blocks flagged active by
    // the iterate, then keep pooling across any edge the block means still
    // violate; the result is exactly feasible.
    let mut uf = UnionFind::new(n);
    for &(i, j) in edges {
        if (x[i] - x[j]).abs() <= ACTIVE_EDGE_TOL {
            uf.union(i, j);
        }
    }
    let snapped = loop {
        let mut num = vec![0.0; n];
        let mut den = vec![0.0; n];
        for i in 0..n {
            let r = uf.find(i);
            num[r] += w[i] * y[i];
            den[r] += w[i];
        }
        let vals: Vec<f64> = (0..n)
            .map(|i| {
                let r = uf.find(i);
                (num[r] / den[r]).clamp(0.0, 1.0)
            })
            .collect();
        let mut pooled_more = false;
        for &(i, j) in edges {
            if uf.find(i) != uf.find(j) && vals[i] > vals[j] + FEASIBILITY_TOL {
                uf.union(i, j);
                pooled_more = true;
            }
        }
        if !pooled_more {
            break vals;
        }
    };

    // Fallback repair of the raw iterate: the running max over dominated
    // points is exactly feasible and moves each value by at most the
    // residual violation.
    let mut repaired = x.clone();
    for i in 0..n {
        let m = (0..n)
            .filter(|&j| dominated(&points[j], &points[i]))
            .map(|j| x[j])
            .fold(x[i], f64::max);
        repaired[i] = m.clamp(0.0, 1.0);
    }

    if objective(y, w, &snapped) <= objective(y, w, &repaired) {
        Ok(snapped)
    } else {
        Ok(repaired)
    }
}

/// Coordinatewise-monotone least-squares fit of proportions on a
/// multivariate design, constrained to `[0, 1]`.
///
/// Exact duplicate points are pooled first; a one-dimensional design reduces
/// to [`fit_cdf_univariate`].
pub fn fit_monotone_multivariate(
    points: &[Vec<f64>],
    y: &[f64],
    w: &[f64],
) -> Result<MonotoneFit> {
    if points.is_empty() || points.len() != y.len() || y.len() != w.len() {
        return Err(Error::InvalidArgument(format!(
            "need matching nonempty inputs, got {} points, {} values, {} weights",
            points.len(),
            y.len(),
            w.len()
        )));
    }
    let dim = points[0].len();
    if dim == 0 || points.iter().any(|p| p.len() != dim) {
        return Err(Error::InvalidArgument("design points must share a positive dimension".into()));
    }
    if points.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("design points must be finite".into()));
    }
    if dim == 1 {
        let obs: Vec<(f64, f64, f64)> = points
            .iter()
            .zip(y)
            .zip(w)
            .map(|((p, &yi), &wi)| (p[0], yi, wi))
            .collect();
        return fit_cdf_univariate(&obs);
    }

    let mut pooled_points: Vec<Vec<f64>> = Vec::with_capacity(points.len());
    let mut pooled_y: Vec<f64> = Vec::with_capacity(points.len());
    let mut pooled_w: Vec<f64> = Vec::with_capacity(points.len());
    for ((p, &yi), &wi) in points.iter().zip(y).zip(w) {
        if !(wi > 0.0) || !wi.is_finite() {
            return Err(Error::InvalidArgument(format!("weights must be positive, got {wi}")));
        }
        let yi = check_proportion(yi)?;
        match pooled_points.iter().position(|q| q == p) {
            Some(k) => {
                let wsum = pooled_w[k] + wi;
                pooled_y[k] = (pooled_y[k] * pooled_w[k] + yi * wi) / wsum;
                pooled_w[k] = wsum;
            }
            None => {
                pooled_points.push(p.clone());
                pooled_y.push(yi);
                pooled_w.push(wi);
            }
        }
    }

    let edges = dominance_reduction(&pooled_points);
    let fitted = fit_partial_order(&pooled_points, &pooled_y, &pooled_w, &edges)?;
    Ok(MonotoneFit {
        dimension: dim,
        design_points: pooled_points,
        fitted_values: fitted,
        weights: pooled_w,
    })
}

/// A map from deployed parameters to action distributions.
pub trait DistributionMap {
    fn action_count(&self) -> usize;
    /// Action distribution at `theta`; sums to one.
    fn evaluate(&self, theta: &[f64]) -> Result<Vec<f64>>;
}

/// Estimated action-distribution map assembled from per-action monotone
/// fits; the status-quo probability is the leftover mass.
#[derive(Debug, Clone)]
pub struct DistributionMapEstimate {
    profile: BenefitProfile,
    contrasts: Vec<ContrastMatrix>,
    fits: Vec<MonotoneFit>,
}

/// Joins one fit per nonzero action (ascending) with a benefit profile.
///
/// Each fit must live on gap vectors of dimension `count - 1`, the shape
/// produced by the matching contrast matrix.
pub fn assemble_distribution_map(
    fits: Vec<MonotoneFit>,
    profile: BenefitProfile,
) -> Result<DistributionMapEstimate> {
    let count = profile.count();
    if fits.len() != count - 1 {
        return Err(Error::InvalidArgument(format!(
            "need {} fits for {count} actions, got {}",
            count - 1,
            fits.len()
        )));
    }
    for (a, fit) in fits.iter().enumerate() {
        if fit.dimension != count - 1 {
            return Err(Error::Shape(format!(
                "fit for action {} has dimension {}, expected {}",
                a + 1,
                fit.dimension,
                count - 1
            )));
        }
    }
    let contrasts = (1..count)
        .map(|a| ContrastMatrix::new(a, count).expect("validated count"))
        .collect();
    Ok(DistributionMapEstimate { profile, contrasts, fits })
}

impl DistributionMapEstimate {
    pub fn fits(&self) -> &[MonotoneFit] {
        &self.fits
    }

    pub fn profile(&self) -> &BenefitProfile {
        &self.profile
    }

    /// Action distribution implied by a raw benefit vector.
    ///
    /// Nonzero actions read their fit at the contrast gaps; the status quo
    /// receives the complementary mass, and if the fitted masses already
    /// exceed one they are rescaled onto the simplex instead.
    pub fn evaluate_from_benefits(&self, benefits: &[f64]) -> Result<Vec<f64>> {
        let count = self.profile.count();
        if benefits.len() != count {
            return Err(Error::InvalidArgument(format!(
                "benefit vector has length {}, expected {count}",
                benefits.len()
            )));
        }
        let mut probs = vec![0.0; count];
        for a in 1..count {
            let gaps = self.contrasts[a - 1].apply(benefits)?;
            probs[a] = self.fits[a - 1].evaluate(&gaps).clamp(0.0, 1.0);
        }
        let mass: f64 = probs[1..].iter().sum();
        if mass <= 1.0 {
            probs[0] = 1.0 - mass;
        } else {
            for p in probs.iter_mut().skip(1) {
                *p /= mass;
            }
            probs[0] = 0.0;
        }
        Ok(probs)
    }
}

impl DistributionMap for DistributionMapEstimate {
    fn action_count(&self) -> usize {
        self.profile.count()
    }

    fn evaluate(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let benefits = self.profile.evaluate(theta)?;
        self.evaluate_from_benefits(&benefits)
    }
}
