//! Action-proportion estimators.
//!
//! A deployment observes either the actions themselves or only proxy
//! moments. With direct observation the estimator is the empirical
//! frequency vector; with proxies the mean moment is pulled back through a
//! known square matrix, guarded against ill-conditioning, then projected
//! onto the simplex by clip-and-renormalize.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Smallest singular value below which the moment matrix is refused.
pub const CONDITION_TOL: f64 = 1e-8;

const SIMPLEX_TOL: f64 = 1e-9;

/// Proportions observed at one deployed benefit vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ProportionObservation {
    /// Benefit vector of the deployment (a single gap for binary markets).
    pub benefit_vector: Vec<f64>,
    /// Estimated action distribution, a point in the simplex.
    pub proportions: Vec<f64>,
    /// Number of agents behind the estimate.
    pub sample_size: u64,
}

impl ProportionObservation {
    pub fn new(benefit_vector: Vec<f64>, proportions: Vec<f64>, sample_size: u64) -> Result<Self> {
        let obs = ProportionObservation { benefit_vector, proportions, sample_size };
        obs.validate()?;
        Ok(obs)
    }

    /// Binary observation: gap `b` and the action-1 share.
    pub fn binary(b: f64, pi1: f64, sample_size: u64) -> Result<Self> {
        ProportionObservation::new(vec![b], vec![1.0 - pi1, pi1], sample_size)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_size == 0 {
            return Err(Error::InvalidArgument("observation needs a positive sample size".into()));
        }
        if self.proportions.len() < 2 {
            return Err(Error::Shape("proportion vector needs at least two entries".into()));
        }
        if self.proportions.iter().any(|p| !(-SIMPLEX_TOL..=1.0 + SIMPLEX_TOL).contains(p)) {
            return Err(Error::Shape(format!("proportions {:?} leave [0, 1]", self.proportions)));
        }
        let sum: f64 = self.proportions.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::Shape(format!("proportions sum to {sum}, expected 1")));
        }
        Ok(())
    }

    /// Share of action 1 in a binary observation.
    pub fn pi1(&self) -> f64 {
        self.proportions[1]
    }

    /// Scalar gap of a binary observation.
    pub fn gap(&self) -> f64 {
        self.benefit_vector[0]
    }
}

/// Empirical action frequencies from directly observed actions.
pub fn estimate_direct(actions: &[usize], count: usize) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 actions, got {count}")));
    }
    if actions.is_empty() {
        return Err(Error::InvalidArgument("empty action sample".into()));
    }
    let mut freq = vec![0.0; count];
    for &a in actions {
        if a >= count {
            return Err(Error::InvalidArgument(format!(
                "action {a} outside space of {count} actions"
            )));
        }
        freq[a] += 1.0;
    }
    let n = actions.len() as f64;
    for f in &mut freq {
        *f /= n;
    }
    Ok(freq)
}

/// Smallest singular value of a square matrix.
pub fn smallest_singular_value(matrix: &[Vec<f64>]) -> Result<f64> {
    let n = matrix.len();
    if n == 0 || matrix.iter().any(|row| row.len() != n) {
        return Err(Error::InvalidArgument("matrix must be square and nonempty".into()));
    }
    let m = DMatrix::from_fn(n, n, |i, j| matrix[i][j]);
    let svd = m.svd(false, false);
    Ok(svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Proportion estimate from proxy moments: solves `delta * pi = mean h(Z)`,
/// then clips to `[0, 1]` and renormalizes onto the simplex.
///
/// Requires the moment matrix to have smallest singular value at least
/// [`CONDITION_TOL`].
pub fn estimate_moment_matching<Z>(
    samples: &[Z],
    h: impl Fn(&Z) -> Vec<f64>,
    delta: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let count = delta.len();
    if count < 2 || delta.iter().any(|row| row.len() != count) {
        return Err(Error::InvalidArgument(format!(
            "moment matrix must be square with side >= 2, got {count} rows"
        )));
    }
    if samples.is_empty() {
        return Err(Error::InvalidArgument("empty proxy sample".into()));
    }
    let mut mean = vec![0.0; count];
    for z in samples {
        let hz = h(z);
        if hz.len() != count {
            return Err(Error::Shape(format!(
                "moment map returned {} values, expected {count}",
                hz.len()
            )));
        }
        for (m, v) in mean.iter_mut().zip(hz) {
            *m += v;
        }
    }
    let n = samples.len() as f64;
    for m in &mut mean {
        *m /= n;
    }

    let m = DMatrix::from_fn(count, count, |i, j| delta[i][j]);
    let svd = m.svd(true, true);
    let sigma_min = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if sigma_min < CONDITION_TOL {
        return Err(Error::IllConditioned { sigma_min, tol: CONDITION_TOL });
    }
    let solved = svd
        .solve(&DVector::from_vec(mean), 0.0)
        .map_err(|e| Error::Numerical(format!("moment system solve failed: {e}")))?;

    let mut pi: Vec<f64> = solved.iter().map(|&p| p.clamp(0.0, 1.0)).collect();
    let total: f64 = pi.iter().sum();
    if total <= 0.0 {
        return Err(Error::Numerical("clipped proportion estimate has zero mass".into()));
    }
    for p in &mut pi {
        *p /= total;
    }
    Ok(pi)
}
