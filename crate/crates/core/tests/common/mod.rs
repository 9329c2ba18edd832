//! Brute-force reference implementations backing the acceptance tests.
//!
//! Everything here trades speed for obviousness: dynamic programs over
//! value grids and exhaustive partition enumeration, independent of the
//! algorithms under test.

#![allow(dead_code)]

pub fn weighted_objective(y: &[f64], w: &[f64], f: &[f64]) -> f64 {
    y.iter()
        .zip(w)
        .zip(f)
        .map(|((yi, wi), fi)| wi * (yi - fi) * (yi - fi))
        .sum()
}

/// Minimum weighted squared error over nondecreasing fits with values on
/// the 101-point grid {0, 0.01, ..., 1}.
pub fn grid_isotonic_objective(y: &[f64], w: &[f64]) -> f64 {
    let grid: Vec<f64> = (0..=100).map(|v| v as f64 / 100.0).collect();
    let mut dp: Vec<f64> = grid
        .iter()
        .map(|g| w[0] * (y[0] - g) * (y[0] - g))
        .collect();
    for (yi, wi) in y.iter().zip(w).skip(1) {
        let mut prefix = dp.clone();
        for v in 1..prefix.len() {
            prefix[v] = prefix[v].min(prefix[v - 1]);
        }
        dp = grid
            .iter()
            .zip(&prefix)
            .map(|(g, p)| p + wi * (yi - g) * (yi - g))
            .collect();
    }
    dp.into_iter().fold(f64::INFINITY, f64::min)
}

/// Maximum binomial log-likelihood over nondecreasing fits with values on
/// the interior grid {0.001, ..., 0.999}.
pub fn grid_monotone_loglik(pi: &[f64], n: &[f64]) -> f64 {
    let grid: Vec<f64> = (1..=999).map(|v| v as f64 / 1000.0).collect();
    let term = |p: f64, pi: f64, n: f64| n * (pi * p.ln() + (1.0 - pi) * (1.0 - p).ln());
    let mut dp: Vec<f64> = grid.iter().map(|&g| term(g, pi[0], n[0])).collect();
    for (pii, ni) in pi.iter().zip(n).skip(1) {
        let mut prefix = dp.clone();
        for v in 1..prefix.len() {
            prefix[v] = prefix[v].max(prefix[v - 1]);
        }
        dp = grid
            .iter()
            .zip(&prefix)
            .map(|(&g, p)| p + term(g, *pii, *ni))
            .collect();
    }
    dp.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

/// Binomial log-likelihood of a fitted sequence.
pub fn binomial_loglik(pi: &[f64], n: &[f64], f: &[f64]) -> f64 {
    pi.iter()
        .zip(n)
        .zip(f)
        .map(|((pi, n), f)| n * (pi * f.ln() + (1.0 - pi) * (1.0 - f).ln()))
        .sum()
}

fn dominated(p: &[f64], q: &[f64]) -> bool {
    p.iter().zip(q).all(|(a, b)| a <= b)
}

/// Exact minimum of the box-constrained dominance-monotone least-squares
/// problem by set-partition enumeration.
///
/// At the optimum the level sets partition the points and each takes its
/// clipped weighted mean, so scanning every partition, scoring feasible
/// ones, and taking the minimum recovers the exact value. Only viable for
/// small instances (Bell(6) = 203 partitions).
pub fn partition_oracle_objective(points: &[Vec<f64>], y: &[f64], w: &[f64]) -> f64 {
    let n = y.len();
    let mut assign = vec![0usize; n];
    let mut best = f64::INFINITY;
    enumerate_partitions(points, y, w, &mut assign, 1, 1, &mut best);
    best
}

fn enumerate_partitions(
    points: &[Vec<f64>],
    y: &[f64],
    w: &[f64],
    assign: &mut Vec<usize>,
    next: usize,
    blocks: usize,
    best: &mut f64,
) {
    let n = y.len();
    if next == n {
        let mut num = vec![0.0; blocks];
        let mut den = vec![0.0; blocks];
        for i in 0..n {
            num[assign[i]] += w[i] * y[i];
            den[assign[i]] += w[i];
        }
        let values: Vec<f64> = num
            .iter()
            .zip(&den)
            .map(|(a, b)| (a / b).clamp(0.0, 1.0))
            .collect();
        for i in 0..n {
            for j in 0..n {
                if i != j
                    && dominated(&points[i], &points[j])
                    && values[assign[i]] > values[assign[j]] + 1e-12
                {
                    return;
                }
            }
        }
        let fitted: Vec<f64> = assign.iter().map(|&b| values[b]).collect();
        let obj = weighted_objective(y, w, &fitted);
        if obj < *best {
            *best = obj;
        }
        return;
    }
    for b in 0..=blocks.min(next) {
        assign[next] = b;
        let nb = blocks.max(b + 1);
        enumerate_partitions(points, y, w, assign, next + 1, nb, best);
    }
}

/// Kolmogorov distance between the empirical CDF of `samples` (infinities
/// count as never-arriving mass) and `target` over `grid_points` points of
/// `[lo, hi]`.
pub fn ks_distance(samples: &[f64], target: impl Fn(f64) -> f64, lo: f64, hi: f64, grid_points: usize) -> f64 {
    let mut finite: Vec<f64> = samples.iter().cloned().filter(|s| s.is_finite()).collect();
    finite.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    (0..grid_points)
        .map(|j| {
            let b = lo + (hi - lo) * j as f64 / (grid_points - 1) as f64;
            let below = finite.partition_point(|s| *s <= b) as f64;
            (below / n - target(b)).abs()
        })
        .fold(0.0, f64::max)
}

/// Median with the even-length midpoint convention. Sorts in place.
pub fn median(xs: &mut [f64]) -> f64 {
    assert!(!xs.is_empty());
    xs.sort_by(f64::total_cmp);
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        0.5 * (xs[mid - 1] + xs[mid])
    }
}

/// Least-squares slope of `ln(y)` against `ln(x)`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let xb = lx.iter().sum::<f64>() / n;
    let yb = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|v| (v - xb) * (v - xb)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - xb) * (b - yb)).sum();
    sxy / sxx
}

/// Prints the standard acceptance line and panics on failure.
pub fn report(criterion: u32, name: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion:2} [{status}] {name}: {detail}");
    assert!(pass, "criterion {criterion} ({name}) failed: {detail}");
}
