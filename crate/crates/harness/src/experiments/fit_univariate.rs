use std::path::Path;

use perfmap::{
    fit_cdf_univariate, fit_parametric, DesignDensity, EstimatorKind, ParametricFamily,
};

use crate::config::FitUnivariateParams;
use crate::error::Result;
use crate::experiments::replication_streams;
use crate::output::{row, write_csv, write_plot_script};

/// Fit the switching-cost CDF from simulated proportions at design points
/// drawn uniformly on the incentive range; emits (b, f_hat, f_true).
pub fn run(params: &FitUnivariateParams, seed: u64, out_dir: &Path) -> Result<Vec<String>> {
    let market = params.market.build()?;
    let b_max = market.incentive_curve().range_max();
    let density = DesignDensity::uniform(0.0, b_max)?;
    let streams = replication_streams(seed, 0);
    let mut rng = streams.stream(0);

    let mut obs: Vec<(f64, f64, f64)> = Vec::with_capacity(params.design_points);
    for _ in 0..params.design_points {
        let b = density.sample(&mut rng);
        match params.per_point_n {
            Some(n) => {
                let theta = market.threshold_for_incentive(b)?;
                let samples = market.simulate(theta, n as usize, &mut rng);
                let hits = samples.iter().filter(|s| s.action == 1).count();
                obs.push((b, hits as f64 / n as f64, n as f64));
            }
            None => obs.push((b, market.cost_cdf().evaluate(b), 1.0)),
        }
    }

    let predict: Box<dyn Fn(f64) -> f64> = match params.estimator {
        EstimatorKind::Isotonic => {
            let fit = fit_cdf_univariate(&obs)?;
            Box::new(move |b| fit.evaluate_scalar(b))
        }
        EstimatorKind::ParametricProbit | EstimatorKind::ParametricLogit => {
            let family = if params.estimator == EstimatorKind::ParametricProbit {
                ParametricFamily::Probit
            } else {
                ParametricFamily::Logit
            };
            let pairs: Vec<(f64, f64)> = obs.iter().map(|&(b, pi, _)| (b, pi)).collect();
            let fit = fit_parametric(&pairs, family)?;
            Box::new(move |b| fit.predict_or_step(b))
        }
        EstimatorKind::Oracle => {
            let cost = market.cost_cdf().clone();
            Box::new(move |b| cost.evaluate(b))
        }
    };

    obs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let rows: Vec<String> = obs
        .iter()
        .map(|&(b, _, _)| {
            let f_hat = predict(b);
            let f_true = market.cost_cdf().evaluate(b);
            row(&[b.to_string(), f_hat.to_string(), f_true.to_string()])
        })
        .collect();

    let csv = write_csv(out_dir, "fit_univariate.csv", "b,f_hat,f_true", &rows)?;
    let plot = write_plot_script(
        out_dir,
        "fit_univariate.gp",
        "set xlabel 'b'\nset ylabel 'F(b)'\n\
         plot 'fit_univariate.csv' using 1:2 with steps, '' using 1:3 with lines\n",
    )?;
    Ok(vec![csv, plot])
}
