//! Experiment presets: each takes its validated parameter block, the master
//! seed, and an output directory, and returns the artifact files it wrote.
//!
//! Replication `r` of any experiment derives its own stream family from
//! `derive_stream_seed(master, r)`, so replication-level parallelism never
//! touches result bytes; shared inputs (benefit vectors, exact choice
//! probabilities) come from the master family directly.

pub mod appendix_c;
pub mod design_run;
pub mod fit_multivariate;
pub mod fit_univariate;
pub mod regret_run;

use perfmap::rng::derive_stream_seed;
use perfmap::Streams;

pub(crate) fn replication_streams(master: u64, replication: u64) -> Streams {
    Streams::new(derive_stream_seed(master, replication))
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}
