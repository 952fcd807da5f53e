//! Experiment drivers behind the command-line front end: configuration,
//! scans, reports, the oracle suite and CSV emission.
//!
//! Every scan derives per-point seeds from `(master_seed, point index)` and
//! reduces samples in a fixed order, so the CSV bytes depend only on the
//! configuration, never on the worker count.

pub mod config;
pub mod oracle_suite;
pub mod reports;
pub mod scans;
pub mod table;

pub use config::{Command, ExperimentConfig, ModelKind, OrderKind};
pub use oracle_suite::{run_oracle_suite, OracleReport};
pub use reports::{bounds, gatecount, gen, solve_r, Report};
pub use scans::{evolve, scan_n, scan_t, FitSummary, ScanReport};
pub use table::{ResultRow, Table};

use crate::error::{Error, Result};

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "SYK_LAB_WORKERS";

/// Worker count from [`WORKERS_ENV`], if set.
pub fn workers_from_env() -> Result<Option<usize>> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(w) if w > 0 => Ok(Some(w)),
            _ => Err(Error::Validation(format!(
                "{WORKERS_ENV} must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs `f` on a dedicated pool of `workers` threads (the global pool when
/// `None`).
pub fn with_workers<T, F>(workers: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Resource(format!("worker pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_is_independent_of_worker_count() {
        let cfg = ExperimentConfig {
            n: vec![6],
            k: vec![3],
            l: vec![1],
            t: vec![0.3],
            r: 20,
            n_disorder: 5,
            model: ModelKind::Sparse,
            n_bernoulli: 2,
            kappa: 1.5,
            ..ExperimentConfig::default()
        };
        let one = with_workers(Some(1), || scan_n(&cfg))
            .unwrap()
            .unwrap()
            .to_csv()
            .unwrap();
        let four = with_workers(Some(4), || scan_n(&cfg))
            .unwrap()
            .unwrap()
            .to_csv()
            .unwrap();
        assert_eq!(one, four);
        assert!(one.starts_with("# "));
    }
}
