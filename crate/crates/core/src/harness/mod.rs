//! Configuration, persistence and the named experiments.

pub mod config;
pub mod diagnostics;
pub mod experiments;
pub mod snapshot;

pub use config::{load_config, parse_config, ExperimentConfig, OutputConfig};
pub use diagnostics::{read_diagnostics, write_diagnostics};
pub use experiments::{run_experiment, run_simulation, Assertion, Experiment, ExperimentReport};
pub use snapshot::{
    read_snapshot, read_snapshot_with_header, write_snapshot, write_snapshot_in_frame,
    SnapshotHeader,
};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "KPIWAVE_THREADS";

/// Applies `KPIWAVE_THREADS` to the global pool; returns the count if set.
pub fn configure_threads_from_env() -> crate::Result<Option<usize>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        crate::Error::Config(format!("{THREADS_ENV}: `{raw}` is not a positive integer"))
    })?;
    crate::par::set_threads(n).map_err(|e| crate::Error::Config(format!("{THREADS_ENV}: {e}")))?;
    Ok(Some(n))
}
