//! Command-line front end for `bma-cluster`: configuration, CSV ingestion,
//! the end-to-end averaging pipeline and SVG figures.

pub mod config;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod svg;

pub use config::{BuiltinSpec, Config, FileSpec, ModelSpec};
pub use error::{CliError, Result};
pub use pipeline::{run, RunOutput};

/// Environment variable capping the worker threads used for parallel work.
pub const THREADS_ENV: &str = "BMA_CLUSTER_THREADS";

/// Sizes the global thread pool from [`THREADS_ENV`] if it is set.
pub fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| {
            CliError::Config(format!("{THREADS_ENV}=`{value}` is not a positive integer"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(e.to_string()))
}
