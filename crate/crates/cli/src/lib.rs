//! Command-line pipeline: ingest, smooth, FPCA, cluster, evaluate and plot.

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;
pub mod svg;

pub use commands::Context;
pub use config::{stage_seed, PipelineConfig};
pub use error::{CliError, CliResult};
