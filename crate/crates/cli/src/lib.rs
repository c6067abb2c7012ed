//! Configuration loading, run orchestration and file output for the
//! `spectra` command.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;
pub mod plots;

pub use config::{load_config, parse_config, ExperimentConfig};
pub use error::{CliError, Result};
pub use pipeline::{predict, run_spectrum, run_stats, run_sweep};
pub use plots::emit_plots;
