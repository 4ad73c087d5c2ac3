//! Command-line front end for `cpscore`: file formats, run configuration,
//! the `generate` / `infer` commands and the synthetic benchmark harness.

pub mod bench;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

pub use error::{CliError, CliResult, EXIT_NOT_CONVERGED};
