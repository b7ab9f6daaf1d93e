// SPDX-License-Identifier: MIT OR Apache-2.0

//! File formats, reports and the `softed` command line.

#![forbid(unsafe_code)]

mod cli;
pub mod config;
pub mod error;
pub mod files;
pub mod plot;
pub mod report;

pub use cli::{run_cli, run_with, DEFAULT_DEPTH, DEFAULT_NEIGHBORHOOD, DEFAULT_SWEEP_K};
pub use error::{CliError, CliResult};
