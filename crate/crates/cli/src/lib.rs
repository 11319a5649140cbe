//! Command-line front end for the cknlab kernels: configuration, report
//! records, output formats and the acceptance suite behind `selftest`.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod report;

pub use config::{Command, OutputFormat, ProfileSelector, RunConfig};
pub use error::{CliError, CliResult};
pub use report::{Envelope, ModeScanReport, ProbeReport, SharpConstantReport};
