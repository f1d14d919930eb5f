//! Command-line front end for `betlab-core`: TOML problem specs in, reports
//! and CSV tables out.

pub mod commands;
pub mod spec;

pub use commands::CliError;
pub use spec::{LoadedSpec, ProblemSpec, SpecError};
