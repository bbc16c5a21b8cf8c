//! File formats, traces, experiment settings and the `rulingset` command
//! line driver on top of `rulingset-core`.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod trace;

pub use rulingset_core as core;
pub use error::CliError;
