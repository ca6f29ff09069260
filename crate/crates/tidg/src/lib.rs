//! Benchmark drivers, file formats and the command-line front end for
//! [`tidg_core`].
//!
//! - [`config`]: the versioned JSON run configuration and flag overrides.
//! - [`run`]: `solve` and `sweep` orchestration, parallel or serial.
//! - [`output`]: CSV tables, JSON manifests, atomic file writes.
//! - [`verify`]: the property suite behind `tidg verify`.
//! - [`cli`]: argument parsing and dispatch.

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod verify;

pub use error::{CliError, Result};
