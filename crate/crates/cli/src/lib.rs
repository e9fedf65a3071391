//! File formats, reports and batch commands around [`phaseloc_core`].
//!
//! - [`recording`]: line-delimited JSON sweep recordings.
//! - [`report`]: geometry reports and Monte-Carlo aggregate JSON/CSV.
//! - [`config`]: experiment configuration files.
//! - [`commands`]: the `simulate`, `locate` and `evaluate` commands.

pub mod commands;
pub mod config;
pub mod error;
pub mod recording;
pub mod report;

pub use error::{CliError, Outcome};
