//! Batch pipelines over the transforms of `moutard-core`: JSON configs,
//! closed-form field expressions, named examples and report output.

pub mod config;
pub mod error;
pub mod examples;
pub mod expr;
pub mod pipeline;

pub use config::{LoadedConfig, PipelineConfig};
pub use error::CliError;
pub use pipeline::{run, RunOptions, RunOutcome};
