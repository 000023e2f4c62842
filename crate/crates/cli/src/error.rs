use std::path::{Path, PathBuf};

use thiserror::Error;

/// Everything that stops a run. Verification failures are not errors; they
/// set the exit status through [`crate::pipeline::RunOutcome`].
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),

    #[error("step {index} ({name}): {source}")]
    Step {
        index: usize,
        name: &'static str,
        #[source]
        source: moutard_core::Error,
    },

    #[error("{what}: {source}")]
    Core {
        what: String,
        #[source]
        source: moutard_core::Error,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }

    pub fn core(what: impl Into<String>, source: moutard_core::Error) -> Self {
        CliError::Core { what: what.into(), source }
    }
}
