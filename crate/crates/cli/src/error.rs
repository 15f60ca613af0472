use std::path::PathBuf;

use fft_core::config::ConfigError;
use fft_core::io::{FlowFileError, ParseError};
use fft_core::metrics::MetricsError;
use fft_core::pipeline::PipelineError;
use fft_core::synth::SpecError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Parse {
        path: PathBuf,
        #[source]
        source: ParseError,
    },
    #[error("{}: {source}", path.display())]
    FlowFile {
        path: PathBuf,
        #[source]
        source: FlowFileError,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("{0}")]
    MissingFlow(String),
    #[error("{sequence}: {source}")]
    Pipeline {
        sequence: String,
        #[source]
        source: PipelineError,
    },
    #[error("{sequence}: {source}")]
    Metrics {
        sequence: String,
        #[source]
        source: MetricsError,
    },
    #[error("sequence names differ between ground truth and results: {0}")]
    SequenceMismatch(String),
}

impl CliError {
    /// Process exit status for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io { .. } => 3,
            CliError::Parse { .. } | CliError::FlowFile { .. } | CliError::Config(_) | CliError::Spec(_) => 4,
            CliError::MissingFlow(_) => 5,
            CliError::Pipeline { source, .. } => match source {
                PipelineError::MissingFlow { .. } => 5,
                PipelineError::FlowLoad(_) => 4,
                _ => 1,
            },
            CliError::Metrics { .. } | CliError::SequenceMismatch(_) => 6,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn read_text(path: &std::path::Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub(crate) fn write_file(path: &std::path::Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}
