use std::io;
use std::path::{Path, PathBuf};

use graphmask_core::mask::CorpusError;
use graphmask_core::{IngestError, MetricError, ProtocolError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0} already exists (pass --force to overwrite)")]
    OutputExists(PathBuf),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn corpus(path: &Path, err: CorpusError) -> Self {
        match err {
            CorpusError::Io(source) => Self::io(path, source),
            other => Self::Invalid(other.to_string()),
        }
    }

    /// 2 for anything the filesystem refused, 1 for bad input.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. }
            | CliError::Ingest(IngestError::Io { .. })
            | CliError::Metric(MetricError::Io { .. }) => 2,
            _ => 1,
        }
    }
}
