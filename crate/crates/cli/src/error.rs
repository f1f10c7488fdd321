use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: landdiv::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io { .. } => EXIT_INPUT,
            CliError::Stage { source, .. } => match source {
                landdiv::Error::InvalidComposition(_)
                | landdiv::Error::InvalidWeights(_)
                | landdiv::Error::DimensionMismatch { .. }
                | landdiv::Error::InvalidArgument(_)
                | landdiv::Error::OutOfDomain { .. }
                | landdiv::Error::MissingBandwidth(_)
                | landdiv::Error::Serialization(_) => EXIT_INPUT,
                _ => EXIT_NUMERICAL,
            },
        }
    }
}

/// Attaches a pipeline stage name to core errors.
pub trait StageContext<T> {
    fn stage(self, stage: &'static str) -> CliResult<T>;
}

impl<T> StageContext<T> for landdiv::Result<T> {
    fn stage(self, stage: &'static str) -> CliResult<T> {
        self.map_err(|source| CliError::Stage { stage, source })
    }
}

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}
