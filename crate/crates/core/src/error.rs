use std::path::PathBuf;

/// Errors produced anywhere in the measurement pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid segmentation: {0}")]
    InvalidSegmentation(String),

    #[error("degenerate image: {0}")]
    DegenerateImage(String),

    #[error("degenerate distribution: {0}")]
    DegenerateDistribution(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("manifest row {row}: {message}")]
    Manifest { row: usize, message: String },

    #[error("{} row {row}: {message}", path.display())]
    Table {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line tool: 1 usage, 2 data/format,
    /// 3 degenerate statistics.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) => 1,
            Error::DegenerateDistribution(_) => 3,
            Error::InvalidSegmentation(_)
            | Error::DegenerateImage(_)
            | Error::Format { .. }
            | Error::Manifest { .. }
            | Error::Table { .. }
            | Error::Csv(_)
            | Error::Io { .. } => 2,
        }
    }
}
