use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("band {band} contains a non-finite value")]
    NonFinite { band: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("ground truth has no labeled pixels")]
    NoLabeledPixels,

    #[error("ground truth has {0} distinct class(es); at least 2 required")]
    TooFewClasses(usize),

    #[error("class {class} has {count} labeled pixel(s); at least 2 required for splitting")]
    ClassTooSmall { class: u32, count: usize },

    #[error(
        "svm for class pair ({first}, {second}) did not converge within {iterations} iterations"
    )]
    NonConvergence {
        first: u32,
        second: u32,
        iterations: usize,
    },

    #[error("{path}: expected {expected} bytes, found {actual}")]
    SizeMismatch {
        path: PathBuf,
        expected: u64,
        actual: u64,
    },

    #[error("unknown dtype `{0}`")]
    UnknownDtype(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 config, 3 data, 4 method failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) => 2,
            Error::Geometry(_)
            | Error::NonFinite { .. }
            | Error::NoLabeledPixels
            | Error::TooFewClasses(_)
            | Error::ClassTooSmall { .. }
            | Error::SizeMismatch { .. }
            | Error::UnknownDtype(_)
            | Error::Data(_)
            | Error::Io { .. } => 3,
            Error::LengthMismatch { .. } | Error::Empty(_) | Error::NonConvergence { .. } => 4,
        }
    }
}
