use std::path::PathBuf;

use thiserror::Error;

use crate::image::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("stack is empty")]
    EmptyStack,

    #[error("window {window} exceeds image dimensions {width}x{height}")]
    WindowTooLarge {
        window: usize,
        width: usize,
        height: usize,
    },

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(&'static str),

    #[error("probe ({x}, {y}) lies outside the {width}x{height} image")]
    ProbeOutOfBounds {
        x: usize,
        y: usize,
        width: usize,
        height: usize,
    },

    #[error("{name} must be strictly positive and finite, got {value}")]
    NonPositiveInput { name: &'static str, value: f64 },

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("stack validation failed: {0}")]
    Validation(ValidationReport),

    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("{}: parse error at {location}: {message}", path.display())]
    Parse {
        path: PathBuf,
        location: String,
        message: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::FileNotFound(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn parse(
        path: impl Into<PathBuf>,
        location: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Error::Parse {
            path: path.into(),
            location: location.into(),
            message: message.into(),
        }
    }
}
