use std::path::PathBuf;

/// Crate-wide error type. Variants carry enough context to tell the user
/// which file, parameter, or dimension pair was at fault.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("failed to write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("failed to decode {path}: {source}")]
    Decode {
        path: PathBuf,
        source: image::ImageError,
    },

    #[error("failed to encode {path}: {source}")]
    Encode {
        path: PathBuf,
        source: image::ImageError,
    },

    /// Wrong pixel layout on load, e.g. an 8-bit file where a 16-bit
    /// single-channel depth map is required.
    #[error("{path}: expected {expected}, found {found}")]
    PixelFormat {
        path: PathBuf,
        expected: &'static str,
        found: String,
    },

    #[error("{context}: dimension mismatch, {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        context: &'static str,
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    #[error("invalid {name}: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    #[error("invalid image data: {0}")]
    InvalidData(String),

    #[error("model file {path}: {reason}")]
    ModelFormat { path: PathBuf, reason: String },

    #[error("scene {dir}: {reason}")]
    SceneLayout { dir: PathBuf, reason: String },

    #[error("predictor: {0}")]
    Predictor(String),

    #[error("refiner: {0}")]
    Refiner(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(
        context: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    ) -> Self {
        Error::DimensionMismatch {
            context,
            left_width: left.0,
            left_height: left.1,
            right_width: right.0,
            right_height: right.1,
        }
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}
