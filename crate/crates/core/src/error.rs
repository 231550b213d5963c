use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("identical images: MSE is zero, PSNR is infinite")]
    IdenticalImages,

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "spectrum is not Hermitian: worst deviation {deviation:.3e} at (kx={kx}, ky={ky})"
    )]
    NonHermitian { kx: i64, ky: i64, deviation: f64 },

    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),

    #[error("malformed {format} file: {reason}")]
    Malformed { format: &'static str, reason: String },

    #[error("unknown method `{0}` (expected nlm, fnlm or sfnlm)")]
    UnknownMethod(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn at(self, path: impl Into<PathBuf>) -> Self {
        Error::File {
            path: path.into(),
            source: Box::new(self),
        }
    }
}
