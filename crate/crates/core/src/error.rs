use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: row {row} has {len} entries, expected {expected}")]
    NonSquare { row: usize, len: usize, expected: usize },

    #[error("negative weight {value} at ({row}, {col})")]
    NegativeWeight { row: usize, col: usize, value: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric at ({row}, {col}): {a} vs {b}")]
    AsymmetryBeyondTolerance { row: usize, col: usize, a: f64, b: f64 },

    #[error("receptive field center ({x}, {y}) lies outside a {width}x{height} image")]
    OutOfBoundsCenter { x: f64, y: f64, width: f64, height: f64 },

    #[error("sigma must be positive, got {0}")]
    NonPositiveSigma(f64),

    #[error("index {index} out of range for {len} candidates")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("log argument {0} is not positive (negative graph weights?)")]
    NonPositiveLogArgument(f64),

    #[error("candidate {0} is already selected")]
    AlreadySelected(usize),

    #[error("K = {k} must lie in 1..={m}")]
    KOutOfRange { k: usize, m: usize },

    #[error("descriptor dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("negative distance {0}")]
    NegativeDistance(f64),

    #[error("k = {k} must be smaller than the matrix size {m}")]
    KTooLarge { k: usize, m: usize },

    #[error("image {width}x{height} is smaller than the 16x16 minimum")]
    ImageTooSmall { width: u32, height: u32 },

    #[error("rectangle {x0},{y0} {w}x{h} exceeds a {width}x{height} image")]
    RectOutOfBounds { x0: u32, y0: u32, w: u32, h: u32, width: u32, height: u32 },

    #[error("group index: {0}")]
    InvalidGroups(String),

    #[error("size mismatch: {what} has {got} entries, expected {expected}")]
    SizeMismatch { what: &'static str, got: usize, expected: usize },

    #[error("class pools are empty{}", .0.as_ref().map(|c| format!(" for class {c}")).unwrap_or_default())]
    EmptyPools(Option<String>),

    #[error("query {0} has no descriptors")]
    NoDescriptors(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("manifest: {0}")]
    Manifest(String),

    #[error("category {0} has no images")]
    EmptyCategory(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
