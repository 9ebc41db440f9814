use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by every stage of the pipeline.
///
/// Variants are grouped into input/validation problems and numeric problems;
/// see [`Error::is_numeric`].
#[derive(Debug, Error)]
pub enum Error {
    // data
    #[error("io: {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("data: malformed CSV: {0}")]
    Csv(String),
    #[error("data: column `{0}` not found in header")]
    MissingColumn(String),
    #[error("data: non-numeric cell {value:?} at row {row}, column `{column}`")]
    NonNumericCell { row: usize, column: String, value: String },
    #[error("data: column `{0}` selected for both X and Y")]
    OverlappingSelection(String),
    #[error("data: need at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("data: {0}")]
    InvalidSample(String),

    // metrics
    #[error("metrics: invalid parameters for {kind}: {reason}")]
    InvalidParams { kind: String, reason: String },
    #[error("metrics: cannot parse metric spec `{0}`")]
    BadMetricSpec(String),
    #[error("metrics: generated distance {value:e} at ({row}, {col}) is negative; kernel is not positive semidefinite")]
    NegativeGeneratedDistance { row: usize, col: usize, value: f64 },
    #[error("metrics: matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("metrics: asymmetry {gap:e} at ({row}, {col}) exceeds tolerance")]
    AsymmetryTooLarge { row: usize, col: usize, gap: f64 },
    #[error("metrics: negative distance entry {value} at ({row}, {col})")]
    NegativeDistanceEntry { row: usize, col: usize, value: f64 },
    #[error("metrics: expected a {expected} matrix, got {got}")]
    WrongMatrixKind { expected: &'static str, got: &'static str },

    // statistic
    #[error("dcov: dimension mismatch ({0} vs {1})")]
    DimensionMismatch(usize, usize),
    #[error("dcov: statistic {0:e} is negative beyond roundoff; semimetrics are not of negative type")]
    NegativeStatistic(f64),

    // spectral
    #[error("adc: centered matrix is indefinite (eigenvalue {min:e} vs largest {max:e})")]
    IndefiniteMatrix { min: f64, max: f64 },
    #[error("oracle: centered kernel is indefinite (eigenvalue {min:e} vs largest {max:e})")]
    IndefiniteCenteredKernel { min: f64, max: f64 },
    #[error("oracle: invalid distribution: {0}")]
    InvalidDistribution(String),

    // generators
    #[error("synthetic: unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("synthetic: {0}")]
    InvalidGeneratorSpec(String),

    // viz
    #[error("viz: {0} group is empty")]
    DegenerateGroup(&'static str),
    #[error("viz: {0}")]
    InvalidViz(String),

    #[error("config: {0}")]
    Config(String),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for failures of the numerics (non-PSD kernels, indefinite
    /// spectra, negative statistics) as opposed to bad input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::NegativeGeneratedDistance { .. }
                | Error::NegativeStatistic(_)
                | Error::IndefiniteMatrix { .. }
                | Error::IndefiniteCenteredKernel { .. }
        )
    }
}
