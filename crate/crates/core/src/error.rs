use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid schema: {0}")]
    Schema(String),
    #[error("header mismatch: expected {expected:?}, found {found:?}")]
    HeaderMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("row {row}, column {column:?}: cannot parse {value:?} as a number")]
    ParseCell {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}, column {column:?}: missing value")]
    MissingValue { row: usize, column: String },
    #[error("dataset is empty")]
    EmptyDataset,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("non-finite value at row {row}, feature {feature}")]
    NonFinite { row: usize, feature: usize },
    #[error("feature {0:?} is categorical; a numeric feature is required")]
    NotNumeric(String),
    #[error("unknown feature {0:?}")]
    UnknownFeature(String),

    #[error("zero-norm vector")]
    ZeroNorm,
    #[error("negative component in a vector that must be non-negative")]
    NegativeComponent,
    #[error("zero variance: correlation is undefined for a constant vector")]
    ZeroVariance,
    #[error("similarity score {value} outside its range [{lo}, {hi}]")]
    ScoreOutOfRange { value: f64, lo: f64, hi: f64 },
    #[error("divergence is infinite: bin {bin} has mass in the first histogram and none in the second")]
    InfiniteDivergence { bin: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("compressor failure: {0}")]
    Compressor(String),

    #[error("Sakoe-Chiba band {band} is narrower than the length difference {diff}")]
    BandTooNarrow { band: usize, diff: usize },
    #[error("ground distance returned a negative or non-finite value ({0})")]
    BadGroundDistance(f64),

    #[error("{0} is not a metric; the index requires the triangle inequality")]
    NotAMetric(String),
    #[error("{0} cannot back a kd-tree; it is not coordinate-decomposable")]
    UnsupportedMetric(String),

    #[error("{0} requires a binary classification task")]
    NotBinary(&'static str),
    #[error("class {class} has {count} samples, fewer than {folds} folds")]
    ClassTooRare {
        class: String,
        count: usize,
        folds: usize,
    },
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
