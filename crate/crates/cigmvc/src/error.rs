use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value in view {view}, row {row}")]
    NonFinite { view: usize, row: usize },

    #[error("invalid neighbor count k={k} for {n} samples (need 1 <= k <= n-2)")]
    InvalidNeighborCount { k: usize, n: usize },

    #[error("view {view} has {rows} rows, expected {expected}")]
    SampleCountMismatch {
        view: usize,
        rows: usize,
        expected: usize,
    },

    #[error("matrix must have at least 2 rows and 1 column, got {rows}x{cols}")]
    DegenerateMatrix { rows: usize, cols: usize },

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparam(String),

    #[error("need at least one view")]
    NoViews,

    #[error("cluster count {c} out of range for {n} samples")]
    InvalidClusterCount { c: usize, n: usize },

    #[error("eigendecomposition failed: {0}")]
    Eigendecomposition(String),

    #[error("label vector has {labels} entries but dataset has {samples} samples ({file})")]
    LabelLengthMismatch {
        labels: usize,
        samples: usize,
        file: String,
    },

    #[error("label vectors have different lengths: {left} vs {right}")]
    LabelVectorMismatch { left: usize, right: usize },

    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },

    #[error("{path}, row {row}: {message}")]
    Parse {
        path: PathBuf,
        row: usize,
        message: String,
    },

    #[error("dataset {name}: expected {expected} {what}, found {found}")]
    DatasetShape {
        name: String,
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
