//! Error type shared across the crate.
//!
//! Variants are grouped so a front end can map them onto coarse exit
//! classes: bad arguments/configuration, bad data, numerical failure.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid fold count for the given sample size.
    #[error("invalid fold count k={k} for n={n} (need 2 <= k <= n)")]
    InvalidFolds { k: usize, n: usize },

    /// A hyperparameter outside its admissible range.
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperParams(String),

    /// Requested sparsity exceeds the number of features.
    #[error("invalid sparsity tau={tau} for p={p} features")]
    InvalidSparsity { tau: usize, p: usize },

    /// A learner that cannot be fit on an empty training set received one.
    #[error("empty training set")]
    EmptyTrainingSet,

    /// Feature-vector length does not match the model.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// Malformed or non-finite input data.
    #[error("data error: {0}")]
    Data(String),

    /// Domain error in a metric computation (e.g. non-positive MSE ratio).
    #[error("metric domain error: {0}")]
    MetricDomain(String),

    /// An argument outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A linear solve or factorization failed, or failed its residual check.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A model fit failed inside a cross-validation loop.
    #[error("fit failed on fold {fold}: {source}")]
    FoldFit {
        fold: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// Attach the index of the fold whose fit failed.
    pub fn on_fold(self, fold: usize) -> Error {
        Error::FoldFit {
            fold,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
