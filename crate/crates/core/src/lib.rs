//! Stability-regularized cross-validation.
//!
//! Standard k-fold cross-validation picks hyperparameters by minimizing
//! held-out error alone; on small or high-dimensional data the winning
//! configuration is often an unstable one whose error estimate is badly
//! optimistic. This crate scores each configuration by
//!
//! `cv_error(theta) + lambda * stability(theta)`
//!
//! where `stability` is the empirical hypothesis stability — the largest
//! (over folds) average absolute change in pointwise loss when one fold is
//! dropped from training — and the weight `lambda` is chosen by nested
//! cross-validation. The crate provides the CV engine, three built-in
//! regression learners (ridge, sparse ridge, CART), a generalization bound
//! in terms of the stability estimate, and a synthetic benchmark generator.

pub mod cv;
pub mod data;
pub mod error;
pub mod learners;
pub mod synth;

// Matrix types appear throughout the public API; re-export the linear
// algebra crate so downstream code can name them without pinning its own
// copy to a matching version.
pub use nalgebra;

pub use cv::{
    coordinate_descent_select, cv_evaluate, generalization_bound, nested_select, regularized_score,
    retrain_final, BoundInputs, CVEvaluation, CacheMode, CdSelection, CdTrace, SelectOptions,
    SelectionReport, TraceEval, TraceStage, REPORT_SCHEMA,
};
pub use data::{
    geometric_mean_ratio, load_csv, make_folds, standardize, CsvOptions, Dataset, FoldPartition,
    LossFn, LossKind, MetricSummary, ResponseColumn, Standardization,
};
pub use error::{Error, Result};
pub use learners::{
    default_grid, fit, fit_cart, fit_ridge, fit_sparse_ridge, log_uniform_grid, max_tau,
    BuiltinFitter, Fitter, FittedModel, HyperGrid, HyperParams, LearnerKind, ModelParams, TreeNode,
};
pub use synth::{
    generate, generate_raw, heatmap_experiment, CvKind, HeatmapMatrix, HeatmapResult, RawSynth,
    SynthConfig, SynthInstance,
};
