//! Experiment orchestration behind the `stabcv` binary: config parsing,
//! repeated train/test splits, paired summaries, and report emission.

pub mod config;
pub mod experiment;
pub mod output;
pub mod summary;

pub use config::{DataSource, ExperimentConfig, Mode, SynthSpec};
pub use experiment::{
    run_experiment, run_heatmap, run_heatmap_config, split_indices, Aggregate, RunRecord, RunRow,
    RUNS_SCHEMA,
};
pub use output::write_atomic;
pub use summary::{summarize, PairedSummary};
