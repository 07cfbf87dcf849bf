//! Experiment driver: repeated train/test splits, hyperparameter
//! selection, held-out evaluation, and report files.
//!
//! Every repeat `r` derives its split (and, for synthetic data, its
//! instance) from `base_seed + r`, so two runs that differ only in the
//! selection method see identical data and can be compared pairwise.
//! Wall-clock times go to stderr only; every file written is reproduced
//! byte for byte by a rerun with the same configuration.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use stabcv_core::synth::{default_gamma_grid, default_tau_grid};
use stabcv_core::{
    coordinate_descent_select, cv_evaluate, default_grid, generalization_bound, generate,
    heatmap_experiment, load_csv, log_uniform_grid, make_folds, max_tau, nested_select,
    retrain_final, BoundInputs, BuiltinFitter, CsvOptions, CvKind, Dataset, Error, FittedModel,
    FoldPartition, Fitter, HeatmapMatrix, HeatmapResult, HyperGrid, HyperParams, LearnerKind,
    LossFn, Result, SelectOptions, SelectionReport, SynthConfig, TraceEval, TraceStage,
    REPORT_SCHEMA,
};

use crate::config::{DataSource, ExperimentConfig, Mode};
use crate::output::write_atomic;

/// Schema tag written into every serialized run record.
pub const RUNS_SCHEMA: &str = "stabcv-runs/1";

/// One repeat of an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRow {
    /// Repeat index, 0-based.
    pub repeat: usize,
    /// Seed of this repeat's split (and synthetic instance): base + repeat.
    pub seed: u64,
    /// Learner family.
    pub learner: LearnerKind,
    /// Hyperparameters the method selected.
    pub theta_star: HyperParams,
    /// Stability weight the method selected, when one was searched.
    pub lambda_star: Option<f64>,
    /// The method's own error estimate for `theta_star`.
    pub estimate: f64,
    /// Mean squared error of the refit model on the held-out test rows.
    pub test_mse: f64,
    /// Nonzero coefficients of the final model (linear learners only).
    pub sparsity: Option<usize>,
    /// Generalization bound, when the run computes one.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bound: Option<f64>,
    /// Wall-clock seconds for this repeat; excluded from every output
    /// file so reruns are byte-identical.
    #[serde(skip)]
    pub wall_secs: f64,
}

/// Means over a record's rows, kept next to the rows for quick reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    /// Mean of the per-repeat error estimates.
    pub mean_estimate: f64,
    /// Mean of the per-repeat test MSEs.
    pub mean_test_mse: f64,
    /// Mean of (estimate - test MSE); negative means the estimate
    /// under-promised on average.
    pub mean_gap: f64,
    /// Median of |estimate - test MSE|.
    pub median_abs_gap: f64,
}

/// Every repeat of one experiment, plus identifying metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    /// Schema tag, [`RUNS_SCHEMA`].
    pub schema: String,
    /// The mode that produced the rows (`kcv`, `nested`, or `bound`).
    pub mode: String,
    /// Learner family.
    pub learner: LearnerKind,
    /// Dataset identity: the CSV path, or a synthetic-spec description.
    pub dataset: String,
    /// Number of folds.
    pub k: usize,
    /// Base seed; repeat r used seed base + r.
    pub base_seed: u64,
    /// Fraction of rows held out for testing.
    pub test_fraction: f64,
    /// Candidate stability weights (empty for plain CV).
    pub lambda_grid: Vec<f64>,
    /// One row per repeat, in repeat order.
    pub rows: Vec<RunRow>,
    /// Means over the rows.
    pub aggregate: Aggregate,
}

impl RunRecord {
    /// Serialize to pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Data(format!("run record serialization failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    /// Deserialize from JSON, rejecting unknown schema tags.
    pub fn from_json(text: &str) -> Result<Self> {
        let record: RunRecord = serde_json::from_str(text)
            .map_err(|e| Error::Data(format!("run record parse failed: {e}")))?;
        if record.schema != RUNS_SCHEMA {
            return Err(Error::Data(format!(
                "unsupported run schema '{}', expected '{RUNS_SCHEMA}'",
                record.schema
            )));
        }
        Ok(record)
    }
}

/// Split `0..n` into ascending (train, test) index lists by a seeded
/// shuffle; the test set takes the first `ceil(test_fraction * n)` of the
/// shuffled order.
pub fn split_indices(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "test_fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    let n_test = (test_fraction * n as f64).ceil() as usize;
    if n < n_test + 2 {
        return Err(Error::Data(format!(
            "splitting n = {n} rows at test_fraction = {test_fraction} leaves fewer than 2 \
             training rows"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut test = order[..n_test].to_vec();
    let mut train = order[n_test..].to_vec();
    test.sort_unstable();
    train.sort_unstable();
    Ok((train, test))
}

/// The search grid: configured axes where given, the learner's defaults
/// where not.
pub fn build_grid(
    cfg: &ExperimentConfig,
    kind: LearnerKind,
    n: usize,
    p: usize,
) -> Result<HyperGrid> {
    let default_gammas = || log_uniform_grid(1e-3, 1e3, 20);
    match kind {
        LearnerKind::Ridge => match &cfg.gamma_grid {
            None => default_grid(kind, n, p),
            Some(g) => HyperGrid::ridge(g.clone()),
        },
        LearnerKind::SparseRidge => {
            if cfg.gamma_grid.is_none() && cfg.tau_grid.is_none() {
                return default_grid(kind, n, p);
            }
            let taus = match &cfg.tau_grid {
                Some(t) => t.clone(),
                None => (1..=max_tau(n, p)).collect(),
            };
            let gammas = match &cfg.gamma_grid {
                Some(g) => g.clone(),
                None => default_gammas()?,
            };
            HyperGrid::sparse_ridge(taus, gammas)
        }
        LearnerKind::Cart => {
            if cfg.depth_grid.is_none() && cfg.min_samples_split_grid.is_none() {
                return default_grid(kind, n, p);
            }
            let depths = match &cfg.depth_grid {
                Some(d) => d.clone(),
                None => (1..=10).collect(),
            };
            let splits = match &cfg.min_samples_split_grid {
                Some(s) => s.clone(),
                None => (2..=10).collect(),
            };
            HyperGrid::cart(depths, splits)
        }
    }
}

fn mean(values: impl Iterator<Item = f64>, len: usize) -> f64 {
    values.sum::<f64>() / len as f64
}

fn median(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len();
    if m % 2 == 1 {
        values[m / 2]
    } else {
        0.5 * (values[m / 2 - 1] + values[m / 2])
    }
}

/// Means and gap statistics over the rows.
pub fn aggregate(rows: &[RunRow]) -> Aggregate {
    let n = rows.len();
    Aggregate {
        mean_estimate: mean(rows.iter().map(|r| r.estimate), n),
        mean_test_mse: mean(rows.iter().map(|r| r.test_mse), n),
        mean_gap: mean(rows.iter().map(|r| r.estimate - r.test_mse), n),
        median_abs_gap: median(rows.iter().map(|r| (r.estimate - r.test_mse).abs()).collect()),
    }
}

/// Mean pointwise loss of `model` over `data`.
pub fn mean_loss(model: &FittedModel, data: &Dataset, loss: &LossFn) -> Result<f64> {
    let preds = model.predict_all(data.features())?;
    let total: f64 = data
        .response()
        .iter()
        .zip(preds.iter())
        .map(|(y, yh)| loss.loss(*y, *yh))
        .sum();
    Ok(total / data.n() as f64)
}

/// Plain k-fold CV selection packaged as a [`SelectionReport`]: coordinate
/// descent at stability weight 0, then one stability evaluation at the
/// chosen point so the report still carries `stability_at_star` and an
/// empirical loss bound.
pub fn kcv_select(
    data: &Dataset,
    folds: &FoldPartition,
    fitter: &dyn Fitter,
    grid: &HyperGrid,
    loss: &LossFn,
    seed: u64,
    max_cycles: usize,
) -> Result<SelectionReport> {
    let cd = coordinate_descent_select(data, folds, fitter, grid, 0.0, loss, None, max_cycles)?;
    let post = cv_evaluate(data, folds, fitter, &cd.theta_star, loss, true)?;

    let mut warnings = Vec::new();
    if data.n() % folds.k() != 0 {
        warnings.push(format!(
            "n = {} is not divisible by k = {}; folds are unbalanced, so the \
             generalization bound is heuristic",
            data.n(),
            folds.k()
        ));
    }
    for theta in &cd.trace.non_finite {
        warnings.push(format!("non-finite CV score at theta = {theta}; treated as +inf"));
    }

    let visited: BTreeSet<HyperParams> =
        cd.trace.evaluations.iter().map(|(t, _)| t.clone()).collect();
    let stage = TraceStage {
        stage: "final".to_string(),
        lambda: None,
        outer_fold: None,
        evaluations: cd
            .trace
            .evaluations
            .iter()
            .map(|(theta, score)| TraceEval {
                theta: theta.clone(),
                score: *score,
            })
            .collect(),
        chosen: cd.theta_star.clone(),
        cycles: cd.trace.cycles,
        converged: cd.trace.converged,
    };

    Ok(SelectionReport {
        schema: REPORT_SCHEMA.to_string(),
        learner: grid.learner(),
        k: folds.k(),
        seed,
        lambda_grid: Vec::new(),
        lambda_star: None,
        theta_star: cd.theta_star,
        estimate: cd.score,
        stability_at_star: post.stability.unwrap_or(f64::NAN),
        total_fits: cd.total_fits + post.fit_count as u64,
        theta_visited: visited.into_iter().collect(),
        max_observed_loss: cd.max_observed_loss.max(post.max_pointwise_loss),
        per_fold_outer_scores: None,
        warnings,
        trace: vec![stage],
    })
}

/// The train/test data of one repeat.
fn repeat_data(
    cfg: &ExperimentConfig,
    full: Option<&Dataset>,
    seed: u64,
) -> Result<(Dataset, Dataset)> {
    match full {
        Some(data) => {
            let (train_idx, test_idx) = split_indices(data.n(), cfg.test_fraction, seed)?;
            let train = data.subset_dataset(&train_idx)?;
            let test = data.subset_dataset(&test_idx)?;
            let (train, mut others) = stabcv_core::standardize(&train, &[&test])?;
            let test = others.pop().expect("one standardized companion set");
            Ok((train, test))
        }
        None => {
            let spec = cfg.synth_spec()?;
            let instance = generate(&spec.config(seed))?;
            Ok((instance.train, instance.test))
        }
    }
}

fn bound_with_fallback(
    cfg: &ExperimentConfig,
    report: &mut SelectionReport,
) -> Result<f64> {
    let m_bound = match cfg.m_bound {
        Some(m) => m,
        None => {
            let warning = format!(
                "no loss bound M was given; using the largest observed loss {} instead, \
                 so the bound is heuristic",
                report.max_observed_loss
            );
            if !report.warnings.contains(&warning) {
                report.warnings.push(warning);
            }
            report.max_observed_loss
        }
    };
    generalization_bound(&BoundInputs {
        cv_error: report.estimate,
        mu_h: report.stability_at_star,
        m_bound,
        k: report.k,
        delta: cfg.delta,
    })
}

/// Run every repeat of a `kcv`, `nested`, or `bound` experiment and write
/// `runs.csv`, `runs.json`, and `report.json` (the repeat-0 selection
/// report) into the configured output directory.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunRecord> {
    if cfg.mode == Mode::Heatmap {
        return Err(Error::InvalidArgument(
            "heatmap mode produces error surfaces, not runs; use run_heatmap".into(),
        ));
    }
    let learner = cfg
        .learner
        .ok_or_else(|| Error::InvalidArgument("this mode requires a learner".into()))?;
    let (full_data, dataset_label) = match &cfg.dataset {
        Some(DataSource::Csv(path)) => {
            let opts = CsvOptions {
                has_header: cfg.has_header,
                response: cfg.response_column.clone(),
            };
            (Some(load_csv(path, &opts)?), path.display().to_string())
        }
        Some(DataSource::Synth) => {
            let s = cfg.synth_spec()?;
            let label = format!(
                "synth(n={},p={},tau_true={},rho={},nu={})",
                s.n, s.p, s.tau_true, s.rho, s.nu
            );
            (None, label)
        }
        None => {
            return Err(Error::InvalidArgument(
                "this mode requires a dataset (a CSV path, or 'synth')".into(),
            ))
        }
    };

    let loss = LossFn::squared_error();
    let fitter = BuiltinFitter::new(learner);
    let mut rows = Vec::with_capacity(cfg.repeats);
    let mut first_report: Option<SelectionReport> = None;

    for r in 0..cfg.repeats {
        let started = Instant::now();
        let seed = cfg.seed.wrapping_add(r as u64);
        let (train, test) = repeat_data(cfg, full_data.as_ref(), seed)?;
        let grid = build_grid(cfg, learner, train.n(), train.p())?;
        let folds = make_folds(train.n(), cfg.k, seed)?;

        let mut report = match cfg.mode {
            Mode::Kcv | Mode::Bound => {
                kcv_select(&train, &folds, &fitter, &grid, &loss, seed, cfg.max_cycles)?
            }
            Mode::Nested => nested_select(
                &train,
                cfg.k,
                &fitter,
                &grid,
                &cfg.lambda_grid,
                &loss,
                seed,
                &SelectOptions {
                    max_cycles: cfg.max_cycles,
                    cache: cfg.cache,
                    init: None,
                },
            )?,
            Mode::Heatmap => unreachable!("rejected above"),
        };

        let bound = match cfg.mode {
            Mode::Bound => Some(bound_with_fallback(cfg, &mut report)?),
            _ => None,
        };

        let n_train_final = train.n() - folds.fold_size(0);
        let model = retrain_final(&train, &fitter, &report.theta_star, n_train_final)?;
        let test_mse = mean_loss(&model, &test, &loss)?;
        let wall_secs = started.elapsed().as_secs_f64();
        eprintln!(
            "repeat {r}: theta*=({}), estimate={:.6}, test_mse={:.6} [{:.3}s]",
            report.theta_star, report.estimate, test_mse, wall_secs
        );

        rows.push(RunRow {
            repeat: r,
            seed,
            learner,
            theta_star: report.theta_star.clone(),
            lambda_star: report.lambda_star,
            estimate: report.estimate,
            test_mse,
            sparsity: model.nonzero_count(),
            bound,
            wall_secs,
        });
        if r == 0 {
            first_report = Some(report);
        }
    }

    let record = RunRecord {
        schema: RUNS_SCHEMA.to_string(),
        mode: cfg.mode.name().to_string(),
        learner,
        dataset: dataset_label,
        k: cfg.k,
        base_seed: cfg.seed,
        test_fraction: cfg.test_fraction,
        lambda_grid: match cfg.mode {
            Mode::Nested => cfg.lambda_grid.clone(),
            _ => Vec::new(),
        },
        aggregate: aggregate(&rows),
        rows,
    };

    let report = first_report.expect("at least one repeat ran");
    write_atomic(&cfg.output_dir.join("runs.csv"), &runs_csv(&record)?)?;
    write_atomic(&cfg.output_dir.join("runs.json"), record.to_json()?.as_bytes())?;
    write_atomic(&cfg.output_dir.join("report.json"), report.to_json()?.as_bytes())?;
    Ok(record)
}

/// The `runs.csv` bytes for a record: one header row, one row per repeat,
/// `None` cells left empty.
pub fn runs_csv(record: &RunRecord) -> Result<Vec<u8>> {
    let csv_err = |e: csv::Error| Error::Data(format!("runs.csv serialization failed: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "repeat",
        "seed",
        "learner",
        "theta_star",
        "lambda_star",
        "estimate",
        "test_mse",
        "sparsity",
        "bound",
    ])
    .map_err(csv_err)?;
    for row in &record.rows {
        w.write_record([
            row.repeat.to_string(),
            row.seed.to_string(),
            row.learner.name().to_string(),
            row.theta_star.to_string(),
            row.lambda_star.map_or_else(String::new, |l| l.to_string()),
            row.estimate.to_string(),
            row.test_mse.to_string(),
            row.sparsity.map_or_else(String::new, |s| s.to_string()),
            row.bound.map_or_else(String::new, |b| b.to_string()),
        ])
        .map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| Error::Data(format!("runs.csv serialization failed: {e}")))
}

/// Compute CV and test error surfaces on one synthetic instance and write
/// their CSV and SVG renderings into `out_dir`.
pub fn run_heatmap(synth: &SynthConfig, kind: CvKind, out_dir: &Path) -> Result<HeatmapResult> {
    let taus = default_tau_grid(synth);
    let gammas = default_gamma_grid();
    let result = heatmap_experiment(synth, &taus, &gammas, kind)?;
    for which in [HeatmapMatrix::Cv, HeatmapMatrix::Test] {
        write_atomic(
            &out_dir.join(result.csv_filename(which)),
            result.to_csv(which).as_bytes(),
        )?;
        write_atomic(
            &out_dir.join(result.svg_filename(which)),
            result.to_svg(which).as_bytes(),
        )?;
    }
    Ok(result)
}

/// [`run_heatmap`] driven by an [`ExperimentConfig`] in heatmap mode.
pub fn run_heatmap_config(cfg: &ExperimentConfig) -> Result<HeatmapResult> {
    let spec = cfg.synth_spec()?;
    run_heatmap(&spec.config(cfg.seed), cfg.cv, &cfg.output_dir)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;
    use std::io::Write as _;

    fn tiny_synth_config(mode: Mode) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::from_text(
            "dataset = synth\n\
             learner = ridge\n\
             n = 30\n\
             p = 4\n\
             tau_true = 2\n\
             rho = 0.2\n\
             nu = 5.0\n\
             n_test = 40\n\
             k = 3\n\
             repeats = 3\n\
             seed = 11\n\
             gamma_grid = 0.1, 1.0, 10.0\n\
             lambda_grid = 0.0, 1.0\n",
        )
        .unwrap();
        cfg.mode = mode;
        cfg
    }

    #[test]
    fn split_indices_partition_the_rows() {
        let (train, test) = split_indices(23, 0.1, 5).unwrap();
        assert_eq!(test.len(), 3); // ceil(0.1 * 23)
        assert_eq!(train.len(), 20);
        assert!(train.windows(2).all(|w| w[0] < w[1]));
        assert!(test.windows(2).all(|w| w[0] < w[1]));
        let mut all: Vec<usize> = train.iter().chain(test.iter()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..23).collect::<Vec<_>>());
    }

    #[test]
    fn split_indices_are_seed_deterministic() {
        assert_eq!(split_indices(40, 0.25, 9).unwrap(), split_indices(40, 0.25, 9).unwrap());
        assert_ne!(
            split_indices(40, 0.25, 9).unwrap().1,
            split_indices(40, 0.25, 10).unwrap().1
        );
    }

    #[test]
    fn split_indices_reject_degenerate_requests() {
        assert!(split_indices(3, 0.9, 0).is_err());
        assert!(split_indices(10, 0.0, 0).is_err());
        assert!(split_indices(10, 1.0, 0).is_err());
    }

    #[test]
    fn unconfigured_grids_match_the_learner_defaults() {
        let cfg = ExperimentConfig::from_text("mode = kcv\n").unwrap();
        for kind in [LearnerKind::Ridge, LearnerKind::SparseRidge, LearnerKind::Cart] {
            let built = build_grid(&cfg, kind, 25, 6).unwrap();
            let default = default_grid(kind, 25, 6).unwrap();
            assert_eq!(built.points(), default.points(), "{kind:?}");
        }
    }

    #[test]
    fn configured_grid_axes_override_the_defaults() {
        let cfg = ExperimentConfig::from_text("gamma_grid = 0.5, 2.0\ntau_grid = 1, 3\n").unwrap();
        let grid = build_grid(&cfg, LearnerKind::SparseRidge, 25, 6).unwrap();
        assert_eq!(
            grid.points(),
            vec![
                HyperParams::SparseRidge { tau: 1, gamma: 0.5 },
                HyperParams::SparseRidge { tau: 1, gamma: 2.0 },
                HyperParams::SparseRidge { tau: 3, gamma: 0.5 },
                HyperParams::SparseRidge { tau: 3, gamma: 2.0 },
            ]
        );
    }

    #[test]
    fn aggregate_means_match_direct_recomputation() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_synth_config(Mode::Kcv);
        cfg.output_dir = dir.path().to_path_buf();
        let record = run_experiment(&cfg).unwrap();
        assert_eq!(record.rows.len(), 3);
        let n = record.rows.len() as f64;
        let mean_est: f64 = record.rows.iter().map(|r| r.estimate).sum::<f64>() / n;
        let mean_test: f64 = record.rows.iter().map(|r| r.test_mse).sum::<f64>() / n;
        assert!((record.aggregate.mean_estimate - mean_est).abs() <= 1e-12);
        assert!((record.aggregate.mean_test_mse - mean_test).abs() <= 1e-12);
        for (r, row) in record.rows.iter().enumerate() {
            assert_eq!(row.repeat, r);
            assert_eq!(row.seed, 11 + r as u64);
            assert!(row.test_mse.is_finite());
            assert_eq!(row.sparsity, Some(4));
            assert!(row.lambda_star.is_none());
        }
    }

    #[test]
    fn run_writes_the_three_report_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_synth_config(Mode::Kcv);
        cfg.output_dir = dir.path().to_path_buf();
        let record = run_experiment(&cfg).unwrap();

        let csv_text = fs::read_to_string(dir.path().join("runs.csv")).unwrap();
        let mut lines = csv_text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "repeat,seed,learner,theta_star,lambda_star,estimate,test_mse,sparsity,bound"
        );
        assert_eq!(lines.count(), record.rows.len());

        let runs_text = fs::read_to_string(dir.path().join("runs.json")).unwrap();
        let back = RunRecord::from_json(&runs_text).unwrap();
        assert_eq!(back.rows.len(), record.rows.len());
        assert_eq!(back.aggregate, record.aggregate);

        let report_text = fs::read_to_string(dir.path().join("report.json")).unwrap();
        let report = SelectionReport::from_json(&report_text).unwrap();
        assert_eq!(report.seed, record.rows[0].seed);
        assert_eq!(report.theta_star, record.rows[0].theta_star);
    }

    #[test]
    fn reruns_are_byte_identical() {
        let (dir_a, dir_b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let mut cfg = tiny_synth_config(Mode::Nested);
        cfg.repeats = 2;
        cfg.output_dir = dir_a.path().to_path_buf();
        run_experiment(&cfg).unwrap();
        cfg.output_dir = dir_b.path().to_path_buf();
        run_experiment(&cfg).unwrap();
        for name in ["runs.csv", "runs.json", "report.json"] {
            let a = fs::read(dir_a.path().join(name)).unwrap();
            let b = fs::read(dir_b.path().join(name)).unwrap();
            assert_eq!(a, b, "{name} differs between identical runs");
        }
    }

    #[test]
    fn kcv_and_nested_runs_pair_their_repeats() {
        let dir = tempfile::tempdir().unwrap();
        let mut kcv = tiny_synth_config(Mode::Kcv);
        kcv.repeats = 2;
        kcv.output_dir = dir.path().join("kcv");
        let mut nested = tiny_synth_config(Mode::Nested);
        nested.repeats = 2;
        nested.output_dir = dir.path().join("nested");
        let a = run_experiment(&kcv).unwrap();
        let b = run_experiment(&nested).unwrap();
        assert_eq!(a.base_seed, b.base_seed);
        assert_eq!(a.dataset, b.dataset);
        for (ra, rb) in a.rows.iter().zip(b.rows.iter()) {
            assert_eq!(ra.seed, rb.seed);
            assert!(rb.lambda_star.is_some());
        }
    }

    #[test]
    fn bound_mode_adds_a_bound_at_least_the_estimate() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = tiny_synth_config(Mode::Bound);
        cfg.repeats = 2;
        cfg.output_dir = dir.path().to_path_buf();
        let record = run_experiment(&cfg).unwrap();
        for row in &record.rows {
            let bound = row.bound.expect("bound mode fills the bound column");
            assert!(bound >= row.estimate);
        }
        let csv_text = fs::read_to_string(dir.path().join("runs.csv")).unwrap();
        let last = csv_text.lines().last().unwrap();
        assert!(!last.ends_with(','), "bound column must be filled: {last}");
    }

    #[test]
    fn csv_datasets_run_end_to_end() {
        let dir = tempfile::tempdir().unwrap();
        let data_path = dir.path().join("toy.csv");
        let mut f = fs::File::create(&data_path).unwrap();
        writeln!(f, "y,x1,x2").unwrap();
        let mut state = 1u64;
        for i in 0..24 {
            // Small linear-congruential noise keeps the fixture dependency-free.
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let noise = (state >> 33) as f64 / (1u64 << 31) as f64 - 0.5;
            let x1 = i as f64 / 6.0;
            let x2 = (i % 5) as f64;
            writeln!(f, "{},{},{}", 2.0 * x1 - x2 + noise, x1, x2).unwrap();
        }
        drop(f);

        let text = format!(
            "mode = kcv\nlearner = ridge\ndataset = {}\nk = 3\nrepeats = 2\nseed = 4\n\
             gamma_grid = 0.1, 1.0\noutput_dir = {}\n",
            data_path.display(),
            dir.path().join("out").display()
        );
        let cfg = ExperimentConfig::from_text(&text).unwrap();
        let record = run_experiment(&cfg).unwrap();
        assert_eq!(record.rows.len(), 2);
        assert!(record.rows.iter().all(|r| r.test_mse.is_finite()));
        assert!(dir.path().join("out/runs.csv").exists());
    }

    #[test]
    fn heatmap_run_writes_four_files() {
        let dir = tempfile::tempdir().unwrap();
        let synth = SynthConfig {
            n: 12,
            p: 3,
            tau_true: 2,
            rho: 0.1,
            nu: 2.0,
            n_test: 30,
            seed: 5,
        };
        let result = run_heatmap(&synth, CvKind::Fivefold, dir.path()).unwrap();
        assert_eq!(result.taus, vec![1, 2, 3]);
        assert_eq!(result.gammas.len(), 20);
        for name in [
            "heatmap_cv_fivefold.csv",
            "heatmap_test_fivefold.csv",
            "heatmap_cv_fivefold.svg",
            "heatmap_test_fivefold.svg",
        ] {
            assert!(dir.path().join(name).exists(), "{name} missing");
        }
    }

    #[test]
    fn heatmap_mode_is_rejected_by_run_experiment() {
        let cfg = tiny_synth_config(Mode::Heatmap);
        assert!(run_experiment(&cfg).is_err());
    }

    #[test]
    fn missing_dataset_or_learner_is_an_argument_error() {
        let cfg = ExperimentConfig::from_text("mode = kcv\nlearner = ridge\n").unwrap();
        assert!(matches!(run_experiment(&cfg), Err(Error::InvalidArgument(_))));
        let cfg = ExperimentConfig::from_text("mode = kcv\ndataset = synth\nn = 20\np = 3\ntau_true = 1\nrho = 0.0\nnu = 1.0\n").unwrap();
        assert!(matches!(run_experiment(&cfg), Err(Error::InvalidArgument(_))));
    }
}
