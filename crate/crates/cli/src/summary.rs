//! Paired comparison of a candidate selection method against a baseline.
//!
//! Records pair up positionally: candidate d is compared with baseline d,
//! and the two must describe the same datasets, folds, and per-repeat
//! seeds — exactly what two runs that differ only in `mode` produce.

use serde::{Deserialize, Serialize};

use stabcv_core::{geometric_mean_ratio, Error, MetricSummary, Result};

use crate::experiment::RunRecord;

/// How a candidate method compares with a baseline over paired runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PairedSummary {
    /// Per-dataset test-MSE ratios (candidate / baseline), their geometric
    /// mean, and the candidate's relative estimate-vs-test gaps per run.
    pub metric: MetricSummary,
    /// Candidate mean of (estimate - test MSE) over every run.
    pub candidate_mean_gap: f64,
    /// Baseline mean of (estimate - test MSE) over every run.
    pub baseline_mean_gap: f64,
    /// Candidate median of |estimate - test MSE| over every run.
    pub candidate_median_abs_gap: f64,
    /// Baseline median of |estimate - test MSE| over every run.
    pub baseline_median_abs_gap: f64,
    /// Fraction of paired runs where both methods chose the same
    /// hyperparameters.
    pub theta_agreement: f64,
}

fn pairing_err(d: usize, what: impl std::fmt::Display) -> Error {
    Error::InvalidArgument(format!("records at position {d} are not paired: {what}"))
}

fn check_paired(d: usize, candidate: &RunRecord, baseline: &RunRecord) -> Result<()> {
    if candidate.dataset != baseline.dataset {
        return Err(pairing_err(
            d,
            format!("datasets '{}' vs '{}'", candidate.dataset, baseline.dataset),
        ));
    }
    if candidate.k != baseline.k {
        return Err(pairing_err(d, format!("k {} vs {}", candidate.k, baseline.k)));
    }
    if candidate.base_seed != baseline.base_seed {
        return Err(pairing_err(
            d,
            format!("base seeds {} vs {}", candidate.base_seed, baseline.base_seed),
        ));
    }
    if candidate.rows.len() != baseline.rows.len() {
        return Err(pairing_err(
            d,
            format!("{} vs {} repeats", candidate.rows.len(), baseline.rows.len()),
        ));
    }
    for (a, b) in candidate.rows.iter().zip(baseline.rows.iter()) {
        if a.seed != b.seed {
            return Err(pairing_err(
                d,
                format!("repeat {} seeds {} vs {}", a.repeat, a.seed, b.seed),
            ));
        }
    }
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn median_abs(values: &[f64]) -> f64 {
    let mut abs: Vec<f64> = values.iter().map(|v| v.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let m = abs.len();
    if m % 2 == 1 {
        abs[m / 2]
    } else {
        0.5 * (abs[m / 2 - 1] + abs[m / 2])
    }
}

/// Compare paired candidate and baseline records.
///
/// Dataset d contributes the test-MSE ratio
/// `candidates[d].aggregate.mean_test_mse / baselines[d].aggregate.mean_test_mse`;
/// the summary reports the geometric mean of those ratios, each method's
/// estimate-vs-test disappointment statistics over every run, and how
/// often the two methods agreed on the hyperparameters.
pub fn summarize(candidates: &[RunRecord], baselines: &[RunRecord]) -> Result<PairedSummary> {
    if candidates.len() != baselines.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot pair {} candidate records with {} baseline records",
            candidates.len(),
            baselines.len()
        )));
    }
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("no record pairs to summarize".into()));
    }

    let mut mse_pairs = Vec::with_capacity(candidates.len());
    let mut candidate_gaps = Vec::new();
    let mut baseline_gaps = Vec::new();
    let mut relative_gaps = Vec::new();
    let mut agreements = 0usize;
    let mut paired_rows = 0usize;

    for (d, (candidate, baseline)) in candidates.iter().zip(baselines.iter()).enumerate() {
        check_paired(d, candidate, baseline)?;
        mse_pairs.push((candidate.aggregate.mean_test_mse, baseline.aggregate.mean_test_mse));
        for (a, b) in candidate.rows.iter().zip(baseline.rows.iter()) {
            candidate_gaps.push(a.estimate - a.test_mse);
            baseline_gaps.push(b.estimate - b.test_mse);
            if a.test_mse > 0.0 {
                relative_gaps.push((a.estimate - a.test_mse) / a.test_mse);
            }
            if a.theta_star == b.theta_star {
                agreements += 1;
            }
            paired_rows += 1;
        }
    }

    let mut metric = geometric_mean_ratio(&mse_pairs)?;
    metric.cv_test_gap = relative_gaps;

    Ok(PairedSummary {
        metric,
        candidate_mean_gap: mean(&candidate_gaps),
        baseline_mean_gap: mean(&baseline_gaps),
        candidate_median_abs_gap: median_abs(&candidate_gaps),
        baseline_median_abs_gap: median_abs(&baseline_gaps),
        theta_agreement: agreements as f64 / paired_rows as f64,
    })
}

#[cfg(test)]
mod tests {
    use std::slice;

    use super::*;
    use crate::experiment::{aggregate, RunRow, RUNS_SCHEMA};
    use stabcv_core::{HyperParams, LearnerKind};

    fn record(seed: u64, rows: Vec<RunRow>) -> RunRecord {
        RunRecord {
            schema: RUNS_SCHEMA.to_string(),
            mode: "kcv".to_string(),
            learner: LearnerKind::Ridge,
            dataset: "synth(n=30,p=4,tau_true=2,rho=0.2,nu=5)".to_string(),
            k: 5,
            base_seed: seed,
            test_fraction: 0.1,
            lambda_grid: Vec::new(),
            aggregate: aggregate(&rows),
            rows,
        }
    }

    fn row(repeat: usize, seed: u64, gamma: f64, estimate: f64, test_mse: f64) -> RunRow {
        RunRow {
            repeat,
            seed,
            learner: LearnerKind::Ridge,
            theta_star: HyperParams::Ridge { gamma },
            lambda_star: None,
            estimate,
            test_mse,
            sparsity: Some(4),
            bound: None,
            wall_secs: 0.0,
        }
    }

    #[test]
    fn self_comparison_is_the_identity() {
        let records = [record(3, vec![row(0, 3, 1.0, 0.5, 0.6), row(1, 4, 2.0, 0.4, 0.3)])];
        let s = summarize(&records, &records).unwrap();
        assert_eq!(s.metric.per_dataset_ratios, vec![1.0]);
        assert!((s.metric.geometric_mean - 1.0).abs() < 1e-15);
        assert_eq!(s.theta_agreement, 1.0);
        assert_eq!(s.candidate_mean_gap, s.baseline_mean_gap);
    }

    #[test]
    fn geometric_mean_of_ratios_is_computed_over_datasets() {
        // Two datasets with candidate/baseline mean-test-MSE ratios 0.9
        // and 1.0: geometric mean sqrt(0.9) = 0.948683...
        let c1 = record(0, vec![row(0, 0, 1.0, 0.9, 0.9)]);
        let b1 = record(0, vec![row(0, 0, 1.0, 1.0, 1.0)]);
        let c2 = record(7, vec![row(0, 7, 2.0, 1.0, 1.0)]);
        let b2 = record(7, vec![row(0, 7, 1.0, 1.0, 1.0)]);
        let s = summarize(&[c1, c2], &[b1, b2]).unwrap();
        assert!((s.metric.geometric_mean - 0.9f64.sqrt()).abs() < 1e-12);
        assert_eq!(s.metric.per_dataset_ratios.len(), 2);
        // One of two paired rows agreed on theta.
        assert_eq!(s.theta_agreement, 0.5);
    }

    #[test]
    fn underpromising_estimates_give_a_negative_mean_gap() {
        let c = record(0, vec![row(0, 0, 1.0, 0.4, 0.8), row(1, 1, 1.0, 0.5, 0.7)]);
        let b = record(0, vec![row(0, 0, 1.0, 0.9, 0.8), row(1, 1, 1.0, 0.8, 0.7)]);
        let s = summarize(&[c], &[b]).unwrap();
        assert!(s.candidate_mean_gap < 0.0);
        assert!(s.baseline_mean_gap > 0.0);
        assert_eq!(s.candidate_median_abs_gap, 0.3);
        assert_eq!(s.metric.cv_test_gap.len(), 2);
        assert!(s.metric.cv_test_gap.iter().all(|g| *g < 0.0));
    }

    #[test]
    fn unpaired_records_are_rejected() {
        let a = record(0, vec![row(0, 0, 1.0, 0.5, 0.5)]);
        let mut b = record(0, vec![row(0, 0, 1.0, 0.5, 0.5)]);
        b.base_seed = 99;
        assert!(summarize(slice::from_ref(&a), &[b]).is_err());

        let mut c = record(0, vec![row(0, 0, 1.0, 0.5, 0.5)]);
        c.dataset = "other.csv".to_string();
        assert!(summarize(slice::from_ref(&a), &[c]).is_err());

        let d = record(0, vec![row(0, 0, 1.0, 0.5, 0.5), row(1, 1, 1.0, 0.5, 0.5)]);
        assert!(summarize(slice::from_ref(&a), &[d]).is_err());
        assert!(summarize(&[a], &[]).is_err());
        assert!(summarize(&[], &[]).is_err());
    }
}
