//! Structured results of a hyperparameter-selection run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{HyperParams, LearnerKind};

/// Schema tag written into every serialized report.
pub const REPORT_SCHEMA: &str = "stabcv-report/1";

/// One scored hyperparameter point inside a coordinate-descent stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEval {
    /// The hyperparameters evaluated.
    pub theta: HyperParams,
    /// The score minimized by the stage (CV error, possibly stability
    /// regularized).
    pub score: f64,
}

/// Log of one coordinate-descent stage of a selection run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceStage {
    /// `"inner"` for a per-(lambda, fold) search, `"final"` for the
    /// full-data search at the chosen lambda.
    pub stage: String,
    /// Stability weight used by this stage, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Outer fold held out by this stage (inner stages only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outer_fold: Option<usize>,
    /// Every distinct point evaluated, in first-evaluation order.
    pub evaluations: Vec<TraceEval>,
    /// The point the stage settled on.
    pub chosen: HyperParams,
    /// Coordinate-descent cycles performed.
    pub cycles: usize,
    /// Whether the stage converged before hitting the cycle limit.
    pub converged: bool,
}

/// Outcome of a hyperparameter-selection run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionReport {
    /// Schema tag, [`REPORT_SCHEMA`].
    pub schema: String,
    /// Learner family searched over.
    pub learner: LearnerKind,
    /// Number of folds.
    pub k: usize,
    /// Seed used to draw the fold partition.
    pub seed: u64,
    /// Candidate stability weights (empty for a plain CV run).
    pub lambda_grid: Vec<f64>,
    /// Chosen stability weight, if one was selected.
    pub lambda_star: Option<f64>,
    /// Chosen hyperparameters.
    pub theta_star: HyperParams,
    /// Error estimate backing the choice: the nested-CV estimate at
    /// `lambda_star`, or the plain CV error for an unregularized run.
    pub estimate: f64,
    /// Empirical hypothesis stability of `theta_star` on the full data.
    pub stability_at_star: f64,
    /// Total model fits performed, counting cache hits once.
    pub total_fits: u64,
    /// Distinct hyperparameter points evaluated anywhere in the run.
    pub theta_visited: Vec<HyperParams>,
    /// Largest single-point loss observed across all fitted models;
    /// serves as the empirical fallback for the loss bound M.
    pub max_observed_loss: f64,
    /// Per-outer-fold validation scores at `lambda_star`, when nested.
    pub per_fold_outer_scores: Option<Vec<f64>>,
    /// Non-fatal conditions encountered during the run.
    pub warnings: Vec<String>,
    /// Stage-by-stage coordinate-descent log.
    pub trace: Vec<TraceStage>,
}

impl SelectionReport {
    /// Serialize to pretty JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Data(format!("report serialization failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    /// Deserialize from JSON, rejecting unknown schema tags.
    pub fn from_json(text: &str) -> Result<Self> {
        let report: SelectionReport = serde_json::from_str(text)
            .map_err(|e| Error::Data(format!("report parse failed: {e}")))?;
        if report.schema != REPORT_SCHEMA {
            return Err(Error::Data(format!(
                "unsupported report schema '{}', expected '{REPORT_SCHEMA}'",
                report.schema
            )));
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report() -> SelectionReport {
        SelectionReport {
            schema: REPORT_SCHEMA.to_string(),
            learner: LearnerKind::Ridge,
            k: 5,
            seed: 7,
            lambda_grid: vec![0.0, 1.0],
            lambda_star: Some(1.0),
            theta_star: HyperParams::Ridge { gamma: 2.5 },
            estimate: 0.25,
            stability_at_star: 0.01,
            total_fits: 42,
            theta_visited: vec![HyperParams::Ridge { gamma: 2.5 }],
            max_observed_loss: 3.0,
            per_fold_outer_scores: Some(vec![0.2, 0.3, 0.25, 0.25, 0.25]),
            warnings: vec![],
            trace: vec![TraceStage {
                stage: "final".to_string(),
                lambda: Some(1.0),
                outer_fold: None,
                evaluations: vec![TraceEval {
                    theta: HyperParams::Ridge { gamma: 2.5 },
                    score: 0.25,
                }],
                chosen: HyperParams::Ridge { gamma: 2.5 },
                cycles: 2,
                converged: true,
            }],
        }
    }

    #[test]
    fn json_round_trip_preserves_the_report() {
        let report = sample_report();
        let text = report.to_json().unwrap();
        let back = SelectionReport::from_json(&text).unwrap();
        assert_eq!(back.theta_star, report.theta_star);
        assert_eq!(back.lambda_star, report.lambda_star);
        assert_eq!(back.estimate, report.estimate);
        assert_eq!(back.total_fits, report.total_fits);
        assert_eq!(back.per_fold_outer_scores, report.per_fold_outer_scores);
        assert_eq!(back.trace.len(), 1);
    }

    #[test]
    fn json_carries_the_schema_tag_and_required_fields() {
        let text = sample_report().to_json().unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["schema"], "stabcv-report/1");
        for field in [
            "learner",
            "k",
            "seed",
            "lambda_grid",
            "lambda_star",
            "theta_star",
            "estimate",
            "stability_at_star",
            "total_fits",
            "per_fold_outer_scores",
            "trace",
        ] {
            assert!(!value[field].is_null() || field == "lambda_star", "{field}");
            assert!(
                value.get(field).is_some(),
                "missing field {field} in serialized report"
            );
        }
    }

    #[test]
    fn unknown_schema_is_rejected() {
        let mut report = sample_report();
        report.schema = "stabcv-report/9".to_string();
        let text = serde_json::to_string(&report).unwrap();
        assert!(SelectionReport::from_json(&text).is_err());
    }

    #[test]
    fn serialized_text_ends_with_a_newline() {
        assert!(sample_report().to_json().unwrap().ends_with('\n'));
    }
}
