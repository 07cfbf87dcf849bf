//! Cross-method comparison metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Summary of a paired comparison between a candidate and a baseline method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    /// Per-dataset MSE ratios r_d = candidate / baseline.
    pub per_dataset_ratios: Vec<f64>,
    /// exp(mean(ln r_d)).
    pub geometric_mean: f64,
    /// Relative gap (estimate - test) / test per run, when available.
    pub cv_test_gap: Vec<f64>,
}

/// Geometric mean of per-dataset MSE ratios.
///
/// Each pair is `(candidate_mse, baseline_mse)`; both must be strictly
/// positive for the logarithm to exist.
pub fn geometric_mean_ratio(pairs: &[(f64, f64)]) -> Result<MetricSummary> {
    if pairs.is_empty() {
        return Err(Error::MetricDomain("no (candidate, baseline) pairs given".into()));
    }
    let mut ratios = Vec::with_capacity(pairs.len());
    let mut log_sum = 0.0;
    for (i, &(c, b)) in pairs.iter().enumerate() {
        if c <= 0.0 || b <= 0.0 || !c.is_finite() || !b.is_finite() {
            return Err(Error::MetricDomain(format!(
                "pair {i} has non-positive or non-finite MSE ({c}, {b})"
            )));
        }
        let r = c / b;
        log_sum += r.ln();
        ratios.push(r);
    }
    Ok(MetricSummary {
        geometric_mean: (log_sum / pairs.len() as f64).exp(),
        per_dataset_ratios: ratios,
        cv_test_gap: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn single_equal_pair_is_one() {
        let s = geometric_mean_ratio(&[(1.0, 1.0)]).unwrap();
        assert_eq!(s.geometric_mean, 1.0);
        assert_eq!(s.per_dataset_ratios, vec![1.0]);
    }

    #[test]
    fn reciprocal_ratios_cancel() {
        let s = geometric_mean_ratio(&[(0.5, 1.0), (2.0, 1.0)]).unwrap();
        assert_relative_eq!(s.geometric_mean, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn constant_ratio_is_preserved() {
        let s = geometric_mean_ratio(&[(0.9, 1.0), (0.9, 1.0)]).unwrap();
        assert_relative_eq!(s.geometric_mean, 0.9, max_relative = 1e-12);
    }

    #[test]
    fn rejects_degenerate_mse() {
        assert!(geometric_mean_ratio(&[]).is_err());
        assert!(geometric_mean_ratio(&[(0.0, 1.0)]).is_err());
        assert!(geometric_mean_ratio(&[(1.0, -2.0)]).is_err());
        assert!(geometric_mean_ratio(&[(1.0, f64::NAN)]).is_err());
    }

    proptest! {
        // Scaling both sides of every pair by a common factor leaves the
        // geometric mean unchanged.
        #[test]
        fn scale_invariance(
            pairs in proptest::collection::vec((1e-6f64..1e6, 1e-6f64..1e6), 1..20),
            scale in 1e-3f64..1e3,
        ) {
            let scaled: Vec<(f64, f64)> =
                pairs.iter().map(|&(c, b)| (c * scale, b * scale)).collect();
            let a = geometric_mean_ratio(&pairs).unwrap();
            let s = geometric_mean_ratio(&scaled).unwrap();
            prop_assert!((a.geometric_mean - s.geometric_mean).abs()
                <= 1e-9 * a.geometric_mean.abs().max(1.0));
        }
    }
}
