//! High-probability bound on out-of-sample error for k-fold
//! cross-validated models of bounded-loss, hypothesis-stable learners.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Inputs to [`generalization_bound`].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundInputs {
    /// k-fold cross-validation error estimate.
    pub cv_error: f64,
    /// Empirical hypothesis stability of the learner on this data.
    pub mu_h: f64,
    /// Uniform bound on the loss function.
    pub m_bound: f64,
    /// Number of folds.
    pub k: usize,
    /// Failure probability; the bound holds with probability 1 - delta.
    pub delta: f64,
}

/// With probability at least `1 - delta`, the out-of-sample error is at
/// most
///
/// ```text
/// cv_error + sqrt((M^2 + 6 M k mu) / (2 k delta))
/// ```
///
/// where `M` bounds the loss and `mu` is the hypothesis stability. More
/// folds tighten the M^2 term; an unstable learner (large `mu`) gives up
/// that gain.
pub fn generalization_bound(inputs: &BoundInputs) -> Result<f64> {
    let BoundInputs {
        cv_error,
        mu_h,
        m_bound,
        k,
        delta,
    } = *inputs;
    if !cv_error.is_finite() || cv_error < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "cv_error must be finite and non-negative, got {cv_error}"
        )));
    }
    if !mu_h.is_finite() || mu_h < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "mu_h must be finite and non-negative, got {mu_h}"
        )));
    }
    if !m_bound.is_finite() || m_bound <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "m_bound must be finite and positive, got {m_bound}"
        )));
    }
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "bound requires at least 2 folds, got {k}"
        )));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "delta must lie in (0, 1), got {delta}"
        )));
    }
    let k = k as f64;
    let slack = (m_bound * m_bound + 6.0 * m_bound * k * mu_h) / (2.0 * k * delta);
    Ok(cv_error + slack.sqrt())
}
