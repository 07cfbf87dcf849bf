//! The cross-validation engine.
//!
//! [`cv_evaluate`] scores one hyperparameter point by k-fold CV and,
//! optionally, by its empirical hypothesis stability. [`regularized_score`]
//! combines the two. [`coordinate_descent_select`] searches a grid at a
//! fixed stability weight, and [`nested_select`] chooses that weight by
//! nested cross-validation. [`generalization_bound`] turns a stability
//! estimate into a high-probability bound on out-of-sample error.

mod bound;
mod descent;
mod nested;
mod report;
mod session;

pub use bound::{generalization_bound, BoundInputs};
pub use descent::CdTrace;
pub use nested::{nested_select, retrain_final, SelectOptions};
pub use report::{SelectionReport, TraceEval, TraceStage, REPORT_SCHEMA};
pub use session::CacheMode;

use nalgebra::DVector;

use crate::data::{Dataset, FoldPartition, LossFn};
use crate::error::{Error, Result};
use crate::learners::{Fitter, HyperGrid, HyperParams};
use session::FitSession;

/// The k-fold evaluation of one hyperparameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct CVEvaluation {
    pub theta: HyperParams,
    /// Summed (not averaged) held-out loss per fold.
    pub partial_errors: Vec<f64>,
    /// `(1/n) * sum(partial_errors)`, summed in fold order.
    pub cv_error: f64,
    /// Empirical hypothesis stability, when requested.
    pub stability: Option<f64>,
    /// Model fits this evaluation asked for: k, plus 1 with stability.
    pub fit_count: usize,
    /// Largest single-point loss seen across the fold models (and the
    /// full-data model, with stability); an empirical stand-in for the
    /// loss bound M.
    pub max_pointwise_loss: f64,
}

/// Held-out losses of the leave-fold-out models, plus the full-data model.
struct FoldPredictions {
    /// `losses[j][i]` = pointwise loss of the fold-j model at sample i.
    losses: Vec<DVector<f64>>,
    full_losses: Option<DVector<f64>>,
}

fn pointwise_losses(
    session: &mut FitSession,
    pred: &DVector<f64>,
    loss: &LossFn,
) -> DVector<f64> {
    let y = session.data.response();
    let mut out = DVector::zeros(y.len());
    for i in 0..y.len() {
        let l = loss.loss(y[i], pred[i]);
        session.observe_loss(l);
        out[i] = l;
    }
    out
}

fn fold_predictions(
    session: &mut FitSession,
    theta: &HyperParams,
    loss: &LossFn,
    with_full: bool,
) -> Result<FoldPredictions> {
    let k = session.folds.k();
    let mut losses = Vec::with_capacity(k);
    for j in 0..k {
        let model = session
            .fit_excluding(&[j], theta)
            .map_err(|e| e.on_fold(j))?;
        let pred = model.predict_all(session.data.features())?;
        losses.push(pointwise_losses(session, &pred, loss));
    }
    let full_losses = if with_full {
        let model = session.fit_excluding(&[], theta)?;
        let pred = model.predict_all(session.data.features())?;
        Some(pointwise_losses(session, &pred, loss))
    } else {
        None
    };
    Ok(FoldPredictions { losses, full_losses })
}

fn cv_evaluate_in(
    session: &mut FitSession,
    theta: &HyperParams,
    loss: &LossFn,
    with_stability: bool,
) -> Result<CVEvaluation> {
    let folds = session.folds;
    let n = folds.n();
    let k = folds.k();
    let preds = fold_predictions(session, theta, loss, with_stability)?;

    let mut partial_errors = Vec::with_capacity(k);
    for j in 0..k {
        let h_j: f64 = folds.fold(j).iter().map(|&i| preds.losses[j][i]).sum();
        partial_errors.push(h_j);
    }
    let cv_error = partial_errors.iter().sum::<f64>() / n as f64;

    let stability = preds.full_losses.as_ref().map(|full| {
        let mut mu: f64 = 0.0;
        for j in 0..k {
            let total: f64 = (0..n).map(|i| (preds.losses[j][i] - full[i]).abs()).sum();
            mu = mu.max(total / n as f64);
        }
        mu
    });

    let max_pointwise_loss = preds
        .losses
        .iter()
        .chain(preds.full_losses.as_ref())
        .flat_map(|v| v.iter().copied())
        .fold(0.0, f64::max);

    Ok(CVEvaluation {
        theta: theta.clone(),
        partial_errors,
        cv_error,
        stability,
        fit_count: k + usize::from(with_stability),
        max_pointwise_loss,
    })
}

/// k-fold cross-validation of one hyperparameter point.
///
/// Each fold's partial error is the *sum* of held-out losses on that fold;
/// `cv_error` is their total divided by n. With `with_stability`, the
/// empirical hypothesis stability is also computed: the largest, over
/// folds, average absolute difference (across all n samples) between the
/// pointwise losses of the leave-fold-out model and the full-data model.
pub fn cv_evaluate(
    data: &Dataset,
    folds: &FoldPartition,
    fitter: &dyn Fitter,
    theta: &HyperParams,
    loss: &LossFn,
    with_stability: bool,
) -> Result<CVEvaluation> {
    if folds.n() != data.n() {
        return Err(Error::InvalidArgument(format!(
            "fold partition covers n={} but data has n={}",
            folds.n(),
            data.n()
        )));
    }
    let mut session = FitSession::new(fitter, data, folds, CacheMode::Full);
    cv_evaluate_in(&mut session, theta, loss, with_stability)
}

/// `cv_error + lambda * stability`; the evaluation must carry stability.
pub fn regularized_score(eval: &CVEvaluation, lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    let mu = eval.stability.ok_or_else(|| {
        Error::InvalidArgument("evaluation carries no stability estimate".into())
    })?;
    Ok(eval.cv_error + lambda * mu)
}

/// Result of a single coordinate-descent hyperparameter search.
#[derive(Debug, Clone)]
pub struct CdSelection {
    pub theta_star: HyperParams,
    /// The regularized score at `theta_star` (plain CV error when lambda = 0).
    pub score: f64,
    pub trace: CdTrace,
    /// Actual model fits performed (after caching).
    pub total_fits: u64,
    pub max_observed_loss: f64,
}

/// Coordinate descent over `grid` at a fixed stability weight `lambda`.
///
/// Sweeps one axis at a time, holding the others fixed, moving to the
/// best point of each sweep; stops after a full cycle without movement or
/// after `max_cycles` cycles. With lambda = 0 the score is the plain CV
/// error (k fits per point); with lambda > 0 each point also needs the
/// full-data fit for its stability term. Ties are broken toward the
/// smaller hyperparameters, so the search is deterministic. A degenerate
/// single-axis grid makes this exhaustive search.
#[allow(clippy::too_many_arguments)]
pub fn coordinate_descent_select(
    data: &Dataset,
    folds: &FoldPartition,
    fitter: &dyn Fitter,
    grid: &HyperGrid,
    lambda: f64,
    loss: &LossFn,
    init: Option<&HyperParams>,
    max_cycles: usize,
) -> Result<CdSelection> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "lambda must be finite and >= 0, got {lambda}"
        )));
    }
    if folds.n() != data.n() {
        return Err(Error::InvalidArgument(format!(
            "fold partition covers n={} but data has n={}",
            folds.n(),
            data.n()
        )));
    }
    let init_idx = match init {
        Some(theta) => grid
            .position_of(theta)
            .ok_or_else(|| Error::InvalidArgument(format!("init {theta} is not on the grid")))?,
        None => grid.default_init(),
    };
    let with_stability = lambda > 0.0;
    let mut session = FitSession::new(fitter, data, folds, CacheMode::Full);
    let outcome = descent::coordinate_descent(grid, &init_idx, max_cycles, |theta| {
        let eval = cv_evaluate_in(&mut session, theta, loss, with_stability)?;
        if with_stability {
            regularized_score(&eval, lambda)
        } else {
            Ok(eval.cv_error)
        }
    })?;
    Ok(CdSelection {
        theta_star: outcome.theta,
        score: outcome.score,
        trace: outcome.trace,
        total_fits: session.fits,
        max_observed_loss: session.max_observed_loss,
    })
}
