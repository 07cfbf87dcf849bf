//! Nested cross-validation: choose the stability weight out-of-sample,
//! then the hyperparameters under that weight.

use std::collections::{BTreeSet, HashMap};

use crate::cv::report::{SelectionReport, TraceEval, TraceStage, REPORT_SCHEMA};
use crate::cv::session::{CacheMode, FitSession};
use crate::cv::{cv_evaluate_in, descent, CVEvaluation};
use crate::data::{make_folds, Dataset, LossFn};
use crate::error::{Error, Result};
use crate::learners::{FittedModel, Fitter, HyperGrid, HyperParams};

/// Knobs for [`nested_select`] beyond the required arguments.
#[derive(Debug, Clone)]
pub struct SelectOptions {
    /// Cycle limit for every coordinate-descent stage.
    pub max_cycles: usize,
    /// Cache scope for fitted models. `Full` shares fits across the whole
    /// run, so a hyperparameter point revisited under another stability
    /// weight or outer fold is never refit; `Scoped` forgets models
    /// between stages.
    pub cache: CacheMode,
    /// Starting point for every coordinate-descent stage; the grid's
    /// default starting point when `None`.
    pub init: Option<HyperParams>,
}

impl Default for SelectOptions {
    fn default() -> Self {
        SelectOptions {
            max_cycles: 10,
            cache: CacheMode::Full,
            init: None,
        }
    }
}

/// Inner-loop statistics of one hyperparameter point with one outer fold
/// held out. Both are independent of the stability weight.
#[derive(Debug, Clone, Copy)]
struct InnerStats {
    /// Mean over the remaining folds of the fold's mean held-out loss
    /// under the model trained without that fold (nor the outer fold).
    s_tilde: f64,
    /// Stability proxy: worst average absolute loss change, over the
    /// samples outside the outer fold, from additionally dropping one
    /// remaining fold.
    mu: f64,
}

fn inner_stats(
    session: &mut FitSession,
    t: usize,
    theta: &HyperParams,
    loss: &LossFn,
) -> Result<InnerStats> {
    let data = session.data;
    let folds = session.folds;
    let k = folds.k();
    let rest = folds.complement(&[t]);

    let outer = session
        .fit_excluding(&[t], theta)
        .map_err(|e| e.on_fold(t))?;
    let outer_pred = outer.predict_all(data.features())?;
    let mut outer_loss = vec![0.0; data.n()];
    for &i in &rest {
        let l = loss.loss(data.response()[i], outer_pred[i]);
        session.observe_loss(l);
        outer_loss[i] = l;
    }

    let mut s_sum = 0.0;
    let mut mu: f64 = 0.0;
    for t2 in 0..k {
        if t2 == t {
            continue;
        }
        let mut exclude = [t, t2];
        exclude.sort_unstable();
        let pair = session
            .fit_excluding(&exclude, theta)
            .map_err(|e| e.on_fold(t2))?;
        let pair_pred = pair.predict_all(data.features())?;
        let mut pair_loss = vec![0.0; data.n()];
        let mut diff_total = 0.0;
        for &i in &rest {
            let l = loss.loss(data.response()[i], pair_pred[i]);
            session.observe_loss(l);
            pair_loss[i] = l;
            diff_total += (l - outer_loss[i]).abs();
        }
        let fold = folds.fold(t2);
        let s_t2 = fold.iter().map(|&i| pair_loss[i]).sum::<f64>() / fold.len() as f64;
        s_sum += s_t2;
        mu = mu.max(diff_total / rest.len() as f64);
    }
    Ok(InnerStats {
        s_tilde: s_sum / (k - 1) as f64,
        mu,
    })
}

/// Mean held-out loss of the leave-fold-`t`-out model on fold `t`. The
/// model is already in the session cache from the inner search, so this
/// adds no fits.
fn outer_fold_score(
    session: &mut FitSession,
    t: usize,
    theta: &HyperParams,
    loss: &LossFn,
) -> Result<f64> {
    let data = session.data;
    let folds = session.folds;
    let model = session
        .fit_excluding(&[t], theta)
        .map_err(|e| e.on_fold(t))?;
    let pred = model.predict_all(data.features())?;
    let fold = folds.fold(t);
    let mut total = 0.0;
    for &i in fold {
        let l = loss.loss(data.response()[i], pred[i]);
        session.observe_loss(l);
        total += l;
    }
    Ok(total / fold.len() as f64)
}

fn stage_from(outcome: &descent::CdOutcome, stage: &str, lambda: f64, t: Option<usize>) -> TraceStage {
    TraceStage {
        stage: stage.to_string(),
        lambda: Some(lambda),
        outer_fold: t,
        evaluations: outcome
            .trace
            .evaluations
            .iter()
            .map(|(theta, score)| TraceEval {
                theta: theta.clone(),
                score: *score,
            })
            .collect(),
        chosen: outcome.theta.clone(),
        cycles: outcome.trace.cycles,
        converged: outcome.trace.converged,
    }
}

/// Rank non-finite values last so every argmin is total.
fn ranking_key(value: f64) -> f64 {
    if value.is_finite() {
        value
    } else {
        f64::INFINITY
    }
}

/// Select a stability weight and hyperparameters by nested k-fold
/// cross-validation.
///
/// For each candidate weight `lambda` and each outer fold `t`, a
/// coordinate-descent search runs on the data without fold `t`: each
/// point's score is the mean inner CV error over the remaining folds plus
/// `lambda` times an inner stability proxy, both computed without any
/// reference to fold `t`. The winner is scored by its leave-fold-`t`-out
/// model's mean loss on fold `t`; averaging those scores over folds gives
/// an honest estimate `m_bar` for each `lambda`, and the weight with the
/// smallest estimate wins (ties to the smaller weight).
///
/// A final coordinate-descent search then runs on the full dataset,
/// minimizing the k-fold CV error plus `lambda_star` times the full-data
/// empirical hypothesis stability. With `lambda_grid = [0.0]` this final
/// stage is exactly [`coordinate_descent_select`](crate::cv::coordinate_descent_select)
/// at weight zero — same folds, scores, and tie-breaking — while `estimate`
/// still carries the nested (honest) error estimate.
#[allow(clippy::too_many_arguments)]
pub fn nested_select(
    data: &Dataset,
    k: usize,
    fitter: &dyn Fitter,
    grid: &HyperGrid,
    lambda_grid: &[f64],
    loss: &LossFn,
    seed: u64,
    options: &SelectOptions,
) -> Result<SelectionReport> {
    if lambda_grid.is_empty() {
        return Err(Error::InvalidArgument(
            "lambda grid must contain at least one weight".into(),
        ));
    }
    for &lambda in lambda_grid {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "lambda grid entries must be finite and >= 0, got {lambda}"
            )));
        }
    }
    let folds = make_folds(data.n(), k, seed)?;
    let init_idx = match &options.init {
        Some(theta) => grid
            .position_of(theta)
            .ok_or_else(|| Error::InvalidArgument(format!("init {theta} is not on the grid")))?,
        None => grid.default_init(),
    };

    let mut session = FitSession::new(fitter, data, &folds, options.cache);
    let mut visited: BTreeSet<HyperParams> = BTreeSet::new();
    let mut warnings: Vec<String> = Vec::new();
    let mut trace: Vec<TraceStage> = Vec::new();
    if data.n() % k != 0 {
        warnings.push(format!(
            "n = {} is not divisible by k = {k}; folds are unbalanced, so the \
             generalization bound is heuristic",
            data.n()
        ));
    }

    // The inner statistics do not depend on lambda, so with a run-wide
    // model cache they can be reused verbatim across the lambda grid.
    let share_stats = options.cache == CacheMode::Full;
    let mut stats_cache: HashMap<(usize, HyperParams), InnerStats> = HashMap::new();

    // (ranking key, estimate, lambda, per-fold outer scores)
    let mut best: Option<(f64, f64, f64, Vec<f64>)> = None;
    for &lambda in lambda_grid {
        let mut fold_scores = Vec::with_capacity(k);
        for t in 0..k {
            session.begin_context();
            let outcome = descent::coordinate_descent(grid, &init_idx, options.max_cycles, |theta| {
                let stats = match stats_cache.get(&(t, theta.clone())) {
                    Some(s) if share_stats => *s,
                    _ => {
                        let s = inner_stats(&mut session, t, theta, loss)?;
                        if share_stats {
                            stats_cache.insert((t, theta.clone()), s);
                        }
                        s
                    }
                };
                Ok(stats.s_tilde + lambda * stats.mu)
            })?;
            fold_scores.push(outer_fold_score(&mut session, t, &outcome.theta, loss)?);
            for (theta, _) in &outcome.trace.evaluations {
                visited.insert(theta.clone());
            }
            for theta in &outcome.trace.non_finite {
                warnings.push(format!(
                    "non-finite inner score at lambda = {lambda}, outer fold {t}, \
                     theta = {theta}; treated as +inf"
                ));
            }
            trace.push(stage_from(&outcome, "inner", lambda, Some(t)));
        }
        let m_bar = fold_scores.iter().sum::<f64>() / k as f64;
        let key = ranking_key(m_bar);
        let improves = match &best {
            None => true,
            Some((bk, _, bl, _)) => key < *bk || (key == *bk && lambda < *bl),
        };
        if improves {
            best = Some((key, m_bar, lambda, fold_scores));
        }
    }
    let (_, estimate, lambda_star, per_fold) = best.expect("lambda grid is nonempty");

    // Final stage: full-data search at the chosen weight. The score is the
    // k-fold CV error plus lambda_star times the full-data stability, via
    // the same evaluation path as a plain coordinate-descent run.
    session.begin_context();
    let mut final_evals: HashMap<HyperParams, CVEvaluation> = HashMap::new();
    let outcome = descent::coordinate_descent(grid, &init_idx, options.max_cycles, |theta| {
        let eval = cv_evaluate_in(&mut session, theta, loss, true)?;
        let mu = eval.stability.expect("stability requested");
        let score = eval.cv_error + lambda_star * mu;
        final_evals.insert(theta.clone(), eval);
        Ok(score)
    })?;
    for (theta, _) in &outcome.trace.evaluations {
        visited.insert(theta.clone());
    }
    for theta in &outcome.trace.non_finite {
        warnings.push(format!(
            "non-finite final score at lambda = {lambda_star}, theta = {theta}; \
             treated as +inf"
        ));
    }
    trace.push(stage_from(&outcome, "final", lambda_star, None));

    let theta_star = outcome.theta;
    let stability_at_star = final_evals[&theta_star]
        .stability
        .expect("stability requested");

    Ok(SelectionReport {
        schema: REPORT_SCHEMA.to_string(),
        learner: grid.learner(),
        k,
        seed,
        lambda_grid: lambda_grid.to_vec(),
        lambda_star: Some(lambda_star),
        theta_star,
        estimate,
        stability_at_star,
        total_fits: session.fits,
        theta_visited: visited.into_iter().collect(),
        max_observed_loss: session.max_observed_loss,
        per_fold_outer_scores: Some(per_fold),
        warnings,
        trace,
    })
}

/// Refit the selected hyperparameters on a full dataset.
///
/// Selection scored models trained on `n_train` of the `n` samples, so a
/// ridge weight tuned there is rescaled to `gamma * n_train / n` for the
/// full-data fit; hyperparameters without a ridge weight pass through
/// unchanged.
pub fn retrain_final(
    data: &Dataset,
    fitter: &dyn Fitter,
    theta_star: &HyperParams,
    n_train: usize,
) -> Result<FittedModel> {
    if n_train == 0 || n_train > data.n() {
        return Err(Error::InvalidArgument(format!(
            "n_train must lie in 1..={}, got {n_train}",
            data.n()
        )));
    }
    let theta = match theta_star.gamma() {
        Some(gamma) => theta_star.with_gamma(gamma * n_train as f64 / data.n() as f64),
        None => theta_star.clone(),
    };
    fitter.fit(data.features(), data.response(), &theta)
}
