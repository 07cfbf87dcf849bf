//! Cyclic coordinate descent over a hyperparameter grid.

use std::collections::HashMap;

use crate::error::Result;
use crate::learners::{HyperGrid, HyperParams};

/// Log of one coordinate-descent run.
#[derive(Debug, Clone)]
pub struct CdTrace {
    /// Every distinct point evaluated, in first-evaluation order.
    pub evaluations: Vec<(HyperParams, f64)>,
    /// Position after each axis sweep.
    pub path: Vec<HyperParams>,
    /// Full cycles performed.
    pub cycles: usize,
    /// Whether a cycle finished without movement (as opposed to hitting
    /// the cycle limit).
    pub converged: bool,
    /// Points whose score was non-finite (treated as +infinity).
    pub non_finite: Vec<HyperParams>,
}

pub(crate) struct CdOutcome {
    pub theta: HyperParams,
    pub score: f64,
    pub trace: CdTrace,
}

/// Treat non-finite scores as +infinity so the argmin stays total.
fn ranking_key(score: f64) -> f64 {
    if score.is_finite() {
        score
    } else {
        f64::INFINITY
    }
}

/// Run cyclic coordinate descent from `init` (a grid index vector).
///
/// Each sweep evaluates every value of one axis with the other axes held
/// at the current position and moves to the sweep's best point, breaking
/// ties by the hyperparameter ordering. The score at the current position
/// never increases, so the final point is the best point evaluated
/// anywhere in the run. Because sweeps are axis-aligned, the run can stop
/// at a coordinate-wise minimum that is not the global grid minimum.
pub(crate) fn coordinate_descent<F>(
    grid: &HyperGrid,
    init: &[usize],
    max_cycles: usize,
    mut eval: F,
) -> Result<CdOutcome>
where
    F: FnMut(&HyperParams) -> Result<f64>,
{
    assert_eq!(init.len(), grid.n_axes(), "init arity mismatch");
    let mut memo: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut trace = CdTrace {
        evaluations: Vec::new(),
        path: Vec::new(),
        cycles: 0,
        converged: false,
        non_finite: Vec::new(),
    };

    let mut pos = init.to_vec();
    let mut score_at = |idx: &[usize],
                        memo: &mut HashMap<Vec<usize>, f64>,
                        trace: &mut CdTrace|
     -> Result<f64> {
        if let Some(&s) = memo.get(idx) {
            return Ok(s);
        }
        let theta = grid.theta_at(idx);
        let s = eval(&theta)?;
        memo.insert(idx.to_vec(), s);
        trace.evaluations.push((theta.clone(), s));
        if !s.is_finite() {
            trace.non_finite.push(theta);
        }
        Ok(s)
    };

    score_at(&pos, &mut memo, &mut trace)?;
    for _cycle in 0..max_cycles {
        let cycle_start = pos.clone();
        for axis in 0..grid.n_axes() {
            let mut best_idx = pos.clone();
            let mut best_score = f64::INFINITY;
            let mut best_theta: Option<HyperParams> = None;
            for v in 0..grid.axis_len(axis) {
                let mut idx = pos.clone();
                idx[axis] = v;
                let s = ranking_key(score_at(&idx, &mut memo, &mut trace)?);
                let theta = grid.theta_at(&idx);
                let better = match best_theta.as_ref() {
                    None => true,
                    Some(bt) => s < best_score || (s == best_score && theta < *bt),
                };
                if better {
                    best_idx = idx;
                    best_score = s;
                    best_theta = Some(theta);
                }
            }
            pos = best_idx;
            trace.path.push(grid.theta_at(&pos));
        }
        trace.cycles += 1;
        if pos == cycle_start {
            trace.converged = true;
            break;
        }
    }

    let score = memo[&pos];
    Ok(CdOutcome {
        theta: grid.theta_at(&pos),
        score,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learners::HyperGrid;

    fn two_by_two() -> HyperGrid {
        // tau in {1, 2} x gamma in {1, 2}; tau is axis 0.
        HyperGrid::sparse_ridge(vec![1, 2], vec![1.0, 2.0]).unwrap()
    }

    #[test]
    fn stops_at_coordinate_wise_minimum() {
        // Scores laid out so the start (0,0) beats both axis neighbours
        // while the global minimum sits at the opposite corner.
        let grid = two_by_two();
        let score = |t: &HyperParams| match t {
            HyperParams::SparseRidge { tau: 1, gamma } if *gamma == 1.0 => 1.0,
            HyperParams::SparseRidge { tau: 1, .. } => 3.0,
            HyperParams::SparseRidge { tau: 2, gamma } if *gamma == 1.0 => 2.0,
            _ => 0.0,
        };
        let out = coordinate_descent(&grid, &[0, 0], 10, |t| Ok(score(t))).unwrap();
        assert_eq!(out.score, 1.0);
        assert_eq!(out.theta, HyperParams::SparseRidge { tau: 1, gamma: 1.0 });
        assert!(out.trace.converged);
        // The global optimum (score 0) was never reachable axis-by-axis.
        assert!(out.trace.evaluations.iter().all(|(_, s)| *s > 0.0));
    }

    #[test]
    fn single_axis_equals_exhaustive_search() {
        let grid = HyperGrid::ridge(vec![0.5, 1.0, 2.0, 4.0, 8.0]).unwrap();
        let score = |t: &HyperParams| match t {
            HyperParams::Ridge { gamma } => (gamma - 2.0).abs(),
            _ => unreachable!(),
        };
        let out = coordinate_descent(&grid, &[0], 10, |t| Ok(score(t))).unwrap();
        assert_eq!(out.theta, HyperParams::Ridge { gamma: 2.0 });
        assert_eq!(out.trace.evaluations.len(), 5);
        assert!(out.trace.cycles <= 2);
    }

    #[test]
    fn ties_break_toward_smaller_hyperparameters() {
        let grid = two_by_two();
        let out = coordinate_descent(&grid, &[1, 1], 10, |_| Ok(1.0)).unwrap();
        assert_eq!(out.theta, HyperParams::SparseRidge { tau: 1, gamma: 1.0 });
    }

    #[test]
    fn non_finite_scores_are_avoided_and_flagged() {
        // The start point scores NaN, so the first tau sweep (gamma held
        // at 1.0) must escape to the finite neighbour on its axis.
        let grid = two_by_two();
        let out = coordinate_descent(&grid, &[0, 0], 10, |t| match t {
            HyperParams::SparseRidge { tau: 1, gamma } if *gamma == 1.0 => Ok(f64::NAN),
            HyperParams::SparseRidge { tau, gamma } => Ok(*tau as f64 + gamma),
            _ => unreachable!(),
        })
        .unwrap();
        assert_eq!(out.theta, HyperParams::SparseRidge { tau: 2, gamma: 1.0 });
        assert_eq!(out.score, 3.0);
        assert_eq!(out.trace.non_finite.len(), 1);
        assert_eq!(
            out.trace.non_finite[0],
            HyperParams::SparseRidge { tau: 1, gamma: 1.0 }
        );
    }

    #[test]
    fn separable_scores_reach_the_global_minimum_in_two_cycles() {
        // With additively separable scores every axis sweep solves its own
        // axis, so two cycles suffice for any start.
        let taus: Vec<usize> = (1..=7).collect();
        let gammas: Vec<f64> = (1..=9).map(|i| i as f64).collect();
        let grid = HyperGrid::sparse_ridge(taus, gammas).unwrap();
        for start in [[0usize, 0usize], [6, 8], [3, 4]] {
            let out = coordinate_descent(&grid, &start, 10, |t| match t {
                HyperParams::SparseRidge { tau, gamma } => {
                    Ok((*tau as f64 - 5.0).powi(2) + (gamma - 3.0).powi(2))
                }
                _ => unreachable!(),
            })
            .unwrap();
            assert_eq!(out.theta, HyperParams::SparseRidge { tau: 5, gamma: 3.0 });
            assert!(out.trace.cycles <= 2, "cycles = {}", out.trace.cycles);
        }
    }
}
