//! Hyperparameter grids and the default search spaces.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::learners::{HyperParams, LearnerKind};

/// `count` log-uniformly spaced values on `[min, max]`, endpoints exact.
pub fn log_uniform_grid(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if !(min.is_finite() && max.is_finite() && min > 0.0 && max > min) {
        return Err(Error::InvalidArgument(format!(
            "log grid needs 0 < min < max, got [{min}, {max}]"
        )));
    }
    if count < 2 {
        return Err(Error::InvalidArgument("log grid needs at least 2 points".into()));
    }
    let (lo, hi) = (min.log10(), max.log10());
    let mut values = Vec::with_capacity(count);
    values.push(min);
    for i in 1..count - 1 {
        let e = lo + (hi - lo) * i as f64 / (count - 1) as f64;
        values.push(10f64.powf(e));
    }
    values.push(max);
    Ok(values)
}

/// Largest `tau >= 1` with `tau * ln(tau) <= n`, capped at `p`.
///
/// Keeps the sparsity search within the regime where support recovery is
/// information-theoretically plausible.
pub fn max_tau(n: usize, p: usize) -> usize {
    let mut tau = 1usize;
    while tau < p {
        let next = (tau + 1) as f64;
        if next * next.ln() <= n as f64 {
            tau += 1;
        } else {
            break;
        }
    }
    tau
}

fn check_increasing<T: PartialOrd + Copy>(name: &str, v: &[T]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::InvalidArgument(format!("{name} axis must be non-empty")));
    }
    // `partial_cmp` keeps NaN-containing float axes rejected.
    if v.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(Ordering::Less)) {
        return Err(Error::InvalidArgument(format!(
            "{name} axis must be strictly increasing"
        )));
    }
    Ok(())
}

/// A per-learner hyperparameter grid.
///
/// Axes are stored in coordinate-descent sweep order: gamma for ridge;
/// (tau, gamma) for sparse ridge; (min_samples_split, max_depth) for CART,
/// whose depth starts pinned at its initial value while the split size is
/// swept first.
#[derive(Debug, Clone, PartialEq)]
pub enum HyperGrid {
    Ridge {
        gammas: Vec<f64>,
    },
    SparseRidge {
        taus: Vec<usize>,
        gammas: Vec<f64>,
    },
    Cart {
        max_depths: Vec<usize>,
        min_samples_splits: Vec<usize>,
    },
}

impl HyperGrid {
    pub fn ridge(gammas: Vec<f64>) -> Result<Self> {
        check_increasing("gamma", &gammas)?;
        if gammas.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::InvalidArgument("gamma grid must be positive".into()));
        }
        Ok(HyperGrid::Ridge { gammas })
    }

    pub fn sparse_ridge(taus: Vec<usize>, gammas: Vec<f64>) -> Result<Self> {
        check_increasing("tau", &taus)?;
        check_increasing("gamma", &gammas)?;
        if taus[0] < 1 {
            return Err(Error::InvalidArgument("tau grid must start at >= 1".into()));
        }
        if gammas.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::InvalidArgument("gamma grid must be positive".into()));
        }
        Ok(HyperGrid::SparseRidge { taus, gammas })
    }

    pub fn cart(max_depths: Vec<usize>, min_samples_splits: Vec<usize>) -> Result<Self> {
        check_increasing("max_depth", &max_depths)?;
        check_increasing("min_samples_split", &min_samples_splits)?;
        if max_depths[0] < 1 {
            return Err(Error::InvalidArgument("max_depth grid must start at >= 1".into()));
        }
        if min_samples_splits[0] < 2 {
            return Err(Error::InvalidArgument(
                "min_samples_split grid must start at >= 2".into(),
            ));
        }
        Ok(HyperGrid::Cart {
            max_depths,
            min_samples_splits,
        })
    }

    pub fn learner(&self) -> LearnerKind {
        match self {
            HyperGrid::Ridge { .. } => LearnerKind::Ridge,
            HyperGrid::SparseRidge { .. } => LearnerKind::SparseRidge,
            HyperGrid::Cart { .. } => LearnerKind::Cart,
        }
    }

    pub fn n_axes(&self) -> usize {
        match self {
            HyperGrid::Ridge { .. } => 1,
            _ => 2,
        }
    }

    /// Length of sweep axis `a`.
    pub fn axis_len(&self, a: usize) -> usize {
        match (self, a) {
            (HyperGrid::Ridge { gammas }, 0) => gammas.len(),
            (HyperGrid::SparseRidge { taus, .. }, 0) => taus.len(),
            (HyperGrid::SparseRidge { gammas, .. }, 1) => gammas.len(),
            (HyperGrid::Cart { min_samples_splits, .. }, 0) => min_samples_splits.len(),
            (HyperGrid::Cart { max_depths, .. }, 1) => max_depths.len(),
            _ => panic!("axis {a} out of range"),
        }
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        (0..self.n_axes()).map(|a| self.axis_len(a)).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The hyperparameters at a sweep-axis index vector.
    pub fn theta_at(&self, idx: &[usize]) -> HyperParams {
        match self {
            HyperGrid::Ridge { gammas } => HyperParams::Ridge { gamma: gammas[idx[0]] },
            HyperGrid::SparseRidge { taus, gammas } => HyperParams::SparseRidge {
                tau: taus[idx[0]],
                gamma: gammas[idx[1]],
            },
            HyperGrid::Cart {
                max_depths,
                min_samples_splits,
            } => HyperParams::Cart {
                max_depth: max_depths[idx[1]],
                min_samples_split: min_samples_splits[idx[0]],
            },
        }
    }

    /// Locate a point on the grid (exact match), if present.
    pub fn position_of(&self, theta: &HyperParams) -> Option<Vec<usize>> {
        match (self, theta) {
            (HyperGrid::Ridge { gammas }, HyperParams::Ridge { gamma }) => {
                Some(vec![gammas.iter().position(|g| g == gamma)?])
            }
            (HyperGrid::SparseRidge { taus, gammas }, HyperParams::SparseRidge { tau, gamma }) => {
                Some(vec![
                    taus.iter().position(|t| t == tau)?,
                    gammas.iter().position(|g| g == gamma)?,
                ])
            }
            (
                HyperGrid::Cart {
                    max_depths,
                    min_samples_splits,
                },
                HyperParams::Cart {
                    max_depth,
                    min_samples_split,
                },
            ) => Some(vec![
                min_samples_splits.iter().position(|m| m == min_samples_split)?,
                max_depths.iter().position(|d| d == max_depth)?,
            ]),
            _ => None,
        }
    }

    /// Default starting point for coordinate descent.
    ///
    /// Ridge starts at the first gamma, sparse ridge at the gamma-grid
    /// midpoint (tau is swept first, so its start is immaterial), CART at
    /// depth 5 (or the middle depth) with the split axis swept first.
    pub fn default_init(&self) -> Vec<usize> {
        match self {
            HyperGrid::Ridge { .. } => vec![0],
            HyperGrid::SparseRidge { gammas, .. } => vec![0, gammas.len() / 2],
            HyperGrid::Cart { max_depths, .. } => {
                let depth_idx = max_depths
                    .iter()
                    .position(|&d| d == 5)
                    .unwrap_or(max_depths.len() / 2);
                vec![0, depth_idx]
            }
        }
    }

    /// All grid points, outer axis first.
    pub fn points(&self) -> Vec<HyperParams> {
        let mut out = Vec::with_capacity(self.len());
        match self.n_axes() {
            1 => {
                for i in 0..self.axis_len(0) {
                    out.push(self.theta_at(&[i]));
                }
            }
            2 => {
                for i in 0..self.axis_len(0) {
                    for j in 0..self.axis_len(1) {
                        out.push(self.theta_at(&[i, j]));
                    }
                }
            }
            _ => unreachable!(),
        }
        out
    }
}

/// The default search space for a learner on an `n x p` training set.
///
/// Ridge: 20 gammas log-uniform on [1e-3, 1e3]. Sparse ridge: the same
/// gammas crossed with tau in `1..=max_tau(n, p)`. CART: depths 1..=10 by
/// split sizes 2..=10 (independent of the data shape).
pub fn default_grid(kind: LearnerKind, n: usize, p: usize) -> Result<HyperGrid> {
    match kind {
        LearnerKind::Ridge => HyperGrid::ridge(log_uniform_grid(1e-3, 1e3, 20)?),
        LearnerKind::SparseRidge => {
            let taus: Vec<usize> = (1..=max_tau(n, p)).collect();
            HyperGrid::sparse_ridge(taus, log_uniform_grid(1e-3, 1e3, 20)?)
        }
        LearnerKind::Cart => HyperGrid::cart((1..=10).collect(), (2..=10).collect()),
    }
}
