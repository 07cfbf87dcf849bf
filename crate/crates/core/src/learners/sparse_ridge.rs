//! Cardinality-constrained ridge regression by greedy rounding.
//!
//! Minimizes `(1/(2 gamma)) ||beta||^2 + (1/2) ||X beta - y||^2` subject to
//! `||beta||_0 <= tau`. Exact minimization is combinatorial, so we round a
//! ridge relaxation: fit full ridge, keep the `tau` features with the
//! largest `|beta_j| * ||X_j||`, refit exactly on that support, then make
//! one deterministic pass of single-feature swaps, accepting any swap that
//! strictly decreases the objective (at most `p` accepted swaps).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::learners::ridge::{normal_system, solve_spd, validate_gamma};
use crate::learners::{FittedModel, LearnerKind, ModelParams};

struct SupportWorkspace<'a> {
    xtx: &'a DMatrix<f64>,
    xty: &'a DVector<f64>,
    yty: f64,
    gamma: f64,
}

impl SupportWorkspace<'_> {
    /// Exact ridge refit restricted to `support` (ascending indices).
    ///
    /// Returns the support coefficients and the objective value. Since
    /// `G_S beta_S = b_S` at the refit, the objective collapses to
    /// `(y'y - b_S' beta_S) / 2`.
    fn refit(&self, support: &[usize]) -> Result<(DVector<f64>, f64)> {
        let t = support.len();
        let lambda = 1.0 / self.gamma;
        let mut g = DMatrix::zeros(t, t);
        let mut b = DVector::zeros(t);
        for (a, &ja) in support.iter().enumerate() {
            for (c, &jc) in support.iter().enumerate() {
                g[(a, c)] = self.xtx[(ja, jc)];
            }
            g[(a, a)] += lambda;
            b[a] = self.xty[ja];
        }
        let beta = solve_spd(&g, &b)?;
        let obj = 0.5 * (self.yty - b.dot(&beta));
        Ok((beta, obj))
    }
}

/// Fit sparse ridge with at most `tau` non-zero coefficients.
///
/// An empty training set is legal (leave-two-folds-out sets can be empty
/// at k = 2) and yields the zero model on the first `tau` features.
pub fn fit_sparse_ridge(x: &DMatrix<f64>, y: &DVector<f64>, tau: usize, gamma: f64) -> Result<FittedModel> {
    validate_gamma(gamma)?;
    let p = x.ncols();
    if tau < 1 || tau > p {
        return Err(Error::InvalidSparsity { tau, p });
    }
    if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite training values".into()));
    }

    let xtx = x.tr_mul(x);
    let xty = x.tr_mul(y);
    let yty = y.dot(y);
    let ws = SupportWorkspace {
        xtx: &xtx,
        xty: &xty,
        yty,
        gamma,
    };

    // Relaxation proxy: full ridge fit.
    let (g_full, b_full) = normal_system(x, y, gamma);
    let proxy = solve_spd(&g_full, &b_full)?;

    // Rank by |beta_j| scaled by the column norm; ties go to lower index.
    let mut ranked: Vec<usize> = (0..p).collect();
    let score = |j: usize| proxy[j].abs() * x.column(j).norm();
    ranked.sort_by(|&a, &b| score(b).total_cmp(&score(a)).then(a.cmp(&b)));
    let mut support: Vec<usize> = ranked[..tau].to_vec();
    support.sort_unstable();

    let (mut beta_s, mut obj) = ws.refit(&support)?;

    // One swap-improvement pass.
    let mut swaps = 0;
    'positions: for pos in 0..tau {
        if swaps >= p {
            break;
        }
        for j in 0..p {
            if support.contains(&j) {
                continue;
            }
            let mut cand = support.clone();
            cand[pos] = j;
            cand.sort_unstable();
            let (cand_beta, cand_obj) = ws.refit(&cand)?;
            if cand_obj < obj {
                support = cand;
                beta_s = cand_beta;
                obj = cand_obj;
                swaps += 1;
                continue 'positions;
            }
        }
    }

    let mut beta = DVector::zeros(p);
    for (a, &j) in support.iter().enumerate() {
        beta[j] = beta_s[a];
    }
    Ok(FittedModel {
        kind: LearnerKind::SparseRidge,
        params: ModelParams::Linear { beta },
        n_train: x.nrows(),
    })
}
