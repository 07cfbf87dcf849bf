//! CART regression trees.
//!
//! Greedy top-down construction: each split minimizes the summed squared
//! deviation of the children around their means. Candidate thresholds are
//! midpoints between consecutive distinct sorted feature values; ties are
//! broken toward the lowest feature index, then the lowest threshold, so
//! refits are bit-identical. Leaves predict the training mean.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::learners::{FittedModel, LearnerKind, ModelParams, TreeNode};

struct Builder<'a> {
    x: &'a DMatrix<f64>,
    y: &'a DVector<f64>,
    max_depth: usize,
    min_samples_split: usize,
    nodes: Vec<TreeNode>,
}

struct BestSplit {
    feature: usize,
    threshold: f64,
    children_sse: f64,
}

impl Builder<'_> {
    fn mean(&self, idx: &[usize]) -> f64 {
        idx.iter().map(|&i| self.y[i]).sum::<f64>() / idx.len() as f64
    }

    fn find_split(&self, idx: &[usize]) -> Option<BestSplit> {
        let p = self.x.ncols();
        let m = idx.len();
        let mut best: Option<BestSplit> = None;
        let mut sorted = idx.to_vec();
        for j in 0..p {
            sorted.sort_by(|&a, &b| self.x[(a, j)].total_cmp(&self.x[(b, j)]).then(a.cmp(&b)));
            // Prefix sums over the sorted order for O(1) child SSE.
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let total_sum: f64 = sorted.iter().map(|&i| self.y[i]).sum();
            let total_sq: f64 = sorted.iter().map(|&i| self.y[i] * self.y[i]).sum();
            for b in 1..m {
                let yi = self.y[sorted[b - 1]];
                sum += yi;
                sum_sq += yi * yi;
                let lo = self.x[(sorted[b - 1], j)];
                let hi = self.x[(sorted[b], j)];
                if lo == hi {
                    continue;
                }
                let nl = b as f64;
                let nr = (m - b) as f64;
                let sse_l = (sum_sq - sum * sum / nl).max(0.0);
                let sse_r = ((total_sq - sum_sq) - (total_sum - sum) * (total_sum - sum) / nr).max(0.0);
                let children = sse_l + sse_r;
                if best.as_ref().is_none_or(|bst| children < bst.children_sse) {
                    best = Some(BestSplit {
                        feature: j,
                        threshold: lo + (hi - lo) / 2.0,
                        children_sse: children,
                    });
                }
            }
        }
        best
    }

    fn build(&mut self, idx: &[usize], depth: usize) -> usize {
        let m = idx.len();
        let mean = self.mean(idx);
        let min = idx.iter().map(|&i| self.y[i]).fold(f64::INFINITY, f64::min);
        let max = idx.iter().map(|&i| self.y[i]).fold(f64::NEG_INFINITY, f64::max);
        let splittable = depth < self.max_depth && m >= self.min_samples_split && min < max;
        if !splittable {
            self.nodes.push(TreeNode::Leaf {
                prediction: mean,
                samples: m,
            });
            return self.nodes.len() - 1;
        }
        let Some(split) = self.find_split(idx) else {
            // Every feature is constant on this node.
            self.nodes.push(TreeNode::Leaf {
                prediction: mean,
                samples: m,
            });
            return self.nodes.len() - 1;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = idx
            .iter()
            .partition(|&&i| self.x[(i, split.feature)] <= split.threshold);
        let at = self.nodes.len();
        self.nodes.push(TreeNode::Split {
            feature: split.feature,
            threshold: split.threshold,
            left: 0,
            right: 0,
        });
        let left = self.build(&left_idx, depth + 1);
        let right = self.build(&right_idx, depth + 1);
        if let TreeNode::Split {
            left: l, right: r, ..
        } = &mut self.nodes[at]
        {
            *l = left;
            *r = right;
        }
        at
    }
}

/// Fit a CART regression tree of depth at most `max_depth`.
///
/// Nodes with fewer than `min_samples_split` samples, or with constant
/// response, become leaves.
pub fn fit_cart(x: &DMatrix<f64>, y: &DVector<f64>, max_depth: usize, min_samples_split: usize) -> Result<FittedModel> {
    if max_depth < 1 {
        return Err(Error::InvalidHyperParams("max_depth must be >= 1".into()));
    }
    if min_samples_split < 2 {
        return Err(Error::InvalidHyperParams("min_samples_split must be >= 2".into()));
    }
    if x.nrows() == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite training values".into()));
    }
    let idx: Vec<usize> = (0..x.nrows()).collect();
    let mut builder = Builder {
        x,
        y,
        max_depth,
        min_samples_split,
        nodes: Vec::new(),
    };
    builder.build(&idx, 0);
    Ok(FittedModel {
        kind: LearnerKind::Cart,
        params: ModelParams::Tree { nodes: builder.nodes },
        n_train: x.nrows(),
    })
}
