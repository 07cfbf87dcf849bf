//! Built-in regression learners and their hyperparameter spaces.
//!
//! Three learners share one interface: ridge regression, cardinality-
//! constrained ("sparse") ridge via greedy rounding, and CART regression
//! trees. Every fit is a pure function of the training rows and the
//! hyperparameters, which is what makes cached model reuse across
//! cross-validation loops sound.

mod cart;
mod grid;
mod ridge;
mod sparse_ridge;

pub use cart::fit_cart;
pub use grid::{default_grid, log_uniform_grid, max_tau, HyperGrid};
pub use ridge::fit_ridge;
pub use sparse_ridge::fit_sparse_ridge;

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tags for the built-in learners.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Ridge,
    SparseRidge,
    Cart,
}

impl LearnerKind {
    pub fn name(&self) -> &'static str {
        match self {
            LearnerKind::Ridge => "ridge",
            LearnerKind::SparseRidge => "sparse_ridge",
            LearnerKind::Cart => "cart",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ridge" => Ok(LearnerKind::Ridge),
            "sparse_ridge" => Ok(LearnerKind::SparseRidge),
            "cart" => Ok(LearnerKind::Cart),
            other => Err(Error::InvalidArgument(format!(
                "unknown learner '{other}' (expected ridge, sparse_ridge or cart)"
            ))),
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One point in a learner's hyperparameter space.
///
/// Equality, hashing and ordering are total: scores are tie-broken by the
/// ordering (smaller tau, then smaller gamma, then smaller depth, then
/// smaller min_samples_split), so selection is deterministic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "snake_case")]
pub enum HyperParams {
    Ridge { gamma: f64 },
    SparseRidge { tau: usize, gamma: f64 },
    Cart { max_depth: usize, min_samples_split: usize },
}

impl HyperParams {
    pub fn kind(&self) -> LearnerKind {
        match self {
            HyperParams::Ridge { .. } => LearnerKind::Ridge,
            HyperParams::SparseRidge { .. } => LearnerKind::SparseRidge,
            HyperParams::Cart { .. } => LearnerKind::Cart,
        }
    }

    /// Regularization weight, for the learners that have one.
    pub fn gamma(&self) -> Option<f64> {
        match self {
            HyperParams::Ridge { gamma } => Some(*gamma),
            HyperParams::SparseRidge { gamma, .. } => Some(*gamma),
            HyperParams::Cart { .. } => None,
        }
    }

    /// Replace gamma, leaving other fields alone. No-op for CART.
    pub fn with_gamma(&self, new_gamma: f64) -> HyperParams {
        match *self {
            HyperParams::Ridge { .. } => HyperParams::Ridge { gamma: new_gamma },
            HyperParams::SparseRidge { tau, .. } => HyperParams::SparseRidge {
                tau,
                gamma: new_gamma,
            },
            HyperParams::Cart { .. } => self.clone(),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            HyperParams::Ridge { .. } => 0,
            HyperParams::SparseRidge { .. } => 1,
            HyperParams::Cart { .. } => 2,
        }
    }
}

impl Eq for HyperParams {}

impl Hash for HyperParams {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.rank().hash(state);
        match self {
            HyperParams::Ridge { gamma } => gamma.to_bits().hash(state),
            HyperParams::SparseRidge { tau, gamma } => {
                tau.hash(state);
                gamma.to_bits().hash(state);
            }
            HyperParams::Cart {
                max_depth,
                min_samples_split,
            } => {
                max_depth.hash(state);
                min_samples_split.hash(state);
            }
        }
    }
}

impl PartialOrd for HyperParams {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HyperParams {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (HyperParams::Ridge { gamma: a }, HyperParams::Ridge { gamma: b }) => a.total_cmp(b),
            (
                HyperParams::SparseRidge { tau: ta, gamma: ga },
                HyperParams::SparseRidge { tau: tb, gamma: gb },
            ) => ta.cmp(tb).then_with(|| ga.total_cmp(gb)),
            (
                HyperParams::Cart {
                    max_depth: da,
                    min_samples_split: ma,
                },
                HyperParams::Cart {
                    max_depth: db,
                    min_samples_split: mb,
                },
            ) => da.cmp(db).then_with(|| ma.cmp(mb)),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for HyperParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HyperParams::Ridge { gamma } => write!(f, "gamma={gamma}"),
            HyperParams::SparseRidge { tau, gamma } => write!(f, "tau={tau},gamma={gamma}"),
            HyperParams::Cart {
                max_depth,
                min_samples_split,
            } => write!(f, "max_depth={max_depth},min_samples_split={min_samples_split}"),
        }
    }
}

/// A node of a fitted regression tree, stored in an arena ([`FittedModel`]).
#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        prediction: f64,
        samples: usize,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelParams {
    /// Coefficient vector of a linear model (no intercept; data are
    /// expected to be centered).
    Linear { beta: DVector<f64> },
    /// Arena of tree nodes; the root is node 0.
    Tree { nodes: Vec<TreeNode> },
}

/// A fitted model: learner tag, parameters, and training-set size.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub kind: LearnerKind,
    pub params: ModelParams,
    pub n_train: usize,
}

impl FittedModel {
    /// A single-leaf tree predicting a constant; used for degenerate fits.
    pub fn constant(kind: LearnerKind, value: f64, n_train: usize) -> Self {
        FittedModel {
            kind,
            params: ModelParams::Tree {
                nodes: vec![TreeNode::Leaf {
                    prediction: value,
                    samples: n_train,
                }],
            },
            n_train,
        }
    }

    /// Number of features the model expects, if it is dimension-checked.
    pub fn input_dim(&self) -> Option<usize> {
        match &self.params {
            ModelParams::Linear { beta } => Some(beta.len()),
            ModelParams::Tree { .. } => None,
        }
    }

    /// Count of exactly non-zero coefficients (linear models only).
    pub fn nonzero_count(&self) -> Option<usize> {
        match &self.params {
            ModelParams::Linear { beta } => Some(beta.iter().filter(|v| **v != 0.0).count()),
            ModelParams::Tree { .. } => None,
        }
    }

    fn route(&self, nodes: &[TreeNode], x: &[f64]) -> f64 {
        let mut at = 0usize;
        loop {
            match &nodes[at] {
                TreeNode::Leaf { prediction, .. } => return *prediction,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    at = if x[*feature] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    fn max_feature(&self, nodes: &[TreeNode]) -> usize {
        nodes
            .iter()
            .filter_map(|n| match n {
                TreeNode::Split { feature, .. } => Some(*feature + 1),
                TreeNode::Leaf { .. } => None,
            })
            .max()
            .unwrap_or(0)
    }

    /// Predict a single point.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        match &self.params {
            ModelParams::Linear { beta } => {
                if x.len() != beta.len() {
                    return Err(Error::DimensionMismatch {
                        expected: beta.len(),
                        got: x.len(),
                    });
                }
                Ok(x.iter().zip(beta.iter()).map(|(a, b)| a * b).sum())
            }
            ModelParams::Tree { nodes } => {
                let need = self.max_feature(nodes);
                if x.len() < need {
                    return Err(Error::DimensionMismatch {
                        expected: need,
                        got: x.len(),
                    });
                }
                Ok(self.route(nodes, x))
            }
        }
    }

    /// Predict every row of `x`.
    pub fn predict_all(&self, x: &DMatrix<f64>) -> Result<DVector<f64>> {
        match &self.params {
            ModelParams::Linear { beta } => {
                if x.ncols() != beta.len() {
                    return Err(Error::DimensionMismatch {
                        expected: beta.len(),
                        got: x.ncols(),
                    });
                }
                Ok(x * beta)
            }
            ModelParams::Tree { nodes } => {
                let need = self.max_feature(nodes);
                if x.ncols() < need {
                    return Err(Error::DimensionMismatch {
                        expected: need,
                        got: x.ncols(),
                    });
                }
                let mut out = DVector::zeros(x.nrows());
                let mut row = vec![0.0; x.ncols()];
                for i in 0..x.nrows() {
                    for j in 0..x.ncols() {
                        row[j] = x[(i, j)];
                    }
                    out[i] = self.route(nodes, &row);
                }
                Ok(out)
            }
        }
    }
}

/// Anything that can fit a model from raw training rows.
///
/// The cross-validation engine is generic over this so tests can plug in
/// degenerate learners (e.g. a constant predictor whose output ignores the
/// training set).
pub trait Fitter {
    fn name(&self) -> &str;
    fn fit(&self, x: &DMatrix<f64>, y: &DVector<f64>, theta: &HyperParams) -> Result<FittedModel>;
}

/// Dispatches to the built-in learners and validates tag/params agreement.
#[derive(Debug, Clone, Copy)]
pub struct BuiltinFitter {
    pub kind: LearnerKind,
}

impl BuiltinFitter {
    pub fn new(kind: LearnerKind) -> Self {
        BuiltinFitter { kind }
    }
}

impl Fitter for BuiltinFitter {
    fn name(&self) -> &str {
        self.kind.name()
    }

    fn fit(&self, x: &DMatrix<f64>, y: &DVector<f64>, theta: &HyperParams) -> Result<FittedModel> {
        if theta.kind() != self.kind {
            return Err(Error::InvalidHyperParams(format!(
                "{} parameters passed to {} learner",
                theta.kind(),
                self.kind
            )));
        }
        if x.nrows() != y.len() {
            return Err(Error::Data(format!(
                "training rows {} do not match responses {}",
                x.nrows(),
                y.len()
            )));
        }
        match *theta {
            HyperParams::Ridge { gamma } => fit_ridge(x, y, gamma),
            HyperParams::SparseRidge { tau, gamma } => fit_sparse_ridge(x, y, tau, gamma),
            HyperParams::Cart {
                max_depth,
                min_samples_split,
            } => fit_cart(x, y, max_depth, min_samples_split),
        }
    }
}

/// Fit one of the built-in learners.
pub fn fit(x: &DMatrix<f64>, y: &DVector<f64>, theta: &HyperParams) -> Result<FittedModel> {
    BuiltinFitter::new(theta.kind()).fit(x, y, theta)
}
