//! Fit memoization and fit accounting for a single selection run.
//!
//! Every training set inside one run is the complement of a union of folds
//! of the run's partition, so models are keyed by (excluded folds, theta).
//! This is what collapses repeated fits across the lambda grid — the
//! quantities entering the regularized score do not depend on lambda — and
//! it also identifies the leave-one-fold-out models shared between the
//! search stages.

use std::collections::HashMap;
use std::sync::Arc;

use crate::data::{Dataset, FoldPartition};
use crate::error::Result;
use crate::learners::{Fitter, FittedModel, HyperParams};

/// Cache scope for fitted models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheMode {
    /// Reuse models across the whole selection run (default).
    Full,
    /// Keep models only within the current (lambda, outer-fold) context,
    /// mirroring a selection run that stores no state between contexts.
    Scoped,
}

pub(crate) struct FitSession<'a> {
    pub fitter: &'a dyn Fitter,
    pub data: &'a Dataset,
    pub folds: &'a FoldPartition,
    mode: CacheMode,
    models: HashMap<(Vec<u32>, HyperParams), Arc<FittedModel>>,
    pub fits: u64,
    pub max_observed_loss: f64,
}

impl<'a> FitSession<'a> {
    pub fn new(
        fitter: &'a dyn Fitter,
        data: &'a Dataset,
        folds: &'a FoldPartition,
        mode: CacheMode,
    ) -> Self {
        FitSession {
            fitter,
            data,
            folds,
            mode,
            models: HashMap::new(),
            fits: 0,
            max_observed_loss: 0.0,
        }
    }

    /// Enter a new (lambda, outer-fold) context; a scoped cache forgets
    /// everything fit in earlier contexts.
    pub fn begin_context(&mut self) {
        if self.mode == CacheMode::Scoped {
            self.models.clear();
        }
    }

    /// Fit (or reuse) the model trained on all rows outside `exclude`.
    ///
    /// `exclude` holds ascending fold indices; empty means the full dataset.
    pub fn fit_excluding(&mut self, exclude: &[usize], theta: &HyperParams) -> Result<Arc<FittedModel>> {
        debug_assert!(exclude.windows(2).all(|w| w[0] < w[1]));
        let key = (
            exclude.iter().map(|&f| f as u32).collect::<Vec<u32>>(),
            theta.clone(),
        );
        if let Some(model) = self.models.get(&key) {
            return Ok(Arc::clone(model));
        }
        let rows = self.folds.complement(exclude);
        let (x, y) = self.data.subset(&rows);
        let model = Arc::new(self.fitter.fit(&x, &y, theta)?);
        self.fits += 1;
        self.models.insert(key, Arc::clone(&model));
        Ok(model)
    }

    pub fn observe_loss(&mut self, value: f64) {
        if value > self.max_observed_loss {
            self.max_observed_loss = value;
        }
    }
}
