//! Datasets, fold partitions, losses and summary metrics.
//!
//! A [`Dataset`] couples an `n x p` feature matrix with a length-`n`
//! response and, once standardized, remembers the transform so it can be
//! applied to held-out data or inverted.

mod csv_io;
mod folds;
mod loss;
mod metrics;

pub use csv_io::{load_csv, read_csv, CsvOptions, ResponseColumn};
pub use folds::{make_folds, FoldPartition};
pub use loss::{LossFn, LossKind};
pub use metrics::{geometric_mean_ratio, MetricSummary};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Column/response location-scale coefficients recorded by [`standardize`].
///
/// Scales use the (n-1)-denominator standard deviation; a constant column
/// keeps scale 1 so the transform stays invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardization {
    pub feature_means: Vec<f64>,
    pub feature_scales: Vec<f64>,
    pub response_mean: f64,
    pub response_scale: f64,
}

impl Standardization {
    /// Map raw features/response into standardized coordinates.
    pub fn apply(&self, features: &DMatrix<f64>, response: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
        let mut x = features.clone();
        for j in 0..x.ncols() {
            let (m, s) = (self.feature_means[j], self.feature_scales[j]);
            for v in x.column_mut(j).iter_mut() {
                *v = (*v - m) / s;
            }
        }
        let y = response.map(|v| (v - self.response_mean) / self.response_scale);
        (x, y)
    }

    /// Invert [`Standardization::apply`].
    pub fn invert(&self, features: &DMatrix<f64>, response: &DVector<f64>) -> (DMatrix<f64>, DVector<f64>) {
        let mut x = features.clone();
        for j in 0..x.ncols() {
            let (m, s) = (self.feature_means[j], self.feature_scales[j]);
            for v in x.column_mut(j).iter_mut() {
                *v = *v * s + m;
            }
        }
        let y = response.map(|v| v * self.response_scale + self.response_mean);
        (x, y)
    }
}

/// Immutable regression dataset with optional standardization metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    response: DVector<f64>,
    standardization: Option<Standardization>,
}

impl Dataset {
    /// Build a dataset, validating shape and finiteness.
    pub fn new(features: DMatrix<f64>, response: DVector<f64>) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::Data(format!(
                "dataset must have n >= 1 and p >= 1, got n={} p={}",
                features.nrows(),
                features.ncols()
            )));
        }
        if response.len() != features.nrows() {
            return Err(Error::Data(format!(
                "response length {} does not match n={}",
                response.len(),
                features.nrows()
            )));
        }
        if features.iter().any(|v| !v.is_finite()) || response.iter().any(|v| !v.is_finite()) {
            return Err(Error::Data("dataset contains non-finite entries".into()));
        }
        Ok(Dataset {
            features,
            response,
            standardization: None,
        })
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn p(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn response(&self) -> &DVector<f64> {
        &self.response
    }

    pub fn standardization(&self) -> Option<&Standardization> {
        self.standardization.as_ref()
    }

    /// Extract the rows named by `idx` (in the given order).
    ///
    /// Returns raw matrices rather than a `Dataset` so callers may take
    /// empty subsets (as leave-two-folds-out training sets can be).
    pub fn subset(&self, idx: &[usize]) -> (DMatrix<f64>, DVector<f64>) {
        let x = self.features.select_rows(idx.iter());
        let y = DVector::from_iterator(idx.len(), idx.iter().map(|&i| self.response[i]));
        (x, y)
    }

    /// Rebuild a `Dataset` from a non-empty row subset, keeping metadata.
    pub fn subset_dataset(&self, idx: &[usize]) -> Result<Dataset> {
        let (x, y) = self.subset(idx);
        let mut d = Dataset::new(x, y)?;
        d.standardization = self.standardization.clone();
        Ok(d)
    }
}

fn column_stats(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 1.0);
    }
    let ss: f64 = values.map(|v| (v - mean) * (v - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    (mean, if sd > 0.0 { sd } else { 1.0 })
}

/// Center and scale `train` by its own column/response statistics and apply
/// the same coefficients to every dataset in `others` (e.g. a test split).
///
/// Standard deviations use the (n-1) denominator; constant columns keep
/// scale 1. The fitted coefficients are recorded on every returned dataset.
pub fn standardize(train: &Dataset, others: &[&Dataset]) -> Result<(Dataset, Vec<Dataset>)> {
    if train.n() < 2 {
        return Err(Error::Data("standardize needs at least 2 training rows".into()));
    }
    for o in others {
        if o.p() != train.p() {
            return Err(Error::Data(format!(
                "cannot standardize p={} data with p={} coefficients",
                o.p(),
                train.p()
            )));
        }
    }
    let n = train.n();
    let mut feature_means = Vec::with_capacity(train.p());
    let mut feature_scales = Vec::with_capacity(train.p());
    for j in 0..train.p() {
        let col = train.features.column(j);
        let (m, s) = column_stats(col.iter().copied(), n);
        feature_means.push(m);
        feature_scales.push(s);
    }
    let (response_mean, response_scale) = column_stats(train.response.iter().copied(), n);
    let coeffs = Standardization {
        feature_means,
        feature_scales,
        response_mean,
        response_scale,
    };

    let (tx, ty) = coeffs.apply(&train.features, &train.response);
    let mut std_train = Dataset::new(tx, ty)?;
    std_train.standardization = Some(coeffs.clone());

    let mut std_others = Vec::with_capacity(others.len());
    for o in others {
        let (ox, oy) = coeffs.apply(&o.features, &o.response);
        let mut d = Dataset::new(ox, oy)?;
        d.standardization = Some(coeffs.clone());
        std_others.push(d);
    }
    Ok((std_train, std_others))
}
