//! Synthetic sparse-regression instances with banded feature correlation
//! and an exactly calibrated signal-to-noise ratio.

mod heatmap;

pub use heatmap::{
    default_gamma_grid, default_tau_grid, heatmap_experiment, CvKind, HeatmapMatrix,
    HeatmapResult,
};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{standardize, Dataset};
use crate::error::{Error, Result};

/// Parameters of one synthetic instance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    /// Training samples.
    pub n: usize,
    /// Features.
    pub p: usize,
    /// Nonzero entries of the ground-truth coefficient vector.
    pub tau_true: usize,
    /// Banded feature correlation: `Cov(x_i, x_j) = rho^|i-j|`.
    pub rho: f64,
    /// Signal-to-noise parameter: `sqrt(nu) = ||X beta|| / ||eps||`.
    pub nu: f64,
    /// Test samples drawn from the same process.
    pub n_test: usize,
    /// Seed controlling every random draw.
    pub seed: u64,
}

impl SynthConfig {
    /// Default number of test samples.
    pub const DEFAULT_N_TEST: usize = 10_000;

    /// A config with the default test-set size.
    pub fn new(n: usize, p: usize, tau_true: usize, rho: f64, nu: f64, seed: u64) -> Self {
        SynthConfig {
            n,
            p,
            tau_true,
            rho,
            nu,
            n_test: Self::DEFAULT_N_TEST,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 training samples to standardize, got n = {}",
                self.n
            )));
        }
        if self.p == 0 {
            return Err(Error::InvalidArgument("p must be at least 1".into()));
        }
        if self.tau_true == 0 || self.tau_true > self.p {
            return Err(Error::InvalidArgument(format!(
                "tau_true must lie in 1..=p (= {}), got {}",
                self.p, self.tau_true
            )));
        }
        if !(self.rho >= 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "rho must lie in [0, 1), got {}",
                self.rho
            )));
        }
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "nu must be finite and positive, got {}",
                self.nu
            )));
        }
        if self.n_test == 0 {
            return Err(Error::InvalidArgument("n_test must be at least 1".into()));
        }
        Ok(())
    }
}

/// One generated instance: standardized train and test sets plus the
/// ground truth behind them.
#[derive(Debug, Clone)]
pub struct SynthInstance {
    /// Standardized training set.
    pub train: Dataset,
    /// Test set transformed with the training set's coefficients.
    pub test: Dataset,
    /// Ground-truth coefficients: exactly `tau_true` entries of +/-1.
    pub beta_true: DVector<f64>,
    /// Positions of the nonzero coefficients, ascending.
    pub support: Vec<usize>,
}

/// The instance before standardization, for diagnostics and statistical
/// checks on the raw process.
#[derive(Debug, Clone)]
pub struct RawSynth {
    /// Raw training features, rows i.i.d. normal with banded covariance.
    pub x_train: DMatrix<f64>,
    /// Raw training response `X beta + eps`.
    pub y_train: DVector<f64>,
    /// Rescaled training noise: `||X beta|| / ||eps||` equals `sqrt(nu)`.
    pub noise_train: DVector<f64>,
    /// Raw test features.
    pub x_test: DMatrix<f64>,
    /// Raw test response, with noise at the train-calibrated scale.
    pub y_test: DVector<f64>,
    pub beta_true: DVector<f64>,
    pub support: Vec<usize>,
}

/// Standard normal draws via the Box-Muller transform, so the stream
/// depends only on the seeded generator and not on platform libraries.
struct NormalSource<'r> {
    rng: &'r mut ChaCha8Rng,
    spare: Option<f64>,
}

impl<'r> NormalSource<'r> {
    fn new(rng: &'r mut ChaCha8Rng) -> Self {
        NormalSource { rng, spare: None }
    }

    fn next(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = 1.0 - self.rng.random::<f64>();
        let u2 = self.rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * angle.sin());
        r * angle.cos()
    }
}

/// Lower-triangular factor of the banded covariance `rho^|i-j|`.
fn covariance_factor(p: usize, rho: f64) -> Result<DMatrix<f64>> {
    let sigma = DMatrix::from_fn(p, p, |i, j| rho.powi((i as i32 - j as i32).abs()));
    let chol = sigma.cholesky().ok_or_else(|| {
        Error::Numerical(format!("covariance factorization failed for rho = {rho}"))
    })?;
    Ok(chol.l())
}

/// Rows i.i.d. `N(0, Sigma)`: each row is the factor applied to fresh
/// standard normals, drawn row by row.
fn draw_design(source: &mut NormalSource, n: usize, factor: &DMatrix<f64>) -> DMatrix<f64> {
    let p = factor.nrows();
    let mut x = DMatrix::zeros(n, p);
    let mut z = DVector::zeros(p);
    for i in 0..n {
        for e in z.iter_mut() {
            *e = source.next();
        }
        let row = factor * &z;
        for j in 0..p {
            x[(i, j)] = row[j];
        }
    }
    x
}

fn draw_vector(source: &mut NormalSource, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| source.next())
}

/// Generate the raw (unstandardized) instance.
///
/// The draw order is fixed: support, signs, training features row by row,
/// training noise, test features, test noise. The training noise is
/// rescaled by the single scalar that makes `||X beta|| / ||eps||` equal
/// `sqrt(nu)` exactly; the test noise reuses that scale, since the test
/// set comes from the same process rather than being recalibrated.
pub fn generate_raw(cfg: &SynthConfig) -> Result<RawSynth> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // Support: partial Fisher-Yates, uniform over subsets of size tau_true.
    let mut idx: Vec<usize> = (0..cfg.p).collect();
    for i in 0..cfg.tau_true {
        let j = rng.random_range(i..cfg.p);
        idx.swap(i, j);
    }
    let mut support: Vec<usize> = idx[..cfg.tau_true].to_vec();
    support.sort_unstable();

    let mut beta_true = DVector::zeros(cfg.p);
    for &j in &support {
        beta_true[j] = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }

    let factor = covariance_factor(cfg.p, cfg.rho)?;

    let x_train = {
        let mut source = NormalSource::new(&mut rng);
        draw_design(&mut source, cfg.n, &factor)
    };
    let raw_noise = {
        let mut source = NormalSource::new(&mut rng);
        draw_vector(&mut source, cfg.n)
    };
    let signal = &x_train * &beta_true;
    let noise_norm = raw_noise.norm();
    if noise_norm == 0.0 {
        return Err(Error::Numerical("degenerate zero noise draw".into()));
    }
    let noise_scale = signal.norm() / (cfg.nu.sqrt() * noise_norm);
    let noise_train = raw_noise * noise_scale;
    let y_train = &signal + &noise_train;

    let x_test = {
        let mut source = NormalSource::new(&mut rng);
        draw_design(&mut source, cfg.n_test, &factor)
    };
    let raw_test_noise = {
        let mut source = NormalSource::new(&mut rng);
        draw_vector(&mut source, cfg.n_test)
    };
    let y_test = &x_test * &beta_true + raw_test_noise * noise_scale;

    Ok(RawSynth {
        x_train,
        y_train,
        noise_train,
        x_test,
        y_test,
        beta_true,
        support,
    })
}

/// Generate a standardized instance: the training set is centered and
/// scaled per column (response included), and the test set is transformed
/// with the training set's coefficients.
pub fn generate(cfg: &SynthConfig) -> Result<SynthInstance> {
    let raw = generate_raw(cfg)?;
    let train = Dataset::new(raw.x_train, raw.y_train)?;
    let test = Dataset::new(raw.x_test, raw.y_test)?;
    let (train, mut others) = standardize(&train, &[&test])?;
    let test = others.pop().expect("one transformed dataset");
    Ok(SynthInstance {
        train,
        test,
        beta_true: raw.beta_true,
        support: raw.support,
    })
}
