//! Ridge regression via the normal equations.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::learners::{FittedModel, LearnerKind, ModelParams};

const RESIDUAL_TOL: f64 = 1e-8;

/// Solve `(G) beta = b` for symmetric positive definite `G`, refining the
/// solution until the relative residual is at or below `RESIDUAL_TOL`.
pub(crate) fn solve_spd(g: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = Cholesky::new(g.clone())
        .ok_or_else(|| Error::Numerical("Cholesky factorization failed".into()))?;
    let mut beta = chol.solve(b);
    let b_norm = b.norm().max(f64::MIN_POSITIVE);
    for _ in 0..3 {
        let r = b - g * &beta;
        if r.norm() / b_norm <= RESIDUAL_TOL {
            return Ok(beta);
        }
        beta += chol.solve(&r);
    }
    let rel = (b - g * &beta).norm() / b_norm;
    if rel <= RESIDUAL_TOL {
        Ok(beta)
    } else {
        Err(Error::Numerical(format!(
            "ridge normal equations residual {rel:.3e} exceeds {RESIDUAL_TOL:.0e}"
        )))
    }
}

/// Normal-equation system for ridge: `G = X'X + (1/gamma) I`, `b = X'y`.
pub(crate) fn normal_system(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    gamma: f64,
) -> (DMatrix<f64>, DVector<f64>) {
    let p = x.ncols();
    let mut g = x.tr_mul(x);
    let lambda = 1.0 / gamma;
    for j in 0..p {
        g[(j, j)] += lambda;
    }
    let b = x.tr_mul(y);
    (g, b)
}

pub(crate) fn validate_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidHyperParams(format!(
            "gamma must be finite and positive, got {gamma}"
        )));
    }
    Ok(())
}

/// Fit ridge regression: minimize `(1/(2 gamma)) ||beta||^2 + (1/2) ||X beta - y||^2`.
pub fn fit_ridge(x: &DMatrix<f64>, y: &DVector<f64>, gamma: f64) -> Result<FittedModel> {
    validate_gamma(gamma)?;
    if x.nrows() == 0 {
        return Err(Error::EmptyTrainingSet);
    }
    if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("non-finite training values".into()));
    }
    let (g, b) = normal_system(x, y, gamma);
    let beta = solve_spd(&g, &b)?;
    Ok(FittedModel {
        kind: LearnerKind::Ridge,
        params: ModelParams::Linear { beta },
        n_train: x.nrows(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_identical_rows_shrink_toward_ls() {
        // X = [[1],[1]], y = [1,1], gamma = 1: (2 + 1) beta = 2.
        let x = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let y = DVector::from_column_slice(&[1.0, 1.0]);
        let m = fit_ridge(&x, &y, 1.0).unwrap();
        match &m.params {
            ModelParams::Linear { beta } => {
                assert_relative_eq!(beta[0], 2.0 / 3.0, epsilon = 1e-12)
            }
            _ => panic!("expected linear model"),
        }
    }

    #[test]
    fn zero_response_gives_zero_coefficients() {
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let y = DVector::zeros(3);
        let m = fit_ridge(&x, &y, 10.0).unwrap();
        match &m.params {
            ModelParams::Linear { beta } => assert!(beta.iter().all(|v| *v == 0.0)),
            _ => panic!("expected linear model"),
        }
    }

    #[test]
    fn vanishing_regularization_approaches_least_squares() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = DMatrix::from_fn(20, 3, |_, _| rng.random::<f64>() - 0.5);
        let y = DVector::from_fn(20, |_, _| rng.random::<f64>() - 0.5);
        let m = fit_ridge(&x, &y, 1e12).unwrap();
        // Independent route: least squares via SVD.
        let ls = x
            .clone()
            .svd(true, true)
            .solve(&y, 1e-12)
            .expect("svd solve");
        match &m.params {
            ModelParams::Linear { beta } => {
                for j in 0..3 {
                    assert_relative_eq!(beta[j], ls[j], epsilon = 1e-4, max_relative = 1e-4);
                }
            }
            _ => panic!("expected linear model"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let x = DMatrix::from_column_slice(2, 1, &[1.0, 1.0]);
        let y = DVector::from_column_slice(&[1.0, 1.0]);
        assert!(fit_ridge(&x, &y, 0.0).is_err());
        assert!(fit_ridge(&x, &y, -1.0).is_err());
        assert!(fit_ridge(&x, &y, f64::NAN).is_err());
        assert!(matches!(
            fit_ridge(&DMatrix::zeros(0, 1), &DVector::zeros(0), 1.0),
            Err(Error::EmptyTrainingSet)
        ));
        let bad = DMatrix::from_column_slice(2, 1, &[1.0, f64::NAN]);
        assert!(fit_ridge(&bad, &y, 1.0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        // The normal-equation residual stays within tolerance across random
        // well- and ill-scaled instances.
        #[test]
        fn residual_within_tolerance(seed in 0u64..1000, n in 1usize..30, p in 1usize..8,
                                     log_gamma in -3.0f64..3.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let x = DMatrix::from_fn(n, p, |_, _| 2.0 * rng.random::<f64>() - 1.0);
            let y = DVector::from_fn(n, |_, _| 2.0 * rng.random::<f64>() - 1.0);
            let gamma = 10f64.powf(log_gamma);
            let m = fit_ridge(&x, &y, gamma).unwrap();
            let beta = match &m.params {
                ModelParams::Linear { beta } => beta.clone(),
                _ => unreachable!(),
            };
            let (g, b) = normal_system(&x, &y, gamma);
            let rel = (&b - &g * &beta).norm() / b.norm().max(f64::MIN_POSITIVE);
            prop_assert!(rel <= 1e-8, "relative residual {rel}");
        }
    }
}
