//! Ordinary least squares via normal equations, with a tiny ridge jitter
//! for conditioning: climate features are correlated and a silent
//! coefficient blow-up is worse than a negligible bias.

use serde::{Deserialize, Serialize};

use super::{Predictor, RegressError};
use crate::scale::Scaler;

/// Jitter added to the normal-equation diagonal by the pipeline defaults.
pub const DEFAULT_RIDGE_JITTER: f64 = 1e-10;

/// Fitted linear model. Coefficients and intercept apply to standardized
/// features: prediction is `coefficients . scaler(x) + intercept`.
/// [`LinearModel::raw_affine`] converts to the raw-feature form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub feature_scaler: Scaler,
}

impl LinearModel {
    /// Equivalent (coefficients, intercept) acting on raw features.
    pub fn raw_affine(&self) -> (Vec<f64>, f64) {
        let coefs: Vec<f64> = self
            .coefficients
            .iter()
            .zip(&self.feature_scaler.stds)
            .map(|(w, s)| w / s)
            .collect();
        let shift: f64 = coefs
            .iter()
            .zip(&self.feature_scaler.means)
            .map(|(c, m)| c * m)
            .sum();
        (coefs, self.intercept - shift)
    }
}

impl Predictor for LinearModel {
    fn predict_one(&self, x: &[f64]) -> Result<f64, RegressError> {
        ols_predict(self, x)
    }
}

/// Cholesky solve of a symmetric positive definite system; `None` when a
/// pivot collapses (singular beyond the jitter's help).
fn cholesky_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let m = b.len();
    for j in 0..m {
        for k in 0..j {
            a[j][j] -= a[j][k] * a[j][k];
        }
        if a[j][j] <= 0.0 || !a[j][j].is_finite() {
            return None;
        }
        a[j][j] = a[j][j].sqrt();
        for i in j + 1..m {
            for k in 0..j {
                a[i][j] -= a[i][k] * a[j][k];
            }
            a[i][j] /= a[j][j];
        }
    }
    // Forward then backward substitution (L and L^T).
    for i in 0..m {
        for k in 0..i {
            b[i] -= a[i][k] * b[k];
        }
        b[i] /= a[i][i];
    }
    for i in (0..m).rev() {
        for k in i + 1..m {
            b[i] -= a[k][i] * b[k];
        }
        b[i] /= a[i][i];
    }
    Some(b)
}

/// Least-squares fit of `y` on standardized features plus an intercept.
#[allow(clippy::needless_range_loop)] // triangular fill reads clearest indexed
pub fn ols_fit(x: &[Vec<f64>], y: &[f64], ridge_jitter: f64) -> Result<LinearModel, RegressError> {
    let n = x.len();
    if y.len() != n {
        return Err(RegressError::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let d = x.first().map_or(0, Vec::len);
    if n < d + 1 || n < 2 {
        return Err(RegressError::TooFewSamples {
            needed: (d + 1).max(2),
            got: n,
        });
    }
    if x.iter().flatten().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(RegressError::NonFiniteInput);
    }

    let scaler = Scaler::fit_unchecked(x);
    let zs = scaler.transform(x);

    // Normal equations on the design [1 | Z], with jitter on the diagonal.
    let m = d + 1;
    let mut ata = vec![vec![0.0; m]; m];
    let mut aty = vec![0.0; m];
    for (z, &yi) in zs.iter().zip(y) {
        ata[0][0] += 1.0;
        aty[0] += yi;
        for j in 0..d {
            ata[j + 1][0] += z[j];
            aty[j + 1] += z[j] * yi;
            for k in 0..=j {
                ata[j + 1][k + 1] += z[j] * z[k];
            }
        }
    }
    for j in 0..m {
        for k in j + 1..m {
            ata[j][k] = ata[k][j];
        }
        ata[j][j] += ridge_jitter;
    }

    let w = cholesky_solve(ata, aty).ok_or(RegressError::SingularSystem)?;
    Ok(LinearModel {
        intercept: w[0],
        coefficients: w[1..].to_vec(),
        feature_scaler: scaler,
    })
}

/// Affine evaluation at a raw feature vector.
pub fn ols_predict(model: &LinearModel, x: &[f64]) -> Result<f64, RegressError> {
    if x.len() != model.coefficients.len() {
        return Err(RegressError::DimensionMismatch {
            expected: model.coefficients.len(),
            got: x.len(),
        });
    }
    let z = model.feature_scaler.transform_point(x);
    Ok(model
        .coefficients
        .iter()
        .zip(&z)
        .map(|(w, v)| w * v)
        .sum::<f64>()
        + model.intercept)
}
