//! Epsilon-SVR trained by sequential minimal optimization on the dual.
//!
//! The dual being solved (in standardized feature/target space):
//!
//! maximize  W(beta) = sum_i y_i beta_i - eps * sum_i |beta_i|
//!                     - 1/2 * sum_ij beta_i beta_j K_ij
//! subject to  sum_i beta_i = 0,  |beta_i| <= C.
//!
//! Internally beta_i is split into the usual nonnegative pair
//! (alpha_i, alpha_i*) giving 2n box-constrained variables with one
//! equality constraint. Each step picks the maximal-KKT-violating pair
//! (the most violating ascent variable against the most violating descent
//! variable), solves the two-variable subproblem exactly, and updates the
//! gradient; iteration stops when the maximal violation drops to
//! `kkt_tol`. The prediction is f(x) = sum_i beta_i K(sv_i, x) + bias,
//! de-standardized.

use serde::{Deserialize, Serialize};

use super::{KernelSpec, Predictor, RegressError, SvrParams};
use crate::scale::{Scaler, TargetScaler};

/// Curvature floor for degenerate pair subproblems (duplicate points).
const TAU: f64 = 1e-12;

/// Fitted epsilon-SVR model. Support vectors are stored in standardized
/// feature space; `dual_coefs[i]` is beta_i = alpha_i - alpha_i*.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub kernel: KernelSpec,
    pub c: f64,
    /// Tube half-width, in standardized target units.
    pub epsilon: f64,
    pub support_vectors: Vec<Vec<f64>>,
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub feature_scaler: Scaler,
    pub target_scaler: TargetScaler,
    /// Dual objective value at the returned iterate.
    pub dual_objective: f64,
    /// Maximal KKT violation at the returned iterate.
    pub kkt_violation: f64,
}

impl SvrModel {
    /// Kernel expansion in standardized space (before de-standardizing the
    /// target). Useful for KKT diagnostics.
    pub fn decision_standardized(&self, xs: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.dual_coefs)
            .map(|(sv, &b)| b * self.kernel.apply(sv, xs))
            .sum::<f64>()
            + self.bias
    }
}

impl Predictor for SvrModel {
    fn predict_one(&self, x: &[f64]) -> Result<f64, RegressError> {
        svr_predict(self, x)
    }
}

/// Evaluate the fitted kernel expansion at a raw feature vector.
pub fn svr_predict(model: &SvrModel, x: &[f64]) -> Result<f64, RegressError> {
    if x.len() != model.feature_scaler.dim() {
        return Err(RegressError::DimensionMismatch {
            expected: model.feature_scaler.dim(),
            got: x.len(),
        });
    }
    let xs = model.feature_scaler.transform_point(x);
    Ok(model
        .target_scaler
        .inverse(model.decision_standardized(&xs)))
}

/// State of the 2n-variable box-constrained dual.
struct Smo<'a> {
    /// alpha for p < n, alpha* for p >= n; all in [0, C].
    z: Vec<f64>,
    grad: Vec<f64>,
    kernel_matrix: &'a [Vec<f64>],
    n: usize,
    c: f64,
}

impl Smo<'_> {
    fn sign(&self, p: usize) -> f64 {
        if p < self.n {
            1.0
        } else {
            -1.0
        }
    }

    /// Working-pair selection: the strongest ascent candidate vs the
    /// strongest descent candidate. Returns (up, low, violation m - M).
    fn select(&self) -> (usize, usize, f64) {
        let mut up = usize::MAX;
        let mut m = f64::NEG_INFINITY;
        let mut low = usize::MAX;
        let mut big_m = f64::INFINITY;
        for p in 0..2 * self.n {
            let s = self.sign(p);
            let v = -s * self.grad[p];
            let in_up = (s > 0.0 && self.z[p] < self.c) || (s < 0.0 && self.z[p] > 0.0);
            let in_low = (s > 0.0 && self.z[p] > 0.0) || (s < 0.0 && self.z[p] < self.c);
            if in_up && v > m {
                m = v;
                up = p;
            }
            if in_low && v < big_m {
                big_m = v;
                low = p;
            }
        }
        (up, low, m - big_m)
    }

    /// Exact solution of the two-variable subproblem, then gradient update.
    fn update_pair(&mut self, i: usize, j: usize) {
        let (si, sj) = (self.sign(i), self.sign(j));
        let (ki, kj) = (i % self.n, j % self.n);
        let k_ii = self.kernel_matrix[ki][ki];
        let k_jj = self.kernel_matrix[kj][kj];
        let k_ij = self.kernel_matrix[ki][kj];
        let c = self.c;

        let old_i = self.z[i];
        let old_j = self.z[j];

        if si != sj {
            let quad = (k_ii + k_jj + 2.0 * si * sj * k_ij).max(TAU);
            let delta = (-self.grad[i] - self.grad[j]) / quad;
            let diff = self.z[i] - self.z[j];
            self.z[i] += delta;
            self.z[j] += delta;
            if diff > 0.0 {
                if self.z[j] < 0.0 {
                    self.z[j] = 0.0;
                    self.z[i] = diff;
                }
            } else if self.z[i] < 0.0 {
                self.z[i] = 0.0;
                self.z[j] = -diff;
            }
            if diff > 0.0 {
                if self.z[i] > c {
                    self.z[i] = c;
                    self.z[j] = c - diff;
                }
            } else if self.z[j] > c {
                self.z[j] = c;
                self.z[i] = c + diff;
            }
        } else {
            let quad = (k_ii + k_jj - 2.0 * k_ij).max(TAU);
            let delta = (self.grad[i] - self.grad[j]) / quad;
            let sum = self.z[i] + self.z[j];
            self.z[i] -= delta;
            self.z[j] += delta;
            if sum > c {
                if self.z[i] > c {
                    self.z[i] = c;
                    self.z[j] = sum - c;
                }
            } else if self.z[j] < 0.0 {
                self.z[j] = 0.0;
                self.z[i] = sum;
            }
            if sum > c {
                if self.z[j] > c {
                    self.z[j] = c;
                    self.z[i] = sum - c;
                }
            } else if self.z[i] < 0.0 {
                self.z[i] = 0.0;
                self.z[j] = sum;
            }
        }

        let delta_i = si * (self.z[i] - old_i);
        let delta_j = sj * (self.z[j] - old_j);
        let n = self.n;
        let (row_i, row_j) = (&self.kernel_matrix[ki], &self.kernel_matrix[kj]);
        for (p, g) in self.grad.iter_mut().enumerate() {
            let base = row_i[p % n] * delta_i + row_j[p % n] * delta_j;
            let sign = if p < n { 1.0 } else { -1.0 };
            *g += sign * base;
        }
    }
}

/// Train an epsilon-SVR model.
///
/// Features and targets are standardized internally; `params.epsilon` and
/// `params.c` apply in standardized target units. On a hit pass budget the
/// best iterate comes back inside [`RegressError::NoConvergence`] rather
/// than silently.
pub fn svr_train(x: &[Vec<f64>], y: &[f64], params: &SvrParams) -> Result<SvrModel, RegressError> {
    let n = x.len();
    if n < 2 {
        return Err(RegressError::TooFewSamples { needed: 2, got: n });
    }
    if y.len() != n {
        return Err(RegressError::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if x.iter().flatten().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(RegressError::NonFiniteInput);
    }

    let feature_scaler = Scaler::fit_unchecked(x);
    let xs = feature_scaler.transform(x);
    let target_scaler = TargetScaler::fit(y);
    let ys: Vec<f64> = y.iter().map(|&v| target_scaler.transform(v)).collect();

    let kernel_matrix: Vec<Vec<f64>> = xs
        .iter()
        .map(|a| xs.iter().map(|b| params.kernel.apply(a, b)).collect())
        .collect();

    // z = 0 gives gradient = [eps - y; eps + y].
    let mut grad = Vec::with_capacity(2 * n);
    grad.extend(ys.iter().map(|&v| params.epsilon - v));
    grad.extend(ys.iter().map(|&v| params.epsilon + v));
    let mut smo = Smo {
        z: vec![0.0; 2 * n],
        grad,
        kernel_matrix: &kernel_matrix,
        n,
        c: params.c,
    };

    let mut converged = false;
    let mut violation;
    let mut bias;
    let mut passes = 0;
    loop {
        let (up, low, v) = smo.select();
        violation = v;
        // Midpoint of the optimality interval estimates the bias.
        bias = -(smo.grad[up] * smo.sign(up) + smo.grad[low] * smo.sign(low)) / 2.0;
        if v <= params.kkt_tol {
            converged = true;
            break;
        }
        if passes >= params.max_passes {
            break;
        }
        smo.update_pair(up, low);
        passes += 1;
    }

    let beta: Vec<f64> = (0..n).map(|i| smo.z[i] - smo.z[i + n]).collect();
    let mut dual_objective = 0.0;
    for i in 0..n {
        dual_objective += ys[i] * beta[i] - params.epsilon * beta[i].abs();
        for j in 0..n {
            dual_objective -= 0.5 * beta[i] * beta[j] * kernel_matrix[i][j];
        }
    }

    let mut support_vectors = Vec::new();
    let mut dual_coefs = Vec::new();
    for (i, &b) in beta.iter().enumerate() {
        if b != 0.0 {
            support_vectors.push(xs[i].clone());
            dual_coefs.push(b);
        }
    }

    let model = SvrModel {
        kernel: params.kernel,
        c: params.c,
        epsilon: params.epsilon,
        support_vectors,
        dual_coefs,
        bias,
        feature_scaler,
        target_scaler,
        dual_objective,
        kkt_violation: violation,
    };
    if converged {
        Ok(model)
    } else {
        Err(RegressError::NoConvergence(Box::new(model)))
    }
}
