//! Per-region predictive models: epsilon-SVR (SMO dual solver) and ordinary
//! least squares, plus the k-fold CV and grid-search machinery used to pick
//! SVR hyperparameters.

mod ols;
mod svr;

pub use ols::{ols_fit, ols_predict, LinearModel, DEFAULT_RIDGE_JITTER};
pub use svr::{svr_predict, svr_train, SvrModel};

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::cv::make_folds;
use crate::scale::ScaleError;

#[derive(Debug, Error, PartialEq)]
pub enum RegressError {
    #[error("input contains non-finite values")]
    NonFiniteInput,
    /// The solver hit its pass budget; the best iterate is attached so the
    /// caller can still inspect or use it deliberately.
    #[error("SMO did not reach the KKT tolerance within the pass budget (violation {:.3e})", .0.kkt_violation)]
    NoConvergence(Box<SvrModel>),
    #[error("too few samples: need {needed}, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("normal equations are singular beyond the ridge jitter's help")]
    SingularSystem,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("hyperparameter grid is empty")]
    EmptyGrid,
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: Box<RegressError>,
    },
    #[error(transparent)]
    Scale(#[from] ScaleError),
}

/// Kernel for the SVR decision function, applied in standardized feature
/// space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Rbf { gamma: f64 },
    Linear,
}

impl KernelSpec {
    pub fn gamma(&self) -> Option<f64> {
        match self {
            KernelSpec::Rbf { gamma } => Some(*gamma),
            KernelSpec::Linear => None,
        }
    }

    pub fn apply(&self, a: &[f64], b: &[f64]) -> f64 {
        match *self {
            KernelSpec::Rbf { gamma } => {
                let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                (-gamma * d2).exp()
            }
            KernelSpec::Linear => a.iter().zip(b).map(|(x, y)| x * y).sum(),
        }
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Rbf { gamma } => write!(f, "rbf(gamma={gamma})"),
            KernelSpec::Linear => write!(f, "linear"),
        }
    }
}

/// Epsilon-SVR hyperparameters.
///
/// `epsilon` is interpreted in **standardized target units**: targets are
/// standardized inside `svr_train`, so one default tube width is meaningful
/// across variables with very different scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SvrParams {
    pub c: f64,
    pub epsilon: f64,
    pub kernel: KernelSpec,
    /// Convergence threshold on the maximal KKT violation.
    pub kkt_tol: f64,
    /// Budget of SMO pair updates before giving up.
    pub max_passes: usize,
}

impl SvrParams {
    pub fn new(kernel: KernelSpec) -> Self {
        SvrParams {
            c: 10.0,
            epsilon: 0.1,
            kernel,
            kkt_tol: 1e-3,
            max_passes: 1_000_000,
        }
    }

    /// Default search grid for `d`-dimensional features:
    /// C in {1, 10, 100} x epsilon in {0.01, 0.1, 0.5} x gamma in
    /// {0.1/d, 1/d, 10/d}, enumerated in that (C-major) order.
    pub fn default_grid(d: usize) -> Vec<SvrParams> {
        let d = d.max(1) as f64;
        let mut grid = Vec::with_capacity(27);
        for c in [1.0, 10.0, 100.0] {
            for epsilon in [0.01, 0.1, 0.5] {
                for gamma in [0.1 / d, 1.0 / d, 10.0 / d] {
                    grid.push(SvrParams {
                        c,
                        epsilon,
                        kernel: KernelSpec::Rbf { gamma },
                        ..SvrParams::new(KernelSpec::Linear)
                    });
                }
            }
        }
        grid
    }
}

impl fmt::Display for SvrParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "C={} epsilon={} kernel={}",
            self.c, self.epsilon, self.kernel
        )
    }
}

/// Anything that maps a feature vector to a scalar prediction.
pub trait Predictor {
    fn predict_one(&self, x: &[f64]) -> Result<f64, RegressError>;
}

/// Cross-validation outcome: per-fold RMSE plus summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub per_fold_rmse: Vec<f64>,
    pub mean_rmse: f64,
    /// Population standard deviation of the per-fold RMSEs.
    pub std_rmse: f64,
    pub chosen_hyperparams: Option<SvrParams>,
}

impl CvReport {
    fn from_folds(per_fold_rmse: Vec<f64>) -> Self {
        let n = per_fold_rmse.len() as f64;
        let mean_rmse = per_fold_rmse.iter().sum::<f64>() / n;
        let var = per_fold_rmse
            .iter()
            .map(|r| (r - mean_rmse) * (r - mean_rmse))
            .sum::<f64>()
            / n;
        CvReport {
            per_fold_rmse,
            mean_rmse,
            std_rmse: var.sqrt(),
            chosen_hyperparams: None,
        }
    }
}

/// k-fold cross-validated RMSE of whatever `trainer` produces.
///
/// For each fold, the model is trained on the complement and scored on the
/// held-out fold; trainer errors are annotated with the failing fold.
pub fn cv_rmse<M, F>(
    x: &[Vec<f64>],
    y: &[f64],
    folds: usize,
    seed: u64,
    trainer: F,
) -> Result<CvReport, RegressError>
where
    M: Predictor,
    F: Fn(&[Vec<f64>], &[f64]) -> Result<M, RegressError>,
{
    let n = x.len();
    if y.len() != n {
        return Err(RegressError::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    let partition = make_folds(n, folds, seed)?;

    let mut per_fold = Vec::with_capacity(folds);
    for (f, held) in partition.iter().enumerate() {
        let annotate = |e: RegressError| RegressError::Fold {
            fold: f,
            source: Box::new(e),
        };
        let mut train_x = Vec::with_capacity(n - held.len());
        let mut train_y = Vec::with_capacity(n - held.len());
        for i in 0..n {
            if !held.contains(&i) {
                train_x.push(x[i].clone());
                train_y.push(y[i]);
            }
        }
        let model = trainer(&train_x, &train_y).map_err(annotate)?;
        let mut sq_sum = 0.0;
        for &i in held {
            let pred = model.predict_one(&x[i]).map_err(annotate)?;
            sq_sum += (pred - y[i]) * (pred - y[i]);
        }
        per_fold.push((sq_sum / held.len() as f64).sqrt());
    }
    Ok(CvReport::from_folds(per_fold))
}

/// Exhaustive CV over an SVR hyperparameter grid.
///
/// Every grid point is scored on the same fold partition (built once from
/// `seed`); the lowest mean RMSE wins and ties break by grid order. Grid
/// points are evaluated concurrently; the outcome is identical to a
/// sequential scan.
pub fn grid_search(
    x: &[Vec<f64>],
    y: &[f64],
    param_grid: &[SvrParams],
    folds: usize,
    seed: u64,
) -> Result<(SvrParams, CvReport), RegressError> {
    if param_grid.is_empty() {
        return Err(RegressError::EmptyGrid);
    }
    let reports: Vec<Result<CvReport, RegressError>> = param_grid
        .par_iter()
        .map(|params| cv_rmse(x, y, folds, seed, |tx, ty| svr_train(tx, ty, params)))
        .collect();

    let mut best: Option<(usize, CvReport)> = None;
    for (i, report) in reports.into_iter().enumerate() {
        let report = report?;
        if best
            .as_ref()
            .is_none_or(|(_, b)| report.mean_rmse < b.mean_rmse)
        {
            best = Some((i, report));
        }
    }
    let (i, mut report) = best.unwrap();
    report.chosen_hyperparams = Some(param_grid[i]);
    Ok((param_grid[i], report))
}
