//! Per-dimension standardization.
//!
//! Climate variables mix scales (sea-level pressure ~1000 hPa, winds ~1 m/s);
//! without standardization the largest-scale variable dominates Euclidean and
//! likelihood geometry. Every clustering or regression entry point
//! standardizes internally and stores the scaler in the fitted model.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ScaleError {
    #[error("too few points to standardize: need {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("dimension mismatch: scaler has {expected} dims, point has {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Invertible per-dimension affine transform `x -> (x - mean) / std`.
///
/// Uses the population standard deviation (divide by n). A constant dimension
/// gets standard deviation 1, so it is centered but not rescaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Scaler {
    /// Fit from at least one point; all points must share a dimension.
    pub(crate) fn fit_unchecked(points: &[Vec<f64>]) -> Self {
        let n = points.len();
        let d = points[0].len();
        let mut means = vec![0.0; d];
        for p in points {
            for (m, &v) in means.iter_mut().zip(p) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n as f64;
        }
        let mut stds = vec![0.0; d];
        for p in points {
            for ((s, &v), &m) in stds.iter_mut().zip(p).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut stds {
            *s = (*s / n as f64).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        Scaler { means, stds }
    }

    /// Fit from two or more points.
    pub fn fit(points: &[Vec<f64>]) -> Result<Self, ScaleError> {
        if points.len() < 2 {
            return Err(ScaleError::TooFewPoints {
                needed: 2,
                got: points.len(),
            });
        }
        Ok(Self::fit_unchecked(points))
    }

    /// Identity transform in `dim` dimensions (mean 0, std 1).
    pub fn identity(dim: usize) -> Self {
        Scaler {
            means: vec![0.0; dim],
            stds: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.means.len()
    }

    pub fn transform_point(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.dim());
        x.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((&v, &m), &s)| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, points: &[Vec<f64>]) -> Vec<Vec<f64>> {
        points.iter().map(|p| self.transform_point(p)).collect()
    }

    pub fn inverse_point(&self, z: &[f64]) -> Vec<f64> {
        debug_assert_eq!(z.len(), self.dim());
        z.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((&v, &m), &s)| v * s + m)
            .collect()
    }
}

/// Standardize a point set; the returned scaler inverts the transform.
pub fn standardize(points: &[Vec<f64>]) -> Result<(Vec<Vec<f64>>, Scaler), ScaleError> {
    let scaler = Scaler::fit(points)?;
    Ok((scaler.transform(points), scaler))
}

/// Mean/std pair for a scalar target; same conventions as [`Scaler`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetScaler {
    pub mean: f64,
    pub std: f64,
}

impl TargetScaler {
    pub fn fit(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        TargetScaler {
            mean,
            std: if std == 0.0 { 1.0 } else { std },
        }
    }

    pub fn transform(&self, y: f64) -> f64 {
        (y - self.mean) / self.std
    }

    pub fn inverse(&self, z: f64) -> f64 {
        z * self.std + self.mean
    }
}
