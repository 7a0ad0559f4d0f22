//! Lloyd's algorithm with k-means++ seeding and restarts.
//!
//! k-means is sensitive to its initial centers, so `kmeans_fit` runs
//! `n_init` independent k-means++ starts and keeps the lowest-inertia
//! result. Ties everywhere break toward the lowest index so results are
//! deterministic for a given seed.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ClusterError;
use crate::scale::Scaler;
use crate::seeding::{derive_seed, rng_from};

const RESTART_TAG: u64 = 0x6b6d;

/// Fitted k-means model; centroids live in standardized space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub centroids: Vec<Vec<f64>>,
    pub scaler: Scaler,
    /// Sum of squared distances from each point to its nearest centroid.
    pub inertia: f64,
}

impl KMeansModel {
    pub fn k(&self) -> usize {
        self.centroids.len()
    }
}

#[derive(Debug, Clone)]
pub struct KMeansConfig {
    pub max_iter: usize,
    /// Early exit when the summed squared centroid shift falls below this;
    /// convergence is otherwise detected by a stable assignment.
    pub tol: f64,
    pub seed: u64,
    pub n_init: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            max_iter: 300,
            tol: 1e-9,
            seed: 0,
            n_init: 10,
        }
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest centroid; ties go to the lowest index.
fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = sq_dist(point, &centroids[0]);
    for (i, c) in centroids.iter().enumerate().skip(1) {
        let d = sq_dist(point, c);
        if d < best_d {
            best = i;
            best_d = d;
        }
    }
    best
}

fn assign_all(points: &[Vec<f64>], centroids: &[Vec<f64>]) -> Vec<usize> {
    points.iter().map(|p| nearest(p, centroids)).collect()
}

fn total_inertia(points: &[Vec<f64>], centroids: &[Vec<f64>], labels: &[usize]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| sq_dist(p, &centroids[l]))
        .sum()
}

/// k-means++ seeding: first center uniform, then distance-squared weighted.
/// Plain (non-greedy) sampling: across restarts the extra seeding diversity
/// finds global optima on small inputs more reliably than greedy variants.
fn kmeanspp_init(points: &[Vec<f64>], k: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    centers.push(points[rng.random_range(0..n)].clone());

    let mut d2: Vec<f64> = points.iter().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            // All points coincide with a chosen center; any pick works.
            rng.random_range(0..n)
        };
        centers.push(points[next].clone());
        for (w, p) in d2.iter_mut().zip(points) {
            *w = w.min(sq_dist(p, centers.last().unwrap()));
        }
    }
    centers
}

pub(crate) struct LloydRun {
    pub centroids: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub inertia: f64,
    /// Inertia after each Lloyd iteration (center update + reassignment).
    pub inertia_trace: Vec<f64>,
}

/// One k-means++-seeded Lloyd run on standardized points.
pub(crate) fn lloyd_run(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
    tol: f64,
) -> LloydRun {
    let d = points[0].len();
    let mut rng = rng_from(seed);
    let mut centroids = kmeanspp_init(points, k, &mut rng);
    let mut labels = assign_all(points, &centroids);
    let mut trace = Vec::new();

    for _ in 0..max_iter {
        // Center update from the current assignment.
        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            counts[l] += 1;
            for (s, v) in sums[l].iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut shift = 0.0;
        let mut taken = vec![false; points.len()];
        for j in 0..k {
            if counts[j] > 0 {
                for s in &mut sums[j] {
                    *s /= counts[j] as f64;
                }
                shift += sq_dist(&sums[j], &centroids[j]);
                centroids[j] = std::mem::take(&mut sums[j]);
            } else {
                // Reseed an empty cluster at the point farthest from its
                // current centroid, skipping points already used as reseeds.
                let mut far = 0;
                let mut far_d = -1.0;
                for (i, p) in points.iter().enumerate() {
                    if taken[i] {
                        continue;
                    }
                    let dist = sq_dist(p, &centroids[labels[i]]);
                    if dist > far_d {
                        far = i;
                        far_d = dist;
                    }
                }
                taken[far] = true;
                shift += sq_dist(&points[far], &centroids[j]);
                centroids[j] = points[far].clone();
            }
        }

        let new_labels = assign_all(points, &centroids);
        let stable = new_labels == labels;
        labels = new_labels;
        trace.push(total_inertia(points, &centroids, &labels));
        if stable || shift <= tol {
            break;
        }
    }

    let inertia = total_inertia(points, &centroids, &labels);
    LloydRun {
        centroids,
        labels,
        inertia,
        inertia_trace: trace,
    }
}

/// Fit k-means on raw points (standardized internally); best of `n_init`
/// runs by inertia.
pub fn kmeans_fit(
    points: &[Vec<f64>],
    k: usize,
    config: &KMeansConfig,
) -> Result<KMeansModel, ClusterError> {
    Ok(kmeans_fit_with_trace(points, k, config)?.0)
}

/// As [`kmeans_fit`], also returning the winning run's per-iteration inertia.
pub fn kmeans_fit_with_trace(
    points: &[Vec<f64>],
    k: usize,
    config: &KMeansConfig,
) -> Result<(KMeansModel, Vec<f64>), ClusterError> {
    if k == 0 || points.len() < k {
        return Err(ClusterError::TooFewPoints {
            needed: k.max(1),
            got: points.len(),
        });
    }
    let scaler = Scaler::fit_unchecked(points);
    let xs = scaler.transform(points);
    let n_init = config.n_init.max(1);

    let runs: Vec<LloydRun> = (0..n_init)
        .into_par_iter()
        .map(|r| {
            let seed = derive_seed(config.seed, &[RESTART_TAG, r as u64]);
            lloyd_run(&xs, k, seed, config.max_iter, config.tol)
        })
        .collect();

    let best = runs
        .into_iter()
        .reduce(|best, run| {
            if run.inertia < best.inertia {
                run
            } else {
                best
            }
        })
        .unwrap();

    Ok((
        KMeansModel {
            centroids: best.centroids,
            scaler,
            inertia: best.inertia,
        },
        best.inertia_trace,
    ))
}

/// Nearest-centroid labels for raw points (standardized via the model's
/// scaler); ties go to the lowest centroid index.
pub fn kmeans_assign(points: &[Vec<f64>], model: &KMeansModel) -> Vec<usize> {
    points
        .iter()
        .map(|p| nearest(&model.scaler.transform_point(p), &model.centroids))
        .collect()
}
