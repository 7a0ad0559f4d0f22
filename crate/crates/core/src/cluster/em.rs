//! Diagonal-covariance Gaussian mixtures fitted by expectation maximization.
//!
//! Responsibilities and likelihoods are computed in log space with
//! log-sum-exp throughout: mixture likelihoods underflow quickly at d = 7
//! once points sit more than a few dozen standardized units from a
//! component, and the iterative mean/variance updates must stay stable
//! there.
//!
//! The component count can be chosen by 10-fold cross-validated held-out
//! log-likelihood ([`select_k_cv`]): k grows from `k_min` while the mean
//! held-out score keeps improving.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kmeans::lloyd_run;
use super::ClusterError;
use crate::cv::make_folds;
use crate::scale::Scaler;
use crate::seeding::derive_seed;

const RESTART_TAG: u64 = 0xe31;
const FOLD_TAG: u64 = 0xcf01d;
const INIT_TAG: u64 = 0x1217;

const LN_2PI: f64 = 1.837877066409345483560659472811;

/// Weight floor below which a component is reported as degenerate.
const WEIGHT_FLOOR: f64 = 1e-12;

/// One mixture component with diagonal covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    /// Prior probability; the weights of a model sum to 1.
    pub weight: f64,
    pub mean: Vec<f64>,
    /// Per-dimension variances, each at least the configured floor.
    pub variance: Vec<f64>,
}

/// Fitted Gaussian mixture. Components live in standardized space; the
/// scaler maps raw points into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureModel {
    pub k: usize,
    pub scaler: Scaler,
    pub components: Vec<GaussianComponent>,
    pub final_log_likelihood: f64,
}

#[derive(Debug, Clone)]
pub struct EmConfig {
    pub max_iter: usize,
    /// Stop when |ll - prev| <= rel_tol * max(|ll|, 1).
    pub rel_tol: f64,
    /// Lower bound on per-dimension variances, in standardized units.
    pub variance_floor: f64,
    pub seed: u64,
    /// Independent restarts; the best final log-likelihood wins.
    pub n_init: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        EmConfig {
            max_iter: 200,
            rel_tol: 1e-7,
            variance_floor: 1e-6,
            seed: 0,
            n_init: 5,
        }
    }
}

fn logsumexp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// ln(weight_j) + ln N(x | mean_j, diag variance_j) for every component.
fn log_joint(x: &[f64], components: &[GaussianComponent]) -> Vec<f64> {
    components
        .iter()
        .map(|c| {
            let mut acc = c.weight.ln();
            for ((&v, &m), &var) in x.iter().zip(&c.mean).zip(&c.variance) {
                let diff = v - m;
                acc -= 0.5 * (LN_2PI + var.ln() + diff * diff / var);
            }
            acc
        })
        .collect()
}

/// E step over points already in component space. Returns the
/// responsibility matrix and the total log-likelihood.
fn e_step_components(
    points: &[Vec<f64>],
    components: &[GaussianComponent],
) -> (Vec<Vec<f64>>, f64) {
    let mut total_ll = 0.0;
    let resp = points
        .iter()
        .map(|x| {
            let mut row = log_joint(x, components);
            let lse = logsumexp(&row);
            total_ll += lse;
            for v in &mut row {
                *v = (*v - lse).exp();
            }
            let sum: f64 = row.iter().sum();
            for v in &mut row {
                *v /= sum;
            }
            row
        })
        .collect();
    (resp, total_ll)
}

fn log_likelihood_components(points: &[Vec<f64>], components: &[GaussianComponent]) -> f64 {
    points
        .iter()
        .map(|x| logsumexp(&log_joint(x, components)))
        .sum()
}

/// Responsibility-weighted component update: weights, means, and floored
/// variances. Space-agnostic; points and responsibilities must correspond.
pub fn m_step(
    points: &[Vec<f64>],
    responsibilities: &[Vec<f64>],
    variance_floor: f64,
) -> Result<Vec<GaussianComponent>, ClusterError> {
    let n = points.len();
    let d = points[0].len();
    let k = responsibilities[0].len();

    let mut components = Vec::with_capacity(k);
    for j in 0..k {
        let total: f64 = responsibilities.iter().map(|r| r[j]).sum();
        let weight = total / n as f64;
        if weight < WEIGHT_FLOOR {
            return Err(ClusterError::DegenerateComponent {
                component: j,
                weight,
            });
        }
        let mut mean = vec![0.0; d];
        for (x, r) in points.iter().zip(responsibilities) {
            for (m, &v) in mean.iter_mut().zip(x) {
                *m += r[j] * v;
            }
        }
        for m in &mut mean {
            *m /= total;
        }
        let mut variance = vec![0.0; d];
        for (x, r) in points.iter().zip(responsibilities) {
            for ((s, &v), &m) in variance.iter_mut().zip(x).zip(&mean) {
                let diff = v - m;
                *s += r[j] * diff * diff;
            }
        }
        for s in &mut variance {
            *s = (*s / total).max(variance_floor);
        }
        components.push(GaussianComponent {
            weight,
            mean,
            variance,
        });
    }
    Ok(components)
}

/// Posterior responsibilities of the model's components for raw points.
/// Rows sum to 1.
pub fn e_step(points: &[Vec<f64>], model: &MixtureModel) -> Vec<Vec<f64>> {
    let xs = model.scaler.transform(points);
    e_step_components(&xs, &model.components).0
}

/// Total mixture log-likelihood of raw points under the model.
pub fn log_likelihood(points: &[Vec<f64>], model: &MixtureModel) -> f64 {
    let xs = model.scaler.transform(points);
    log_likelihood_components(&xs, &model.components)
}

/// Max-responsibility component per point; ties go to the lowest index.
pub fn assign_hard(points: &[Vec<f64>], model: &MixtureModel) -> Vec<usize> {
    e_step(points, model)
        .into_iter()
        .map(|row| {
            let mut best = 0;
            let mut best_v = row[0];
            for (j, &v) in row.iter().enumerate().skip(1) {
                if v > best_v {
                    best = j;
                    best_v = v;
                }
            }
            best
        })
        .collect()
}

/// k-means-seeded starting components: means from a Lloyd run, variances
/// and weights from its clusters.
fn init_components(
    xs: &[Vec<f64>],
    k: usize,
    variance_floor: f64,
    seed: u64,
) -> Result<Vec<GaussianComponent>, ClusterError> {
    let run = lloyd_run(xs, k, derive_seed(seed, &[INIT_TAG]), 100, 1e-9);
    let n = xs.len();
    let d = xs[0].len();
    let mut components = Vec::with_capacity(k);
    for j in 0..k {
        let members: Vec<&Vec<f64>> = xs
            .iter()
            .zip(&run.labels)
            .filter(|(_, &l)| l == j)
            .map(|(x, _)| x)
            .collect();
        let weight = members.len() as f64 / n as f64;
        if weight < WEIGHT_FLOOR {
            return Err(ClusterError::DegenerateComponent {
                component: j,
                weight,
            });
        }
        let mean = run.centroids[j].clone();
        let mut variance = vec![0.0; d];
        for x in &members {
            for (s, (v, m)) in variance.iter_mut().zip(x.iter().zip(&mean)) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut variance {
            *s = (*s / members.len() as f64).max(variance_floor);
        }
        components.push(GaussianComponent {
            weight,
            mean,
            variance,
        });
    }
    Ok(components)
}

/// Components plus the per-iteration log-likelihood trace of one run.
type EmRun = (Vec<GaussianComponent>, Vec<f64>);

/// One EM run; returns components and the per-iteration log-likelihood
/// trace (which is non-decreasing up to rounding).
fn em_run(xs: &[Vec<f64>], k: usize, config: &EmConfig, seed: u64) -> Result<EmRun, ClusterError> {
    let mut components = init_components(xs, k, config.variance_floor, seed)?;
    let mut trace = Vec::new();
    for iter in 0..=config.max_iter {
        let (resp, ll) = e_step_components(xs, &components);
        trace.push(ll);
        let converged =
            iter > 0 && (ll - trace[iter - 1]).abs() <= config.rel_tol * ll.abs().max(1.0);
        if converged || iter == config.max_iter {
            break;
        }
        components = m_step(xs, &resp, config.variance_floor)?;
    }
    Ok((components, trace))
}

/// Fit a k-component mixture to raw points.
///
/// Points are standardized internally; `n_init` restarts run independently
/// (each seeded from `config.seed` and its restart index) and the best
/// final log-likelihood wins, so the result is reproducible regardless of
/// execution order.
pub fn em_fit(
    points: &[Vec<f64>],
    k: usize,
    config: &EmConfig,
) -> Result<MixtureModel, ClusterError> {
    Ok(em_fit_with_trace(points, k, config)?.0)
}

/// As [`em_fit`], also returning every restart's log-likelihood trace.
pub fn em_fit_with_trace(
    points: &[Vec<f64>],
    k: usize,
    config: &EmConfig,
) -> Result<(MixtureModel, Vec<Vec<f64>>), ClusterError> {
    if k == 0 || points.len() < k {
        return Err(ClusterError::TooFewPoints {
            needed: k.max(1),
            got: points.len(),
        });
    }
    let scaler = Scaler::fit_unchecked(points);
    let xs = scaler.transform(points);
    let n_init = config.n_init.max(1);

    let runs: Vec<Result<EmRun, ClusterError>> = (0..n_init)
        .into_par_iter()
        .map(|r| {
            em_run(
                &xs,
                k,
                config,
                derive_seed(config.seed, &[RESTART_TAG, r as u64]),
            )
        })
        .collect();

    let mut best: Option<EmRun> = None;
    let mut first_err = None;
    let mut traces = Vec::with_capacity(n_init);
    for run in runs {
        match run {
            Ok((components, trace)) => {
                traces.push(trace.clone());
                let ll = *trace.last().unwrap();
                if best.as_ref().is_none_or(|(_, t)| ll > *t.last().unwrap()) {
                    best = Some((components, trace));
                }
            }
            Err(e) => first_err = first_err.or(Some(e)),
        }
    }
    match best {
        Some((components, trace)) => Ok((
            MixtureModel {
                k,
                scaler,
                components,
                final_log_likelihood: *trace.last().unwrap(),
            },
            traces,
        )),
        None => Err(first_err.unwrap()),
    }
}

#[derive(Debug, Clone)]
pub struct SelectKConfig {
    pub k_min: usize,
    pub k_max: usize,
    pub folds: usize,
    pub seed: u64,
    /// Keep growing k while the mean held-out log-likelihood improves by
    /// more than this.
    pub abs_improve_tol: f64,
    /// EM settings for the per-fold fits; its seed field is ignored (fold
    /// seeds derive from `seed`).
    pub em: EmConfig,
}

impl Default for SelectKConfig {
    fn default() -> Self {
        SelectKConfig {
            k_min: 1,
            k_max: 12,
            folds: 10,
            seed: 0,
            abs_improve_tol: 0.0,
            // Selection compares likelihoods across k, so the per-fold fits
            // need enough restarts to reach theirs; a fit stuck in a local
            // optimum at the true k makes k+1 look better than it is.
            em: EmConfig {
                n_init: 10,
                ..EmConfig::default()
            },
        }
    }
}

/// Mean per-point held-out log-likelihood of a k-component fit, averaged
/// over the folds. `None` when some fold cannot support k components.
fn cv_score(
    points: &[Vec<f64>],
    folds: &[Vec<usize>],
    k: usize,
    config: &SelectKConfig,
) -> Result<Option<f64>, ClusterError> {
    let scores: Vec<Result<Option<f64>, ClusterError>> = folds
        .par_iter()
        .enumerate()
        .map(|(f, held)| {
            let train: Vec<Vec<f64>> = points
                .iter()
                .enumerate()
                .filter(|(i, _)| !held.contains(i))
                .map(|(_, p)| p.clone())
                .collect();
            if train.len() < k {
                return Ok(None);
            }
            let em = EmConfig {
                seed: derive_seed(config.seed, &[FOLD_TAG, k as u64, f as u64]),
                ..config.em.clone()
            };
            let model = match em_fit(&train, k, &em) {
                Ok(m) => m,
                Err(ClusterError::DegenerateComponent { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
            let held_points: Vec<Vec<f64>> = held.iter().map(|&i| points[i].clone()).collect();
            Ok(Some(
                log_likelihood(&held_points, &model) / held_points.len() as f64,
            ))
        })
        .collect();

    let mut mean = 0.0;
    for s in &scores {
        match s {
            Ok(Some(v)) => mean += v / folds.len() as f64,
            Ok(None) => return Ok(None),
            Err(e) => return Err(e.clone()),
        }
    }
    Ok(Some(mean))
}

/// Choose the component count by incremental cross-validated likelihood:
/// starting at `k_min`, k advances while the next k's mean held-out
/// log-likelihood improves by more than `abs_improve_tol`.
pub fn select_k_cv(points: &[Vec<f64>], config: &SelectKConfig) -> Result<usize, ClusterError> {
    if config.folds < 2 || points.len() < config.folds {
        return Err(ClusterError::TooFewPoints {
            needed: config.folds.max(2),
            got: points.len(),
        });
    }
    let folds = make_folds(
        points.len(),
        config.folds,
        derive_seed(config.seed, &[FOLD_TAG]),
    )
    .map_err(|_| ClusterError::TooFewPoints {
        needed: config.folds,
        got: points.len(),
    })?;

    let mut k = config.k_min.max(1);
    let mut score = match cv_score(points, &folds, k, config)? {
        Some(s) => s,
        None => return Ok(k),
    };
    while k < config.k_max {
        match cv_score(points, &folds, k + 1, config)? {
            Some(next) if next - score > config.abs_improve_tol => {
                k += 1;
                score = next;
            }
            _ => break,
        }
    }
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand_distr::{Distribution, Normal};

    fn identity_model(components: Vec<GaussianComponent>) -> MixtureModel {
        let d = components[0].mean.len();
        MixtureModel {
            k: components.len(),
            scaler: Scaler::identity(d),
            final_log_likelihood: 0.0,
            components,
        }
    }

    fn gaussian_blob(rng: &mut impl Rng, center: &[f64], std: f64, n: usize) -> Vec<Vec<f64>> {
        let normal = Normal::new(0.0, std).unwrap();
        (0..n)
            .map(|_| center.iter().map(|&c| c + normal.sample(rng)).collect())
            .collect()
    }

    /// Direct non-log density evaluation, for cross-checking.
    fn naive_density(x: &[f64], c: &GaussianComponent) -> f64 {
        let mut p = 1.0;
        for ((&v, &m), &var) in x.iter().zip(&c.mean).zip(&c.variance) {
            let diff = v - m;
            p *= (-diff * diff / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt();
        }
        p
    }

    #[test]
    fn single_component_responsibilities_are_one() {
        let model = identity_model(vec![GaussianComponent {
            weight: 1.0,
            mean: vec![0.0, 0.0],
            variance: vec![1.0, 1.0],
        }]);
        let resp = e_step(&[vec![3.0, -2.0], vec![0.1, 0.2]], &model);
        for row in resp {
            assert_eq!(row, vec![1.0]);
        }
    }

    #[test]
    fn equidistant_point_splits_evenly() {
        let model = identity_model(vec![
            GaussianComponent {
                weight: 0.5,
                mean: vec![-1.0],
                variance: vec![0.7],
            },
            GaussianComponent {
                weight: 0.5,
                mean: vec![1.0],
                variance: vec![0.7],
            },
        ]);
        let resp = e_step(&[vec![0.0]], &model);
        assert_abs_diff_eq!(resp[0][0], 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(resp[0][1], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn e_step_matches_naive_computation_where_representable() {
        let mut rng = crate::seeding::rng_from(8);
        let components: Vec<GaussianComponent> = (0..3)
            .map(|_| GaussianComponent {
                weight: 1.0 / 3.0,
                mean: (0..7).map(|_| rng.random_range(-2.0..2.0)).collect(),
                variance: (0..7).map(|_| rng.random_range(0.5..2.0)).collect(),
            })
            .collect();
        let model = identity_model(components.clone());
        let points: Vec<Vec<f64>> = (0..10)
            .map(|_| (0..7).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let resp = e_step(&points, &model);
        for (x, row) in points.iter().zip(&resp) {
            let dens: Vec<f64> = components
                .iter()
                .map(|c| c.weight * naive_density(x, c))
                .collect();
            let total: f64 = dens.iter().sum();
            assert!(total > 0.0, "naive computation underflowed unexpectedly");
            for (r, d) in row.iter().zip(&dens) {
                assert_abs_diff_eq!(*r, d / total, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn e_step_stays_finite_where_naive_underflows() {
        let model = identity_model(vec![
            GaussianComponent {
                weight: 0.5,
                mean: vec![0.0; 7],
                variance: vec![1.0; 7],
            },
            GaussianComponent {
                weight: 0.5,
                mean: vec![90.0; 7],
                variance: vec![1.0; 7],
            },
        ]);
        // 45 standardized units from both components: naive densities are
        // exactly 0 in f64, the log-space path still resolves the split.
        let resp = e_step(&[vec![45.0; 7]], &model);
        assert!(resp[0].iter().all(|v| v.is_finite()));
        assert_abs_diff_eq!(resp[0][0] + resp[0][1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(resp[0][0], 0.5, epsilon = 1e-12);

        let naive = naive_density(&[45.0; 7], &model.components[0]);
        assert_eq!(naive, 0.0);
    }

    #[test]
    fn responsibility_rows_sum_to_one() {
        let mut rng = crate::seeding::rng_from(17);
        for _ in 0..50 {
            let k = rng.random_range(1..5);
            let components: Vec<GaussianComponent> = (0..k)
                .map(|_| GaussianComponent {
                    weight: 1.0 / k as f64,
                    mean: (0..3).map(|_| rng.random_range(-30.0..30.0)).collect(),
                    variance: (0..3).map(|_| rng.random_range(0.01..4.0)).collect(),
                })
                .collect();
            let model = identity_model(components);
            let points: Vec<Vec<f64>> = (0..20)
                .map(|_| (0..3).map(|_| rng.random_range(-40.0..40.0)).collect())
                .collect();
            for row in e_step(&points, &model) {
                let sum: f64 = row.iter().sum();
                assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn m_step_with_hard_responsibilities_gives_partition_statistics() {
        let points = vec![
            vec![1.0, 0.0],
            vec![3.0, 2.0],
            vec![10.0, 8.0],
            vec![14.0, 12.0],
        ];
        let resp = vec![
            vec![1.0, 0.0],
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 1.0],
        ];
        let comps = m_step(&points, &resp, 1e-9).unwrap();
        assert_eq!(comps[0].mean, vec![2.0, 1.0]);
        assert_eq!(comps[1].mean, vec![12.0, 10.0]);
        // Population variance of {1,3} is 1, of {10,14} is 4.
        assert_abs_diff_eq!(comps[0].variance[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(comps[1].variance[0], 4.0, epsilon = 1e-12);
        assert_eq!(comps[0].weight, 0.5);
    }

    #[test]
    fn m_step_with_uniform_responsibilities_collapses_to_global_moments() {
        let points = vec![vec![0.0], vec![2.0], vec![4.0]];
        let resp = vec![vec![0.5, 0.5]; 3];
        let comps = m_step(&points, &resp, 1e-9).unwrap();
        for c in &comps {
            assert_abs_diff_eq!(c.mean[0], 2.0, epsilon = 1e-12);
            // Population variance of {0,2,4} is 8/3.
            assert_abs_diff_eq!(c.variance[0], 8.0 / 3.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.weight, 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn m_step_matches_weighted_moment_recomputation() {
        let mut rng = crate::seeding::rng_from(23);
        let points: Vec<Vec<f64>> = (0..15)
            .map(|_| (0..4).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let resp: Vec<Vec<f64>> = (0..15)
            .map(|_| {
                let a: f64 = rng.random_range(0.05..1.0);
                let b: f64 = rng.random_range(0.05..1.0);
                vec![a / (a + b), b / (a + b)]
            })
            .collect();
        let comps = m_step(&points, &resp, 0.0).unwrap();
        for j in 0..2 {
            let total: f64 = resp.iter().map(|r| r[j]).sum();
            for d in 0..4 {
                let mean: f64 = points
                    .iter()
                    .zip(&resp)
                    .map(|(x, r)| r[j] * x[d])
                    .sum::<f64>()
                    / total;
                let var: f64 = points
                    .iter()
                    .zip(&resp)
                    .map(|(x, r)| r[j] * (x[d] - mean) * (x[d] - mean))
                    .sum::<f64>()
                    / total;
                assert_abs_diff_eq!(comps[j].mean[d], mean, epsilon = 1e-12);
                assert_abs_diff_eq!(comps[j].variance[d], var, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn m_step_floors_variances_and_detects_degenerate_weights() {
        let points = vec![vec![1.0], vec![1.0]];
        let resp = vec![vec![1.0, 0.0], vec![1.0, 0.0]];
        let err = m_step(&points, &resp, 1e-6).unwrap_err();
        assert!(matches!(
            err,
            ClusterError::DegenerateComponent { component: 1, .. }
        ));

        let resp = vec![vec![1.0], vec![1.0]];
        let comps = m_step(&points, &resp, 1e-6).unwrap();
        assert_eq!(comps[0].variance[0], 1e-6);
    }

    #[test]
    fn log_likelihood_at_mode_matches_closed_form() {
        let model = identity_model(vec![GaussianComponent {
            weight: 1.0,
            mean: vec![0.0; 7],
            variance: vec![1.0; 7],
        }]);
        let ll = log_likelihood(&[vec![0.0; 7]], &model);
        assert_abs_diff_eq!(ll, -3.5 * LN_2PI, epsilon = 1e-12);
    }

    #[test]
    fn log_likelihood_is_additive_over_duplicated_data() {
        let mut rng = crate::seeding::rng_from(5);
        let components = vec![
            GaussianComponent {
                weight: 0.3,
                mean: vec![0.0, 1.0],
                variance: vec![1.0, 0.5],
            },
            GaussianComponent {
                weight: 0.7,
                mean: vec![3.0, -1.0],
                variance: vec![2.0, 1.5],
            },
        ];
        let model = identity_model(components);
        let points: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..2).map(|_| rng.random_range(-4.0..6.0)).collect())
            .collect();
        let doubled: Vec<Vec<f64>> = points.iter().chain(points.iter()).cloned().collect();
        let single = log_likelihood(&points, &model);
        let double = log_likelihood(&doubled, &model);
        assert_abs_diff_eq!(double, 2.0 * single, epsilon = 1e-9 * single.abs());
    }

    #[test]
    fn log_likelihood_matches_naive_evaluation() {
        let mut rng = crate::seeding::rng_from(29);
        let components: Vec<GaussianComponent> = (0..2)
            .map(|_| GaussianComponent {
                weight: 0.5,
                mean: (0..3).map(|_| rng.random_range(-1.0..1.0)).collect(),
                variance: (0..3).map(|_| rng.random_range(0.5..2.0)).collect(),
            })
            .collect();
        let model = identity_model(components.clone());
        let points: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..3).map(|_| rng.random_range(-2.0..2.0)).collect())
            .collect();
        let direct: f64 = points
            .iter()
            .map(|x| {
                components
                    .iter()
                    .map(|c| c.weight * naive_density(x, c))
                    .sum::<f64>()
                    .ln()
            })
            .sum();
        assert_abs_diff_eq!(log_likelihood(&points, &model), direct, epsilon = 1e-10);
    }

    #[test]
    fn k1_fit_recovers_sample_moments() {
        let mut rng = crate::seeding::rng_from(31);
        let points: Vec<Vec<f64>> = (0..40)
            .map(|_| (0..3).map(|_| rng.random_range(-5.0..5.0)).collect())
            .collect();
        let model = em_fit(&points, 1, &EmConfig::default()).unwrap();
        let c = &model.components[0];
        assert_eq!(c.weight, 1.0);
        // Standardized data: mean 0, population variance 1 per dimension.
        for d in 0..3 {
            assert_abs_diff_eq!(c.mean[d], 0.0, epsilon = 1e-10);
            assert_abs_diff_eq!(c.variance[d], 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn two_separated_clusters_are_recovered() {
        // Centers 5 apart with within-cluster std 0.5: separation of 10
        // standard deviations.
        let mut rng = crate::seeding::rng_from(101);
        let mut points = gaussian_blob(&mut rng, &[0.0, 0.0, 0.0], 0.5, 100);
        points.extend(gaussian_blob(&mut rng, &[5.0, 5.0, 5.0], 0.5, 100));
        let config = EmConfig {
            seed: 7,
            ..EmConfig::default()
        };
        let model = em_fit(&points, 2, &config).unwrap();
        // Recovered means, mapped back to raw space, near the true centers.
        let mut raw_means: Vec<Vec<f64>> = model
            .components
            .iter()
            .map(|c| model.scaler.inverse_point(&c.mean))
            .collect();
        raw_means.sort_by(|a, b| a[0].total_cmp(&b[0]));
        for d in 0..3 {
            assert!(raw_means[0][d].abs() < 0.1, "low mean off: {raw_means:?}");
            assert!(
                (raw_means[1][d] - 5.0).abs() < 0.1,
                "high mean off: {raw_means:?}"
            );
        }
        for c in &model.components {
            assert!((c.weight - 0.5).abs() < 0.05);
        }
    }

    #[test]
    fn em_trace_is_monotone_and_weights_sum_to_one() {
        let mut rng = crate::seeding::rng_from(55);
        for trial in 0..20 {
            let n = rng.random_range(20..80);
            let k = rng.random_range(1..4);
            let points: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..3).map(|_| rng.random_range(-5.0..5.0)).collect())
                .collect();
            let config = EmConfig {
                seed: trial,
                n_init: 2,
                ..EmConfig::default()
            };
            let (model, traces) = em_fit_with_trace(&points, k, &config).unwrap();
            for trace in &traces {
                for w in trace.windows(2) {
                    assert!(w[1] >= w[0] - 1e-9, "trace decreased: {w:?}");
                }
            }
            let weight_sum: f64 = model.components.iter().map(|c| c.weight).sum();
            assert_abs_diff_eq!(weight_sum, 1.0, epsilon = 1e-9);
            for c in &model.components {
                assert!(c.variance.iter().all(|&v| v >= config.variance_floor));
            }
        }
    }

    #[test]
    fn hard_assignment_matches_argmax_of_e_step() {
        let mut rng = crate::seeding::rng_from(67);
        let mut points = gaussian_blob(&mut rng, &[0.0, 0.0], 1.0, 30);
        points.extend(gaussian_blob(&mut rng, &[6.0, 6.0], 1.0, 30));
        let model = em_fit(&points, 2, &EmConfig::default()).unwrap();
        let labels = assign_hard(&points, &model);
        let resp = e_step(&points, &model);
        for (row, &l) in resp.iter().zip(&labels) {
            let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(row[l], max);
        }
    }

    #[test]
    fn hard_assignment_ties_break_to_lowest_index() {
        let c = GaussianComponent {
            weight: 0.5,
            mean: vec![1.0],
            variance: vec![1.0],
        };
        let model = identity_model(vec![
            GaussianComponent {
                mean: vec![-1.0],
                ..c.clone()
            },
            c,
        ]);
        assert_eq!(assign_hard(&[vec![0.0]], &model), vec![0]);
    }

    #[test]
    fn permuting_components_only_relabels_assignments() {
        let mut rng = crate::seeding::rng_from(90);
        let mut points = gaussian_blob(&mut rng, &[0.0, 0.0], 1.0, 25);
        points.extend(gaussian_blob(&mut rng, &[7.0, 0.0], 1.0, 25));
        points.extend(gaussian_blob(&mut rng, &[0.0, 7.0], 1.0, 25));
        let model = em_fit(&points, 3, &EmConfig::default()).unwrap();
        let mut permuted = model.clone();
        permuted.components.rotate_left(1);
        let a = assign_hard(&points, &model);
        let b = assign_hard(&points, &permuted);
        for (&x, &y) in a.iter().zip(&b) {
            // rotate_left(1) maps old component j to new index (j + k - 1) % k.
            assert_eq!((x + 2) % 3, y);
        }
    }

    #[test]
    fn select_k_finds_one_for_a_single_gaussian() {
        let mut rng = crate::seeding::rng_from(201);
        let points = gaussian_blob(&mut rng, &[0.0; 3], 1.0, 200);
        let config = SelectKConfig {
            k_max: 5,
            seed: 3,
            ..SelectKConfig::default()
        };
        assert_eq!(select_k_cv(&points, &config).unwrap(), 1);
    }

    #[test]
    fn select_k_finds_three_well_separated_clusters() {
        let mut agree = 0;
        for seed in 0..10 {
            let mut rng = crate::seeding::rng_from(400 + seed);
            let mut points = gaussian_blob(&mut rng, &[0.0, 0.0], 1.0, 70);
            points.extend(gaussian_blob(&mut rng, &[12.0, 0.0], 1.0, 70));
            points.extend(gaussian_blob(&mut rng, &[0.0, 12.0], 1.0, 70));
            let config = SelectKConfig {
                k_max: 6,
                seed,
                ..SelectKConfig::default()
            };
            if select_k_cv(&points, &config).unwrap() == 3 {
                agree += 1;
            }
        }
        assert!(agree >= 8, "only {agree}/10 seeds selected k=3");
    }

    #[test]
    fn em_fit_is_deterministic_given_seed() {
        let mut rng = crate::seeding::rng_from(77);
        let points: Vec<Vec<f64>> = (0..60)
            .map(|_| (0..4).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let config = EmConfig {
            seed: 19,
            ..EmConfig::default()
        };
        let a = em_fit(&points, 3, &config).unwrap();
        let b = em_fit(&points, 3, &config).unwrap();
        assert_eq!(a, b);
        let json_a = serde_json::to_string(&a).unwrap();
        let json_b = serde_json::to_string(&b).unwrap();
        assert_eq!(json_a, json_b);
    }

    #[test]
    fn mixture_model_json_round_trips_exactly() {
        let mut rng = crate::seeding::rng_from(83);
        let points: Vec<Vec<f64>> = (0..30)
            .map(|_| (0..7).map(|_| rng.random_range(-3.0..3.0)).collect())
            .collect();
        let model = em_fit(&points, 2, &EmConfig::default()).unwrap();
        let json = serde_json::to_string(&model).unwrap();
        let back: MixtureModel = serde_json::from_str(&json).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn too_few_points_is_an_error() {
        let points = vec![vec![0.0], vec![1.0]];
        assert!(matches!(
            em_fit(&points, 3, &EmConfig::default()),
            Err(ClusterError::TooFewPoints { needed: 3, got: 2 })
        ));
    }
}
