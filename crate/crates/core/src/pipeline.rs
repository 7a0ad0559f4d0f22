//! End-to-end workflow: regionalize on training-year climatology, build one
//! predictive model per region, predict the held-out years at every grid
//! cell, and evaluate RMSE and correlation per region.
//!
//! Two method stacks are wired in: EM clustering with per-region epsilon-SVR
//! (`EM_SVR`), and k-means with per-region least squares (`KM_LR`).
//! Regionalization always uses the training years only, so no test-year
//! information leaks into the regions.
//!
//! Per-region training rows are the regional annual means: one row per
//! training year, features = the regional means of the six co-observed
//! variables that year (plus an optional year index), label = the regional
//! mean of the target. At prediction time the same layout is filled from
//! each individual cell's observed values, so the regional model applies at
//! every grid point.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{
    assign_hard, em_fit, kmeans_assign, kmeans_fit, select_k_cv, ClusterError, EmConfig,
    KMeansConfig, KMeansModel, MixtureModel, RegionAssignment, SelectKConfig,
};
use crate::grid::{
    long_term_means, regional_annual_means, split_years, CellId, ClimateVariable, Dataset,
    GridError, VARIABLE_COUNT,
};
use crate::regress::{
    grid_search, ols_fit, ols_predict, svr_predict, svr_train, CvReport, LinearModel, RegressError,
    SvrModel, SvrParams, DEFAULT_RIDGE_JITTER,
};
use crate::seeding::derive_seed;

const SEED_SELECT_K: u64 = 0x01;
const SEED_CLUSTER_FIT: u64 = 0x02;
const SEED_REGION_CV: u64 = 0x03;

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Regress(#[from] RegressError),
    #[error("regions have only {samples} training years; need at least {needed}")]
    RegionTooSmall { samples: usize, needed: usize },
    #[error("region {region} has no trained model")]
    MissingRegionModel { region: usize },
    #[error("no record for cell {cell} in test year {year}")]
    MissingTestRecord { cell: CellId, year: i32 },
    #[error("prediction set is empty")]
    EmptyPredictions,
    #[error("cell {cell} is not covered by the region assignment")]
    UnassignedCell { cell: CellId },
    #[error("configs disagree: {0}")]
    ConfigMismatch(String),
    #[error("regions file line {line}: {reason}")]
    MalformedRegionsFile { line: u64, reason: String },
    #[error("regions file names cell ({lat}, {lon}) which is not in the dataset")]
    UnknownCell { lat: f64, lon: f64 },
}

/// Which clustering/regressor stack to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    EmSvr,
    KmLr,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Method::EmSvr => f.write_str("EM_SVR"),
            Method::KmLr => f.write_str("KM_LR"),
        }
    }
}

/// Full configuration of one pipeline run. All randomness derives from
/// `seed`.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub method: Method,
    pub target: ClimateVariable,
    /// How many trailing years to hold out and predict.
    pub p: usize,
    /// Fixed region count; `None` selects it by cross-validation.
    pub k_override: Option<usize>,
    /// Append the calendar year to the feature vector.
    pub include_year_feature: bool,
    pub seed: u64,
    /// SVR hyperparameter grid; `None` uses the default grid for the
    /// feature dimension.
    pub svr_grid: Option<Vec<SvrParams>>,
    /// Folds for per-region hyperparameter CV.
    pub cv_folds: usize,
    pub em: EmConfig,
    pub kmeans: KMeansConfig,
    pub select_k: SelectKConfig,
    pub ridge_jitter: f64,
}

impl PipelineConfig {
    pub fn new(method: Method, target: ClimateVariable, p: usize, seed: u64) -> Self {
        PipelineConfig {
            method,
            target,
            p,
            k_override: None,
            include_year_feature: false,
            seed,
            svr_grid: None,
            cv_folds: 10,
            em: EmConfig::default(),
            kmeans: KMeansConfig::default(),
            select_k: SelectKConfig::default(),
            ridge_jitter: DEFAULT_RIDGE_JITTER,
        }
    }
}

/// Serialized form of the fitted clustering stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ClusterModel {
    Em(MixtureModel),
    KMeans(KMeansModel),
}

impl ClusterModel {
    pub fn region_count(&self) -> usize {
        match self {
            ClusterModel::Em(m) => m.k,
            ClusterModel::KMeans(m) => m.k(),
        }
    }

    /// Hard labels for raw points under the fitted model.
    pub fn assign(&self, points: &[Vec<f64>]) -> Vec<usize> {
        match self {
            ClusterModel::Em(m) => assign_hard(points, m),
            ClusterModel::KMeans(m) => kmeans_assign(points, m),
        }
    }
}

/// Which variables feed the regressors, in order, and whether the year
/// index is appended.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureLayout {
    pub variables: Vec<ClimateVariable>,
    pub include_year: bool,
}

impl FeatureLayout {
    pub fn for_target(target: ClimateVariable, include_year: bool) -> Self {
        FeatureLayout {
            variables: ClimateVariable::ALL
                .into_iter()
                .filter(|v| *v != target)
                .collect(),
            include_year,
        }
    }

    pub fn dim(&self) -> usize {
        self.variables.len() + usize::from(self.include_year)
    }

    pub fn features_from(&self, values: &[f64; VARIABLE_COUNT], year: i32) -> Vec<f64> {
        let mut x: Vec<f64> = self.variables.iter().map(|v| values[v.index()]).collect();
        if self.include_year {
            x.push(year as f64);
        }
        x
    }
}

/// A trained per-region regressor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum RegionModel {
    Svr(SvrModel),
    Ols(LinearModel),
}

impl RegionModel {
    pub fn predict(&self, x: &[f64]) -> Result<f64, RegressError> {
        match self {
            RegionModel::Svr(m) => svr_predict(m, x),
            RegionModel::Ols(m) => ols_predict(m, x),
        }
    }
}

/// Regionalization plus the per-region trained regressors.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionModels {
    pub assignment: RegionAssignment,
    pub per_region: BTreeMap<usize, RegionModel>,
    pub feature_layout: FeatureLayout,
    pub target: ClimateVariable,
    /// Hyperparameter-selection CV reports (EM_SVR path only).
    pub cv_reports: BTreeMap<usize, CvReport>,
}

/// The models file (`models.json`): everything except the assignment,
/// which travels separately as `regions.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedModels {
    pub target: ClimateVariable,
    pub feature_layout: FeatureLayout,
    pub models: BTreeMap<usize, RegionModel>,
}

impl RegionModels {
    pub fn to_saved(&self) -> SavedModels {
        SavedModels {
            target: self.target,
            feature_layout: self.feature_layout.clone(),
            models: self.per_region.clone(),
        }
    }

    pub fn from_saved(saved: SavedModels, assignment: RegionAssignment) -> Self {
        RegionModels {
            assignment,
            per_region: saved.models,
            feature_layout: saved.feature_layout,
            target: saved.target,
            cv_reports: BTreeMap::new(),
        }
    }
}

/// Predicted vs actual target values, one entry per (test cell, test year).
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionSet {
    pub target: ClimateVariable,
    pub entries: Vec<PredictionEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionEntry {
    pub cell: CellId,
    pub year: i32,
    pub predicted: f64,
    pub actual: f64,
}

/// Per-region and overall prediction errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub method: String,
    pub target: ClimateVariable,
    pub per_region_rmse: BTreeMap<usize, f64>,
    pub overall_rmse: f64,
    /// Pearson r between predictions and actuals; absent when either side
    /// has zero variance.
    pub per_region_correlation: BTreeMap<usize, Option<f64>>,
    pub per_cell_abs_error: BTreeMap<(CellId, i32), f64>,
    pub region_sizes: BTreeMap<usize, usize>,
}

/// Cluster the training-year climatology into regions.
///
/// Training years are the first `j - p`; the component count comes from
/// `k_override` or cross-validated selection.
pub fn regionalize(
    ds: &Dataset,
    cfg: &PipelineConfig,
) -> Result<(RegionAssignment, ClusterModel), PipelineError> {
    let (train_years, _) = split_years(ds, cfg.p)?;
    regionalize_on_years(ds, &train_years, cfg)
}

/// As [`regionalize`], but clustering the climatology of an explicit year
/// set.
pub fn regionalize_on_years(
    ds: &Dataset,
    years: &[i32],
    cfg: &PipelineConfig,
) -> Result<(RegionAssignment, ClusterModel), PipelineError> {
    let climatology = long_term_means(ds, years)?;
    let ids: Vec<CellId> = climatology.iter().map(|c| c.cell).collect();
    let points: Vec<Vec<f64>> = climatology.iter().map(|c| c.means.to_vec()).collect();

    let k = match cfg.k_override {
        Some(k) => k,
        None => {
            let select = SelectKConfig {
                seed: derive_seed(cfg.seed, &[SEED_SELECT_K]),
                em: cfg.em.clone(),
                ..cfg.select_k.clone()
            };
            select_k_cv(&points, &select)?
        }
    };

    let fit_seed = derive_seed(cfg.seed, &[SEED_CLUSTER_FIT]);
    let (labels, model) = match cfg.method {
        Method::EmSvr => {
            let em = EmConfig {
                seed: fit_seed,
                ..cfg.em.clone()
            };
            let model = em_fit(&points, k, &em)?;
            (assign_hard(&points, &model), ClusterModel::Em(model))
        }
        Method::KmLr => {
            let km = KMeansConfig {
                seed: fit_seed,
                ..cfg.kmeans.clone()
            };
            let model = kmeans_fit(&points, k, &km)?;
            (kmeans_assign(&points, &model), ClusterModel::KMeans(model))
        }
    };
    let assignment = RegionAssignment::from_labels(&ids, &labels, k)?;
    Ok((assignment, model))
}

/// Train one regressor per region on the training-year regional means.
pub fn build_region_models(
    ds: &Dataset,
    assignment: &RegionAssignment,
    cfg: &PipelineConfig,
) -> Result<RegionModels, PipelineError> {
    let (train_years, _) = split_years(ds, cfg.p)?;
    let needed = cfg.cv_folds.max(10);
    if train_years.len() < needed {
        return Err(PipelineError::RegionTooSmall {
            samples: train_years.len(),
            needed,
        });
    }

    let means = regional_annual_means(ds, assignment, &train_years)?;
    let layout = FeatureLayout::for_target(cfg.target, cfg.include_year_feature);
    let target_idx = cfg.target.index();

    type TrainedRegion = (usize, RegionModel, Option<CvReport>);
    let regions: Vec<usize> = (0..assignment.region_count()).collect();
    let trained: Vec<Result<TrainedRegion, PipelineError>> = regions
        .par_iter()
        .map(|&region| {
            let mut x = Vec::with_capacity(train_years.len());
            let mut y = Vec::with_capacity(train_years.len());
            for &year in &train_years {
                let row = &means[&(region, year)];
                x.push(layout.features_from(row, year));
                y.push(row[target_idx]);
            }
            match cfg.method {
                Method::EmSvr => {
                    let grid = match &cfg.svr_grid {
                        Some(g) => g.clone(),
                        None => SvrParams::default_grid(layout.dim()),
                    };
                    let seed = derive_seed(cfg.seed, &[SEED_REGION_CV, region as u64]);
                    let (best, report) = grid_search(&x, &y, &grid, cfg.cv_folds, seed)?;
                    let model = svr_train(&x, &y, &best)?;
                    Ok((region, RegionModel::Svr(model), Some(report)))
                }
                Method::KmLr => {
                    let model = ols_fit(&x, &y, cfg.ridge_jitter)?;
                    Ok((region, RegionModel::Ols(model), None))
                }
            }
        })
        .collect();

    let mut per_region = BTreeMap::new();
    let mut cv_reports = BTreeMap::new();
    for item in trained {
        let (region, model, report) = item?;
        per_region.insert(region, model);
        if let Some(r) = report {
            cv_reports.insert(region, r);
        }
    }
    Ok(RegionModels {
        assignment: assignment.clone(),
        per_region,
        feature_layout: layout,
        target: cfg.target,
        cv_reports,
    })
}

/// Predict the target at every cell for every test year, using each cell's
/// own observed co-variables as features.
pub fn predict_cells(
    ds: &Dataset,
    models: &RegionModels,
    test_years: &[i32],
) -> Result<PredictionSet, PipelineError> {
    let target_idx = models.target.index();
    let mut entries = Vec::with_capacity(ds.n_cells() * test_years.len());
    for cell in ds.cells() {
        let region = models
            .assignment
            .region_of(cell.id)
            .ok_or(PipelineError::UnassignedCell { cell: cell.id })?;
        let model = models
            .per_region
            .get(&region)
            .ok_or(PipelineError::MissingRegionModel { region })?;
        for &year in test_years {
            let values = ds
                .values(cell.id, year)
                .ok_or(PipelineError::MissingTestRecord {
                    cell: cell.id,
                    year,
                })?;
            let x = models.feature_layout.features_from(values, year);
            entries.push(PredictionEntry {
                cell: cell.id,
                year,
                predicted: model.predict(&x)?,
                actual: values[target_idx],
            });
        }
    }
    Ok(PredictionSet {
        target: models.target,
        entries,
    })
}

fn pearson(pairs: &[(f64, f64)]) -> Option<f64> {
    let n = pairs.len() as f64;
    let mean_x = pairs.iter().map(|(x, _)| x).sum::<f64>() / n;
    let mean_y = pairs.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for &(x, y) in pairs {
        cov += (x - mean_x) * (y - mean_y);
        var_x += (x - mean_x) * (x - mean_x);
        var_y += (y - mean_y) * (y - mean_y);
    }
    if var_x == 0.0 || var_y == 0.0 {
        return None;
    }
    Some((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0))
}

/// Per-region RMSE, Pearson correlation, and per-cell absolute errors.
pub fn evaluate(
    preds: &PredictionSet,
    assignment: &RegionAssignment,
    method: impl Into<String>,
) -> Result<EvaluationReport, PipelineError> {
    if preds.entries.is_empty() {
        return Err(PipelineError::EmptyPredictions);
    }
    let mut pools: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    let mut per_cell_abs_error = BTreeMap::new();
    for e in &preds.entries {
        let region = assignment
            .region_of(e.cell)
            .ok_or(PipelineError::UnassignedCell { cell: e.cell })?;
        pools
            .entry(region)
            .or_default()
            .push((e.predicted, e.actual));
        per_cell_abs_error.insert((e.cell, e.year), (e.predicted - e.actual).abs());
    }

    let mut per_region_rmse = BTreeMap::new();
    let mut per_region_correlation = BTreeMap::new();
    let mut overall_sq = 0.0;
    for (&region, pairs) in &pools {
        let sq: f64 = pairs.iter().map(|(p, a)| (p - a) * (p - a)).sum();
        overall_sq += sq;
        per_region_rmse.insert(region, (sq / pairs.len() as f64).sqrt());
        per_region_correlation.insert(region, pearson(pairs));
    }
    Ok(EvaluationReport {
        method: method.into(),
        target: preds.target,
        per_region_rmse,
        overall_rmse: (overall_sq / preds.entries.len() as f64).sqrt(),
        per_region_correlation,
        per_cell_abs_error,
        region_sizes: pools.iter().map(|(&r, p)| (r, p.len())).collect(),
    })
}

/// One full pipeline run and everything it produced.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub cluster_model: ClusterModel,
    pub models: RegionModels,
    pub predictions: PredictionSet,
    pub report: EvaluationReport,
}

/// Regionalize, train, predict, evaluate.
pub fn run_method(ds: &Dataset, cfg: &PipelineConfig) -> Result<MethodRun, PipelineError> {
    let (assignment, cluster_model) = regionalize(ds, cfg)?;
    let models = build_region_models(ds, &assignment, cfg)?;
    let (_, test_years) = split_years(ds, cfg.p)?;
    let predictions = predict_cells(ds, &models, &test_years)?;
    let report = evaluate(&predictions, &assignment, cfg.method.to_string())?;
    Ok(MethodRun {
        cluster_model,
        models,
        predictions,
        report,
    })
}

/// One row of the method-comparison table. The first config's result lands
/// in `em_svm_rmse`, the second's in `km_lr_rmse` (the canonical pairing).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub region_label: String,
    pub em_svm_rmse: f64,
    pub km_lr_rmse: f64,
    /// Shared-cell fraction of the first-method region matched to the
    /// second-method region.
    pub overlap_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct MethodComparison {
    pub rows: Vec<ComparisonRow>,
    pub first: MethodRun,
    pub second: MethodRun,
}

/// Run two configured pipelines on the same data and tabulate per-region
/// RMSE side by side. Regions are matched across methods by maximum shared
/// cell count; the final row ("overall") compares overall RMSE.
pub fn compare_methods(
    ds: &Dataset,
    cfg_first: &PipelineConfig,
    cfg_second: &PipelineConfig,
) -> Result<MethodComparison, PipelineError> {
    if cfg_first.target != cfg_second.target {
        return Err(PipelineError::ConfigMismatch("targets differ".into()));
    }
    if cfg_first.p != cfg_second.p {
        return Err(PipelineError::ConfigMismatch("horizons differ".into()));
    }
    if cfg_first.seed != cfg_second.seed {
        return Err(PipelineError::ConfigMismatch("seeds differ".into()));
    }
    let first = run_method(ds, cfg_first)?;
    let second = run_method(ds, cfg_second)?;

    let mut rows = Vec::new();
    let mut matched_cells = 0usize;
    for region in 0..first.models.assignment.region_count() {
        let members = first.models.assignment.cells_in_region(region);
        if members.is_empty() {
            continue;
        }
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for cell in &members {
            if let Some(r) = second.models.assignment.region_of(*cell) {
                *counts.entry(r).or_default() += 1;
            }
        }
        let (&best_region, &shared) = counts
            .iter()
            .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
            .expect("nonempty region has overlap counts");
        matched_cells += shared;
        rows.push(ComparisonRow {
            region_label: format!("r{region}:r{best_region}"),
            em_svm_rmse: first.report.per_region_rmse[&region],
            km_lr_rmse: second.report.per_region_rmse[&best_region],
            overlap_fraction: shared as f64 / members.len() as f64,
        });
    }
    rows.push(ComparisonRow {
        region_label: "overall".into(),
        em_svm_rmse: first.report.overall_rmse,
        km_lr_rmse: second.report.overall_rmse,
        overlap_fraction: matched_cells as f64 / ds.n_cells() as f64,
    });
    Ok(MethodComparison {
        rows,
        first,
        second,
    })
}

/// `lat,lon,region_id`, one row per cell in (lat, lon) order.
pub fn write_regions_csv<W: Write>(
    ds: &Dataset,
    assignment: &RegionAssignment,
    mut w: W,
) -> Result<(), PipelineError> {
    writeln!(w, "lat,lon,region_id").map_err(GridError::from)?;
    for cell in ds.cells() {
        let region = assignment
            .region_of(cell.id)
            .ok_or(PipelineError::UnassignedCell { cell: cell.id })?;
        writeln!(w, "{},{},{region}", cell.lat, cell.lon).map_err(GridError::from)?;
    }
    Ok(())
}

/// Parse a `lat,lon,region_id` file against an ingested dataset.
pub fn read_regions_csv<R: Read>(
    ds: &Dataset,
    reader: R,
) -> Result<RegionAssignment, PipelineError> {
    let reader = BufReader::new(reader);
    let mut cells = Vec::new();
    let mut labels = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i as u64 + 1;
        let text = line.map_err(GridError::from)?;
        let text = text.trim_end_matches('\r');
        if line_no == 1 {
            if text != "lat,lon,region_id" {
                return Err(PipelineError::MalformedRegionsFile {
                    line: 1,
                    reason: "header must be `lat,lon,region_id`".into(),
                });
            }
            continue;
        }
        if text.is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split(',').collect();
        let malformed = |reason: String| PipelineError::MalformedRegionsFile {
            line: line_no,
            reason,
        };
        if fields.len() != 3 {
            return Err(malformed(format!(
                "expected 3 columns, found {}",
                fields.len()
            )));
        }
        let lat: f64 = fields[0]
            .parse()
            .map_err(|_| malformed(format!("bad lat `{}`", fields[0])))?;
        let lon: f64 = fields[1]
            .parse()
            .map_err(|_| malformed(format!("bad lon `{}`", fields[1])))?;
        let region: usize = fields[2]
            .parse()
            .map_err(|_| malformed(format!("bad region_id `{}`", fields[2])))?;
        let cell = ds
            .find_cell(lat, lon)
            .ok_or(PipelineError::UnknownCell { lat, lon })?;
        cells.push(cell);
        labels.push(region);
    }
    let region_count = labels.iter().max().map_or(0, |m| m + 1);
    Ok(RegionAssignment::from_labels(
        &cells,
        &labels,
        region_count,
    )?)
}

/// `region_id,region_size,rmse,correlation`; the correlation column is
/// empty where it is undefined.
pub fn write_report_csv<W: Write>(
    report: &EvaluationReport,
    mut w: W,
) -> Result<(), PipelineError> {
    writeln!(w, "region_id,region_size,rmse,correlation").map_err(GridError::from)?;
    for (&region, rmse) in &report.per_region_rmse {
        let corr = report.per_region_correlation[&region]
            .map(|c| c.to_string())
            .unwrap_or_default();
        writeln!(w, "{region},{},{rmse},{corr}", report.region_sizes[&region])
            .map_err(GridError::from)?;
    }
    Ok(())
}

/// `lat,lon,year,predicted,actual,abs_error`, one row per prediction.
pub fn write_predictions_csv<W: Write>(
    ds: &Dataset,
    preds: &PredictionSet,
    mut w: W,
) -> Result<(), PipelineError> {
    writeln!(w, "lat,lon,year,predicted,actual,abs_error").map_err(GridError::from)?;
    for e in &preds.entries {
        let cell = ds.cell(e.cell).expect("prediction cell exists");
        writeln!(
            w,
            "{},{},{},{},{},{}",
            cell.lat,
            cell.lon,
            e.year,
            e.predicted,
            e.actual,
            (e.predicted - e.actual).abs()
        )
        .map_err(GridError::from)?;
    }
    Ok(())
}

/// `region_label,em_svm_rmse,km_lr_rmse,overlap_fraction`.
pub fn write_comparison_csv<W: Write>(
    comparison: &MethodComparison,
    mut w: W,
) -> Result<(), PipelineError> {
    writeln!(w, "region_label,em_svm_rmse,km_lr_rmse,overlap_fraction").map_err(GridError::from)?;
    for row in &comparison.rows {
        writeln!(
            w,
            "{},{},{},{}",
            row.region_label, row.em_svm_rmse, row.km_lr_rmse, row.overlap_fraction
        )
        .map_err(GridError::from)?;
    }
    Ok(())
}
