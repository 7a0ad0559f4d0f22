//! Regionalize gridded climate data and train one predictive model per region.
//!
//! The crate is organized around a four-stage workflow:
//!
//! 1. [`grid`] — ingest and validate the gridded annual-record CSV panel,
//!    compute long-term climatologies and regional annual means.
//! 2. [`cluster`] — partition grid cells into climate regions, either with a
//!    diagonal-covariance Gaussian mixture fitted by EM (component count
//!    selected by 10-fold cross-validated likelihood) or with a k-means
//!    baseline.
//! 3. [`regress`] — per-region predictive models: epsilon-SVR with an
//!    SMO-style dual solver, or ordinary least squares, both with k-fold
//!    cross-validation and grid search for hyperparameters.
//! 4. [`pipeline`] — the end-to-end orchestration: regionalize on training
//!    years, build per-region models, predict held-out years at every grid
//!    cell, and report RMSE / correlation per region.
//!
//! [`synth`] generates labeled synthetic datasets so every stage can be
//! verified against planted ground truth at desk scale.
//!
//! All fitted models are immutable once constructed and safe to share across
//! threads. Every randomized routine takes an explicit seed and derives
//! per-restart / per-fold seeds deterministically, so results are
//! bit-reproducible regardless of internal parallelism.

pub mod cluster;
pub mod cv;
pub mod grid;
pub mod pipeline;
pub mod regress;
pub mod scale;
pub mod seeding;
pub mod synth;

pub use cluster::{
    assign_hard, e_step, em_fit, kmeans_assign, kmeans_fit, log_likelihood, m_step, select_k_cv,
    ClusterError, EmConfig, GaussianComponent, KMeansConfig, KMeansModel, MixtureModel,
    RegionAssignment, SelectKConfig,
};
pub use cv::make_folds;
pub use grid::{
    ingest_csv, long_term_means, regional_annual_means, split_years, AnnualRecord, CellId,
    ClimateVariable, ClimatologyVector, Dataset, GridCell, GridError, VARIABLE_COUNT,
};
pub use pipeline::{
    compare_methods, evaluate, predict_cells, regionalize, run_method, ClusterModel, ComparisonRow,
    EvaluationReport, Method, MethodComparison, PipelineConfig, PipelineError, PredictionSet,
    RegionModel, RegionModels,
};
pub use regress::{
    cv_rmse, grid_search, ols_fit, ols_predict, svr_predict, svr_train, CvReport, KernelSpec,
    LinearModel, Predictor, RegressError, SvrModel, SvrParams,
};
pub use scale::{standardize, ScaleError, Scaler};
pub use synth::{
    adjusted_rand_index, generate, ComponentSpec, GeneratorSpec, LabeledDataset, SynthError,
    TargetRelation,
};
