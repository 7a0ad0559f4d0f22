//! Subcommand implementations.
//!
//! Error discipline: failures while reading or parsing inputs exit 2;
//! failures inside the computation (clustering, training, prediction)
//! exit 3. Every command writes a run manifest.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde_json::json;

use zonecast_core::cluster::RegionAssignment;
use zonecast_core::grid::{
    ingest_csv, long_term_means, split_years, write_climatology_csv, write_dataset_csv,
    ClimateVariable, Dataset,
};
use zonecast_core::pipeline::{
    build_region_models, compare_methods, evaluate, predict_cells, read_regions_csv,
    regionalize_on_years, write_comparison_csv, write_predictions_csv, write_regions_csv,
    write_report_csv, Method, PipelineConfig, RegionModel, RegionModels, SavedModels,
};
use zonecast_core::synth::{generate, write_labels_csv, GeneratorSpec};

use crate::manifest::{sibling_manifest, ManifestBuilder};
use crate::{
    CliError, ClusterArgs, CompareArgs, KChoice, PredictEvaluateArgs, RenderMapArgs, SynthArgs,
    TrainArgs, ValidateArgs,
};

fn read_input(manifest: &mut ManifestBuilder, path: &Path) -> Result<Vec<u8>, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    manifest.record_input(path, &bytes);
    Ok(bytes)
}

fn ingest(
    manifest: &mut ManifestBuilder,
    path: &Path,
    resolution: f64,
) -> Result<Dataset, CliError> {
    let bytes = read_input(manifest, path)?;
    ingest_csv(bytes.as_slice(), resolution)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn validate(args: &ValidateArgs) -> Result<(), CliError> {
    let config = json!({
        "input": args.input.display().to_string(),
        "resolution": args.resolution,
        "climatology": args.climatology.as_ref().map(|p| p.display().to_string()),
    });
    let mut manifest = ManifestBuilder::new("validate", config, None);
    let started = Instant::now();
    let ds = ingest(&mut manifest, &args.input, args.resolution)?;
    manifest.record_stage("ingest", started);

    let (first, last) = ds.year_range();
    println!("{} cells, years {first}-{last}", ds.n_cells());
    println!("{} records ({} per cell)", ds.n_records(), ds.n_years());
    for var in ClimateVariable::ALL {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for rec in ds.records() {
            let v = rec.values[var.index()];
            min = min.min(v);
            max = max.max(v);
        }
        println!("  {} [{}]: min {min}, max {max}", var.name(), var.unit());
    }

    if let Some(path) = &args.climatology {
        let years: Vec<i32> = ds.years().collect();
        let climatology = long_term_means(&ds, &years).map_err(CliError::compute)?;
        let mut buf = Vec::new();
        write_climatology_csv(&ds, &climatology, &mut buf).map_err(CliError::compute)?;
        manifest.write_output(path, &buf)?;
        println!("wrote {}", path.display());
    }
    manifest.finish(&args.manifest)
}

pub fn synth(args: &SynthArgs) -> Result<(), CliError> {
    let config = json!({
        "spec": args.spec.as_ref().map(|p| p.display().to_string()),
        "default_table1": args.default_table1,
        "out": args.out.display().to_string(),
        "labels": args.labels.display().to_string(),
        "seed": args.seed,
    });
    let mut manifest = ManifestBuilder::new("synth", config, Some(args.seed));

    let spec = match &args.spec {
        Some(path) => {
            let bytes = read_input(&mut manifest, path)?;
            let mut spec: GeneratorSpec = serde_json::from_slice(&bytes)
                .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
            spec.seed = args.seed;
            spec
        }
        None if args.default_table1 => GeneratorSpec::seven_region_reference(args.seed),
        None => {
            return Err(CliError::input(
                "one of --spec or --default-table1 is required",
            ))
        }
    };

    let started = Instant::now();
    let labeled = generate(&spec).map_err(CliError::input)?;
    manifest.record_stage("generate", started);

    let mut data = Vec::new();
    write_dataset_csv(&labeled.dataset, &mut data).map_err(CliError::compute)?;
    manifest.write_output(&args.out, &data)?;

    let mut labels = Vec::new();
    write_labels_csv(&labeled, &mut labels).map_err(CliError::compute)?;
    manifest.write_output(&args.labels, &labels)?;

    println!(
        "generated {} cells x {} years -> {}, labels -> {}",
        labeled.dataset.n_cells(),
        labeled.dataset.n_years(),
        args.out.display(),
        args.labels.display()
    );
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| sibling_manifest(&args.out, "synth"));
    manifest.finish(&manifest_path)
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::input(format!("cannot create {}: {e}", dir.display())))
}

pub fn cluster(args: &ClusterArgs) -> Result<(), CliError> {
    let config = json!({
        "input": args.input.display().to_string(),
        "method": args.method,
        "k": match args.k { KChoice::Auto => "auto".to_string(), KChoice::Fixed(k) => k.to_string() },
        "seed": args.seed,
        "train_years": args.train_years,
        "resolution": args.resolution,
        "out_dir": args.out_dir.display().to_string(),
    });
    let mut manifest = ManifestBuilder::new("cluster", config, Some(args.seed));
    ensure_out_dir(&args.out_dir)?;

    let started = Instant::now();
    let ds = ingest(&mut manifest, &args.input, args.resolution)?;
    manifest.record_stage("ingest", started);

    let years: Vec<i32> = match args.train_years {
        Some(n) => {
            if n < 1 || n > ds.n_years() {
                return Err(CliError::input(format!(
                    "--train-years {n} outside 1..={}",
                    ds.n_years()
                )));
            }
            ds.years().take(n).collect()
        }
        None => ds.years().collect(),
    };

    let method = if args.method == "em" {
        Method::EmSvr
    } else {
        Method::KmLr
    };
    // Target/p are irrelevant to the clustering stage; placeholders only.
    let mut cfg = PipelineConfig::new(method, ClimateVariable::AirTemperature, 1, args.seed);
    if let KChoice::Fixed(k) = args.k {
        cfg.k_override = Some(k);
    }

    let started = Instant::now();
    let (assignment, model) = regionalize_on_years(&ds, &years, &cfg).map_err(CliError::compute)?;
    manifest.record_stage("cluster", started);

    let model_json = serde_json::to_string_pretty(&model)
        .map_err(|e| CliError::compute(format!("model serialization: {e}")))?;
    manifest.write_output(&args.out_dir.join("model.json"), model_json.as_bytes())?;

    let mut regions = Vec::new();
    write_regions_csv(&ds, &assignment, &mut regions).map_err(CliError::compute)?;
    manifest.write_output(&args.out_dir.join("regions.csv"), &regions)?;

    println!(
        "clustered {} cells into {} regions ({}), outputs in {}",
        ds.n_cells(),
        assignment.region_count(),
        args.method,
        args.out_dir.display()
    );
    manifest.finish(&args.out_dir.join("cluster.manifest.json"))
}

fn load_regions(
    manifest: &mut ManifestBuilder,
    ds: &Dataset,
    path: &Path,
) -> Result<RegionAssignment, CliError> {
    let bytes = read_input(manifest, path)?;
    read_regions_csv(ds, bytes.as_slice())
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

/// `region_id,model,c,epsilon,gamma,cv_mean_rmse,cv_std_rmse`.
fn cv_report_csv(models: &RegionModels) -> String {
    let mut out = String::from("region_id,model,c,epsilon,gamma,cv_mean_rmse,cv_std_rmse\n");
    for (region, model) in &models.per_region {
        match model {
            RegionModel::Svr(svr) => {
                let gamma = match svr.kernel.gamma() {
                    Some(g) => g.to_string(),
                    None => String::new(),
                };
                let (mean, std) = models
                    .cv_reports
                    .get(region)
                    .map(|r| (r.mean_rmse.to_string(), r.std_rmse.to_string()))
                    .unwrap_or_default();
                out.push_str(&format!(
                    "{region},svr,{},{},{gamma},{mean},{std}\n",
                    svr.c, svr.epsilon
                ));
            }
            RegionModel::Ols(_) => {
                out.push_str(&format!("{region},ols,,,,,\n"));
            }
        }
    }
    out
}

pub fn train(args: &TrainArgs) -> Result<(), CliError> {
    let config = json!({
        "input": args.input.display().to_string(),
        "regions": args.regions.display().to_string(),
        "target": args.target.name(),
        "p": args.p,
        "model": args.model,
        "seed": args.seed,
        "with_year_feature": args.with_year_feature,
        "resolution": args.resolution,
        "out_dir": args.out_dir.display().to_string(),
    });
    let mut manifest = ManifestBuilder::new("train", config, Some(args.seed));
    ensure_out_dir(&args.out_dir)?;

    let started = Instant::now();
    let ds = ingest(&mut manifest, &args.input, args.resolution)?;
    let assignment = load_regions(&mut manifest, &ds, &args.regions)?;
    manifest.record_stage("ingest", started);

    let method = if args.model == "svr" {
        Method::EmSvr
    } else {
        Method::KmLr
    };
    let mut cfg = PipelineConfig::new(method, args.target, args.p, args.seed);
    cfg.include_year_feature = args.with_year_feature;

    let started = Instant::now();
    let models = build_region_models(&ds, &assignment, &cfg).map_err(CliError::compute)?;
    manifest.record_stage("train", started);

    let saved = serde_json::to_string_pretty(&models.to_saved())
        .map_err(|e| CliError::compute(format!("model serialization: {e}")))?;
    manifest.write_output(&args.out_dir.join("models.json"), saved.as_bytes())?;
    manifest.write_output(
        &args.out_dir.join("cv_report.csv"),
        cv_report_csv(&models).as_bytes(),
    )?;

    println!(
        "trained {} {} models on {} years, outputs in {}",
        models.per_region.len(),
        args.model,
        ds.n_years() - args.p,
        args.out_dir.display()
    );
    manifest.finish(&args.out_dir.join("train.manifest.json"))
}

pub fn predict_evaluate(args: &PredictEvaluateArgs) -> Result<(), CliError> {
    let config = json!({
        "input": args.input.display().to_string(),
        "regions": args.regions.display().to_string(),
        "models": args.models.display().to_string(),
        "p": args.p,
        "resolution": args.resolution,
        "out_dir": args.out_dir.display().to_string(),
    });
    let mut manifest = ManifestBuilder::new("predict-evaluate", config, None);
    ensure_out_dir(&args.out_dir)?;

    let started = Instant::now();
    let ds = ingest(&mut manifest, &args.input, args.resolution)?;
    let assignment = load_regions(&mut manifest, &ds, &args.regions)?;
    let model_bytes = read_input(&mut manifest, &args.models)?;
    let saved: SavedModels = serde_json::from_slice(&model_bytes)
        .map_err(|e| CliError::input(format!("{}: {e}", args.models.display())))?;
    manifest.record_stage("ingest", started);

    let models = RegionModels::from_saved(saved, assignment.clone());
    let label = {
        let mut kinds = models.per_region.values().map(|m| match m {
            RegionModel::Svr(_) => "svr",
            RegionModel::Ols(_) => "ols",
        });
        let first = kinds.next().unwrap_or("none");
        if kinds.all(|k| k == first) {
            first
        } else {
            "mixed"
        }
    };

    let started = Instant::now();
    let (_, test_years) = split_years(&ds, args.p).map_err(CliError::compute)?;
    let predictions = predict_cells(&ds, &models, &test_years).map_err(CliError::compute)?;
    let report = evaluate(&predictions, &assignment, label).map_err(CliError::compute)?;
    manifest.record_stage("predict", started);

    let mut preds_csv = Vec::new();
    write_predictions_csv(&ds, &predictions, &mut preds_csv).map_err(CliError::compute)?;
    manifest.write_output(&args.out_dir.join("predictions.csv"), &preds_csv)?;

    let mut report_csv = Vec::new();
    write_report_csv(&report, &mut report_csv).map_err(CliError::compute)?;
    manifest.write_output(&args.out_dir.join("report.csv"), &report_csv)?;

    println!(
        "predicted {} entries, overall RMSE {}, outputs in {}",
        predictions.entries.len(),
        report.overall_rmse,
        args.out_dir.display()
    );
    manifest.finish(&args.out_dir.join("predict-evaluate.manifest.json"))
}

pub fn compare(args: &CompareArgs) -> Result<(), CliError> {
    let config = json!({
        "input": args.input.display().to_string(),
        "target": args.target.name(),
        "p": args.p,
        "seed": args.seed,
        "k": match args.k { KChoice::Auto => "auto".to_string(), KChoice::Fixed(k) => k.to_string() },
        "with_year_feature": args.with_year_feature,
        "resolution": args.resolution,
        "out": args.out.display().to_string(),
    });
    let mut manifest = ManifestBuilder::new("compare", config, Some(args.seed));

    let started = Instant::now();
    let ds = ingest(&mut manifest, &args.input, args.resolution)?;
    manifest.record_stage("ingest", started);

    let mut cfg_em = PipelineConfig::new(Method::EmSvr, args.target, args.p, args.seed);
    cfg_em.include_year_feature = args.with_year_feature;
    if let KChoice::Fixed(k) = args.k {
        cfg_em.k_override = Some(k);
    }
    let mut cfg_km = cfg_em.clone();
    cfg_km.method = Method::KmLr;

    let started = Instant::now();
    let comparison = compare_methods(&ds, &cfg_em, &cfg_km).map_err(CliError::compute)?;
    manifest.record_stage("compare", started);

    let mut buf = Vec::new();
    write_comparison_csv(&comparison, &mut buf).map_err(CliError::compute)?;
    manifest.write_output(&args.out, &buf)?;

    for row in &comparison.rows {
        println!(
            "{}: EM+SVM {} vs KM+LR {} (overlap {})",
            row.region_label, row.em_svm_rmse, row.km_lr_rmse, row.overlap_fraction
        );
    }
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| sibling_manifest(&args.out, "compare"));
    manifest.finish(&manifest_path)
}

pub fn render_map(args: &RenderMapArgs) -> Result<(), CliError> {
    let config = json!({
        "values": args.values.display().to_string(),
        "field": args.field,
        "out": args.out.display().to_string(),
    });
    let mut manifest = ManifestBuilder::new("render-map", config, None);

    let bytes = read_input(&mut manifest, &args.values)?;
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    let headers = reader
        .headers()
        .map_err(|e| CliError::input(format!("{}: {e}", args.values.display())))?
        .clone();
    let column = |name: &str| -> Result<usize, CliError> {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            CliError::input(format!(
                "missing field `{name}` in {}",
                args.values.display()
            ))
        })
    };
    let lat_col = column("lat")?;
    let lon_col = column("lon")?;
    let field_col = column(&args.field)?;

    let mut cells = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| CliError::input(format!("{}: {e}", args.values.display())))?;
        let parse = |idx: usize, what: &str| -> Result<f64, CliError> {
            record
                .get(idx)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::input(format!("row {}: cannot parse {what}", i + 2)))
        };
        cells.push((
            parse(lat_col, "lat")?,
            parse(lon_col, "lon")?,
            parse(field_col, &args.field)?,
        ));
    }
    if cells.is_empty() {
        return Err(CliError::input("values file has no rows"));
    }

    let started = Instant::now();
    let svg = crate::svg::render(&cells, &args.field, args.field == "region_id");
    manifest.record_stage("render", started);
    manifest.write_output(&args.out, svg.as_bytes())?;

    println!("rendered {} cells -> {}", cells.len(), args.out.display());
    let manifest_path = args
        .manifest
        .clone()
        .unwrap_or_else(|| sibling_manifest(&args.out, "render-map"));
    manifest.finish(&manifest_path)
}
