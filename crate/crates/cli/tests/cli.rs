//! End-to-end behavior of the `zonecast` binary: exit codes, file schemas,
//! determinism, and the staged-vs-one-shot equivalence.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use zonecast_core::grid::{ClimateVariable, CSV_HEADER, VARIABLE_COUNT};
use zonecast_core::synth::{ComponentSpec, GeneratorSpec, GridLayout, TargetRelation};

fn zonecast(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zonecast"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn assert_exit(out: &Output, code: i32) -> String {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Small three-region dataset with a planted linear target.
fn small_spec(seed: u64) -> GeneratorSpec {
    let mut components = Vec::new();
    for j in 0..3 {
        let mut mean = [15.0, 25.0, 3.0, 50.0, 1005.0, 1.0, 0.5];
        for m in &mut mean {
            *m += 30.0 * j as f64;
        }
        components.push(ComponentSpec {
            mean,
            std: [0.5; VARIABLE_COUNT],
            cells: 8,
        });
    }
    GeneratorSpec {
        components,
        years: (1980, 2012),
        target_relation: TargetRelation::Linear {
            target: ClimateVariable::AirTemperature,
            intercept: 1.0,
            coefficients: vec![
                (ClimateVariable::Precipitation, 2.0),
                (ClimateVariable::RelativeHumidity, 0.5),
            ],
        },
        noise_sigma: 0.05,
        year_noise: [1.0; VARIABLE_COUNT],
        seed,
        grid: GridLayout::default(),
    }
}

fn write_spec(dir: &Path, spec: &GeneratorSpec) {
    fs::write(dir.join("spec.json"), serde_json::to_string(spec).unwrap()).unwrap();
}

#[test]
fn synth_default_is_deterministic_and_validates() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    for out in ["a.csv", "b.csv"] {
        let labels = format!("{out}.labels.csv");
        assert_ok(&zonecast(
            dir,
            &[
                "synth",
                "--default-table1",
                "--seed",
                "7",
                "--out",
                out,
                "--labels",
                &labels,
            ],
        ));
    }
    assert_eq!(
        fs::read(dir.join("a.csv")).unwrap(),
        fs::read(dir.join("b.csv")).unwrap()
    );
    assert_eq!(
        fs::read(dir.join("a.csv.labels.csv")).unwrap(),
        fs::read(dir.join("b.csv.labels.csv")).unwrap()
    );

    // One labels row per cell, plus the header.
    let labels = fs::read_to_string(dir.join("a.csv.labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 170);
    assert_eq!(labels.lines().next(), Some("lat,lon,true_region"));

    let stdout = assert_ok(&zonecast(dir, &["validate", "a.csv"]));
    assert!(
        stdout.contains("169 cells, years 1948-2012"),
        "stdout: {stdout}"
    );
}

#[test]
fn validate_rejects_empty_and_ragged_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("empty.csv"), "").unwrap();
    assert_exit(&zonecast(dir, &["validate", "empty.csv"]), 2);

    let ragged = format!(
        "{CSV_HEADER}\n17.5,77.5,2010,1,1,1,1,1,1,1\n17.5,77.5,2011,1,1,1,1,1,1,1\n20,77.5,2010,1,1,1,1,1,1,1\n"
    );
    fs::write(dir.join("ragged.csv"), ragged).unwrap();
    let stderr = assert_exit(&zonecast(dir, &["validate", "ragged.csv"]), 2);
    assert!(
        stderr.contains("(20, 77.5)") && stderr.contains("2011"),
        "diagnostic must name the cell and year: {stderr}"
    );
}

#[test]
fn missing_input_file_is_an_input_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert_exit(&zonecast(tmp.path(), &["validate", "nope.csv"]), 2);
}

#[test]
fn cluster_with_k_one_puts_everything_in_region_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_spec(dir, &small_spec(3));
    assert_ok(&zonecast(
        dir,
        &[
            "synth",
            "--spec",
            "spec.json",
            "--seed",
            "3",
            "--out",
            "data.csv",
            "--labels",
            "l.csv",
        ],
    ));
    assert_ok(&zonecast(
        dir,
        &[
            "cluster",
            "data.csv",
            "--method",
            "kmeans",
            "--k",
            "1",
            "--seed",
            "1",
            "--out-dir",
            "cl",
        ],
    ));
    let regions = fs::read_to_string(dir.join("cl/regions.csv")).unwrap();
    let mut rows = regions.lines().skip(1);
    assert!(rows.all(|r| r.ends_with(",0")));
    assert_eq!(regions.lines().count(), 25);
}

#[test]
fn cluster_reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_spec(dir, &small_spec(5));
    assert_ok(&zonecast(
        dir,
        &[
            "synth",
            "--spec",
            "spec.json",
            "--seed",
            "5",
            "--out",
            "data.csv",
            "--labels",
            "l.csv",
        ],
    ));
    for out_dir in ["c1", "c2"] {
        assert_ok(&zonecast(
            dir,
            &[
                "cluster",
                "data.csv",
                "--method",
                "em",
                "--k",
                "auto",
                "--seed",
                "11",
                "--out-dir",
                out_dir,
            ],
        ));
    }
    assert_eq!(
        fs::read(dir.join("c1/model.json")).unwrap(),
        fs::read(dir.join("c2/model.json")).unwrap()
    );
    assert_eq!(
        fs::read(dir.join("c1/regions.csv")).unwrap(),
        fs::read(dir.join("c2/regions.csv")).unwrap()
    );
}

#[test]
fn train_with_oversized_horizon_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_spec(dir, &small_spec(7));
    assert_ok(&zonecast(
        dir,
        &[
            "synth",
            "--spec",
            "spec.json",
            "--seed",
            "7",
            "--out",
            "data.csv",
            "--labels",
            "l.csv",
        ],
    ));
    assert_ok(&zonecast(
        dir,
        &[
            "cluster",
            "data.csv",
            "--method",
            "kmeans",
            "--k",
            "3",
            "--seed",
            "1",
            "--out-dir",
            "cl",
        ],
    ));
    // 33 years of data: p = 32 leaves one training year.
    let stderr = assert_exit(
        &zonecast(
            dir,
            &[
                "train",
                "data.csv",
                "cl/regions.csv",
                "--target",
                "air_temperature",
                "--p",
                "32",
                "--model",
                "ols",
                "--seed",
                "1",
                "--out-dir",
                "tr",
            ],
        ),
        3,
    );
    assert!(stderr.contains("horizon"), "stderr: {stderr}");
}

#[test]
fn staged_pipeline_matches_one_shot_compare() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_spec(dir, &small_spec(9));
    assert_ok(&zonecast(
        dir,
        &[
            "synth",
            "--spec",
            "spec.json",
            "--seed",
            "9",
            "--out",
            "data.csv",
            "--labels",
            "l.csv",
        ],
    ));

    // 33 years, p = 2: regionalization must see only the first 31.
    let p = "2";
    let seed = "17";
    for (method, model, cl, tr, pr) in [
        ("em", "svr", "cl_em", "tr_em", "pr_em"),
        ("kmeans", "ols", "cl_km", "tr_km", "pr_km"),
    ] {
        assert_ok(&zonecast(
            dir,
            &[
                "cluster",
                "data.csv",
                "--method",
                method,
                "--k",
                "3",
                "--seed",
                seed,
                "--train-years",
                "31",
                "--out-dir",
                cl,
            ],
        ));
        let regions = format!("{cl}/regions.csv");
        assert_ok(&zonecast(
            dir,
            &[
                "train",
                "data.csv",
                &regions,
                "--target",
                "air_temperature",
                "--p",
                p,
                "--model",
                model,
                "--seed",
                seed,
                "--out-dir",
                tr,
            ],
        ));
        let models = format!("{tr}/models.json");
        assert_ok(&zonecast(
            dir,
            &[
                "predict-evaluate",
                "data.csv",
                &regions,
                &models,
                "--p",
                p,
                "--out-dir",
                pr,
            ],
        ));
    }
    assert_ok(&zonecast(
        dir,
        &[
            "compare",
            "data.csv",
            "--target",
            "air_temperature",
            "--p",
            p,
            "--seed",
            seed,
            "--k",
            "3",
            "--out",
            "comparison.csv",
        ],
    ));

    let parse_report = |path: &str| -> Vec<(usize, f64)> {
        fs::read_to_string(dir.join(path))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let f: Vec<&str> = l.split(',').collect();
                (f[0].parse().unwrap(), f[2].parse().unwrap())
            })
            .collect()
    };
    let em_report = parse_report("pr_em/report.csv");
    let km_report = parse_report("pr_km/report.csv");

    let comparison = fs::read_to_string(dir.join("comparison.csv")).unwrap();
    let mut matched = 0;
    for line in comparison.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        if f[0] == "overall" {
            continue;
        }
        let (left, right) = f[0].split_once(':').unwrap();
        let em_region: usize = left[1..].parse().unwrap();
        let km_region: usize = right[1..].parse().unwrap();
        let em_rmse: f64 = f[1].parse().unwrap();
        let km_rmse: f64 = f[2].parse().unwrap();
        let staged_em = em_report.iter().find(|(r, _)| *r == em_region).unwrap().1;
        let staged_km = km_report.iter().find(|(r, _)| *r == km_region).unwrap().1;
        assert!(
            (em_rmse - staged_em).abs() <= 1e-12 * staged_em.abs().max(1.0),
            "EM region {em_region}: staged {staged_em} vs compare {em_rmse}"
        );
        assert!(
            (km_rmse - staged_km).abs() <= 1e-12 * staged_km.abs().max(1.0),
            "KM region {km_region}: staged {staged_km} vs compare {km_rmse}"
        );
        matched += 1;
    }
    assert_eq!(matched, 3, "expected 3 matched region rows");
}

#[test]
fn auto_k_recovers_seven_regions_from_reference_data() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_ok(&zonecast(
        dir,
        &[
            "synth",
            "--default-table1",
            "--seed",
            "7",
            "--out",
            "data.csv",
            "--labels",
            "l.csv",
        ],
    ));
    assert_ok(&zonecast(
        dir,
        &[
            "cluster",
            "data.csv",
            "--method",
            "em",
            "--k",
            "auto",
            "--seed",
            "7",
            "--train-years",
            "64",
            "--out-dir",
            "cl",
        ],
    ));
    let regions = fs::read_to_string(dir.join("cl/regions.csv")).unwrap();
    let mut ids: Vec<&str> = regions
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap())
        .collect();
    ids.sort();
    ids.dedup();
    assert_eq!(ids.len(), 7, "expected 7 distinct region ids");

    // And the rendered map carries one legend entry per region.
    assert_ok(&zonecast(
        dir,
        &[
            "render-map",
            "cl/regions.csv",
            "--field",
            "region_id",
            "--out",
            "map.svg",
        ],
    ));
    let svg = fs::read_to_string(dir.join("map.svg")).unwrap();
    assert_eq!(svg.matches("legend-swatch").count(), 7);
    assert_eq!(svg.matches(r#"class="cell""#).count(), 169);
}

#[test]
fn predict_outputs_have_the_contracted_shape() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let mut spec = small_spec(13);
    // Noiseless planted relation: the OLS path must be exact.
    spec.noise_sigma = 0.0;
    write_spec(dir, &spec);
    assert_ok(&zonecast(
        dir,
        &[
            "synth",
            "--spec",
            "spec.json",
            "--seed",
            "13",
            "--out",
            "data.csv",
            "--labels",
            "l.csv",
        ],
    ));
    assert_ok(&zonecast(
        dir,
        &[
            "cluster",
            "data.csv",
            "--method",
            "kmeans",
            "--k",
            "3",
            "--seed",
            "2",
            "--out-dir",
            "cl",
        ],
    ));
    assert_ok(&zonecast(
        dir,
        &[
            "train",
            "data.csv",
            "cl/regions.csv",
            "--target",
            "air_temperature",
            "--p",
            "2",
            "--model",
            "ols",
            "--seed",
            "2",
            "--out-dir",
            "tr",
        ],
    ));
    assert_ok(&zonecast(
        dir,
        &[
            "predict-evaluate",
            "data.csv",
            "cl/regions.csv",
            "tr/models.json",
            "--p",
            "2",
            "--out-dir",
            "pr",
        ],
    ));

    let predictions = fs::read_to_string(dir.join("pr/predictions.csv")).unwrap();
    assert_eq!(
        predictions.lines().next(),
        Some("lat,lon,year,predicted,actual,abs_error")
    );
    // 24 cells x p=2 entries.
    assert_eq!(predictions.lines().count() - 1, 48);

    // Noiseless planted linear target: the OLS path is exact.
    let report = fs::read_to_string(dir.join("pr/report.csv")).unwrap();
    assert_eq!(
        report.lines().next(),
        Some("region_id,region_size,rmse,correlation")
    );
    let mut report_regions = Vec::new();
    for line in report.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        report_regions.push(f[0].to_string());
        let rmse: f64 = f[2].parse().unwrap();
        assert!(rmse <= 1e-6, "rmse {rmse} above the noiseless tolerance");
    }

    // Report regions are exactly the ids in regions.csv.
    let regions = fs::read_to_string(dir.join("cl/regions.csv")).unwrap();
    let mut ids: Vec<String> = regions
        .lines()
        .skip(1)
        .map(|l| l.rsplit(',').next().unwrap().to_string())
        .collect();
    ids.sort();
    ids.dedup();
    assert_eq!(report_regions, ids);

    // cv_report for the OLS path lists the model without hyperparameters.
    let cv = fs::read_to_string(dir.join("tr/cv_report.csv")).unwrap();
    assert_eq!(
        cv.lines().next(),
        Some("region_id,model,c,epsilon,gamma,cv_mean_rmse,cv_std_rmse")
    );
    assert!(cv.lines().skip(1).all(|l| l.contains(",ols,")));
}

#[test]
fn train_rejects_unknown_target() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("data.csv"), format!("{CSV_HEADER}\n")).unwrap();
    fs::write(dir.join("regions.csv"), "lat,lon,region_id\n").unwrap();
    let out = zonecast(
        dir,
        &[
            "train",
            "data.csv",
            "regions.csv",
            "--target",
            "pressure",
            "--p",
            "1",
            "--model",
            "ols",
            "--seed",
            "1",
        ],
    );
    // clap rejects the value before any file is touched.
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn render_map_reports_missing_fields_and_counts_cells() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(dir.join("values.csv"), "lat,lon,region_id\n17.5,77.5,0\n").unwrap();

    let stderr = assert_exit(
        &zonecast(
            dir,
            &[
                "render-map",
                "values.csv",
                "--field",
                "prediction",
                "--out",
                "m.svg",
            ],
        ),
        2,
    );
    assert!(stderr.contains("missing field"), "stderr: {stderr}");

    assert_ok(&zonecast(
        dir,
        &[
            "render-map",
            "values.csv",
            "--field",
            "region_id",
            "--out",
            "m.svg",
        ],
    ));
    let svg = fs::read_to_string(dir.join("m.svg")).unwrap();
    assert_eq!(svg.matches(r#"class="cell""#).count(), 1);
    assert!(svg.contains(r#"version="1.1""#));

    // Seven regions: seven legend entries.
    let mut rows = String::from("lat,lon,region_id\n");
    for i in 0..7 {
        rows.push_str(&format!("{},77.5,{i}\n", 10.0 + 2.5 * i as f64));
    }
    fs::write(dir.join("seven.csv"), rows).unwrap();
    assert_ok(&zonecast(
        dir,
        &[
            "render-map",
            "seven.csv",
            "--field",
            "region_id",
            "--out",
            "seven.svg",
        ],
    ));
    let svg = fs::read_to_string(dir.join("seven.svg")).unwrap();
    assert_eq!(svg.matches("legend-swatch").count(), 7);
}

#[test]
fn manifests_record_output_digests() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    write_spec(dir, &small_spec(21));
    assert_ok(&zonecast(
        dir,
        &[
            "synth",
            "--spec",
            "spec.json",
            "--seed",
            "21",
            "--out",
            "data.csv",
            "--labels",
            "l.csv",
        ],
    ));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.join("synth.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "synth");
    assert_eq!(manifest["seed"], 21);
    let outputs = manifest["outputs"].as_array().unwrap();
    assert_eq!(outputs.len(), 2);
    for output in outputs {
        let path = output["path"].as_str().unwrap();
        let bytes = fs::read(dir.join(path)).unwrap();
        let digest = sha256_hex(&bytes);
        assert_eq!(
            output["sha256"].as_str().unwrap(),
            digest,
            "digest of {path}"
        );
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}
