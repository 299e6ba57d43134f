//! End-to-end tests of the `m3jacobi` binary: spawn it, parse its JSON
//! output, and check values against independently known constants.

use std::f64::consts::PI;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_m3jacobi"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary should spawn")
}

fn run_json(args: &[&str]) -> Value {
    let output = run(args);
    assert!(
        output.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    serde_json::from_slice(&output.stdout).expect("stdout should be one JSON object")
}

fn num(value: &Value) -> f64 {
    value.as_f64().expect("numeric field")
}

#[test]
fn info_reports_berger_invariants() {
    let json = run_json(&["info", "--kappa", "4", "--tau", "1"]);
    assert_eq!(json["space_type"], "BergerSphere");
    assert!((num(&json["fiber_length"]) - PI).abs() < 1e-12);
    assert!((num(&json["xi_sectional"]) - 0.25).abs() < 1e-12);
    assert_eq!(json["biinvariant"], "unique");
    assert!((num(&json["biinvariant_r"]) - 1.0 / 3.0).abs() < 1e-12);
    let ricci: Vec<f64> = json["ricci"]
        .as_array()
        .expect("ricci array")
        .iter()
        .map(num)
        .collect();
    assert_eq!(ricci, vec![3.5, 3.5, 0.5]);
}

#[test]
fn info_rejects_excluded_parameters() {
    let output = run(&["info", "--kappa", "1", "--tau", "1"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("error"));
}

#[test]
fn rank_reports_circle_parameters() {
    let json = run_json(&["rank", "--kappa", "1", "--tau", "2", "--theta", "0.5pi"]);
    assert_eq!(json["rank"], 2);
    let circle = &json["circle"];
    assert!((num(&circle["radius"]) - 1.5 * 2.0_f64.sqrt()).abs() < 1e-8);
    assert!((num(&circle["period"]) - PI).abs() < 1e-8);
}

#[test]
fn rank_on_the_fiber_is_zero_without_circle() {
    let json = run_json(&["rank", "--kappa", "1", "--tau", "2", "--theta", "0"]);
    assert_eq!(json["rank"], 0);
    assert!(json.get("circle").is_none());
}

#[test]
fn global_radius_of_heisenberg() {
    let json = run_json(&["radius", "--kappa", "0", "--tau", "1"]);
    assert!((num(&json["radius"]) - 2.0 * PI).abs() < 1e-12);
}

#[test]
fn radius_is_infinite_on_flat_directions() {
    let json = run_json(&["radius", "--kappa", "-1", "--tau", "1", "--theta", "0.25pi"]);
    assert_eq!(json["class"], "Isotropic");
    assert_eq!(json["radius"], "inf");
}

#[test]
fn conjugate_points_on_the_berger_equator() {
    let json = run_json(&[
        "conjugate",
        "--kappa",
        "4",
        "--tau",
        "1",
        "--theta",
        "0.5pi",
        "--t-max",
        "4",
    ]);
    assert_eq!(json["count"], 2);
    let points = json["points"].as_array().expect("points array");
    assert_eq!(points[0]["kind"], "NonIsotropicBranch");
    assert!((num(&points[0]["t"]) - 1.758164169633519).abs() < 1e-12);
    assert_eq!(points[1]["kind"], "IsotropicLattice");
    assert!((num(&points[1]["t"]) - PI).abs() < 1e-12);
    for point in points {
        assert_eq!(point["multiplicity"], 1);
    }
}

#[test]
fn jacobi_samples_isotropic_solution() {
    let json = run_json(&[
        "jacobi",
        "--kappa",
        "1",
        "--tau",
        "2",
        "--theta",
        "0.5pi",
        "--xprime0",
        "0,1,0",
        "--times",
        "0,1",
    ]);
    assert_eq!(json["branch"], "lambda_positive");
    assert_eq!(json["isotropic"], Value::Bool(true));
    assert!((num(&json["killing_coefficient"]) - 1.0).abs() < 1e-12);
    let samples = json["samples"].as_array().expect("samples");
    let x0: Vec<f64> = samples[0]["x"]
        .as_array()
        .unwrap()
        .iter()
        .map(num)
        .collect();
    assert!(x0.iter().all(|v| v.abs() < 1e-15));
    let x1: Vec<f64> = samples[1]["x"]
        .as_array()
        .unwrap()
        .iter()
        .map(num)
        .collect();
    assert!(x1[0].abs() < 1e-12);
    assert!((x1[1] - 1.0_f64.sin()).abs() < 1e-12);
    assert!((x1[2] + 2.0 * (1.0 - 1.0_f64.cos())).abs() < 1e-12);
}

#[test]
fn jacobi_rejects_malformed_vectors() {
    let output = run(&[
        "jacobi",
        "--kappa",
        "1",
        "--tau",
        "2",
        "--theta",
        "0.5pi",
        "--xprime0",
        "1,2",
        "--times",
        "0",
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn angles_must_parse() {
    let output = run(&["rank", "--kappa", "1", "--tau", "2", "--theta", "half-pi"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn fcurve_writes_expected_grid() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("f.csv");
    let json = run_json(&[
        "fcurve",
        "--kappa",
        "0",
        "--tau",
        "1",
        "--theta",
        "0.5pi",
        "--s-max",
        "6.283185307179586",
        "--samples",
        "11",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(json["samples"], 11);
    let text = std::fs::read_to_string(&path).expect("file written");
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[0], "s,f_theta_s");
    let last: Vec<f64> = lines[11].split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[0] - 2.0 * PI).abs() < 1e-12);
    // f(2 pi) = 2 sin(pi) (sin(pi) - mu 2 pi cos(pi)) = 0 up to rounding.
    assert!(last[1].abs() < 1e-12);
}

#[test]
fn locus_single_band_obj_counts_match() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("branch.obj");
    let json = run_json(&[
        "locus",
        "--kappa",
        "4",
        "--tau",
        "1",
        "--family",
        "branch",
        "--p-min",
        "0",
        "--theta-samples",
        "33",
        "--phi-samples",
        "24",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(json["p_min"], 0);
    assert_eq!(json["p_max"], 0);
    let surfaces = json["surfaces"].as_array().expect("surfaces");
    assert_eq!(surfaces.len(), 1);
    assert_eq!(surfaces[0]["p"], 0);
    let rows = surfaces[0]["rows"].as_i64().unwrap() as usize;
    let cols = surfaces[0]["cols"].as_i64().unwrap() as usize;
    assert_eq!((rows, cols), (33, 24));
    assert!(num(&surfaces[0]["max_quadric_residual"]) < 1e-9);
    let text = std::fs::read_to_string(&path).expect("obj written");
    let vertices = text.lines().filter(|l| l.starts_with("v ")).count();
    let faces = text.lines().filter(|l| l.starts_with("f ")).count();
    assert_eq!(vertices, rows * cols);
    assert_eq!(faces, 2 * (rows - 1) * cols);
}

#[test]
fn locus_splits_into_polar_bands() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("iso.csv");
    let json = run_json(&[
        "locus",
        "--kappa",
        "0",
        "--tau",
        "1",
        "--family",
        "isotropic",
        "--p-min",
        "1",
        "--theta-samples",
        "33",
        "--phi-samples",
        "24",
        "--out",
        path.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    let surfaces = json["surfaces"].as_array().expect("surfaces");
    assert_eq!(surfaces.len(), 2);
    let north = dir.path().join("iso-north.csv");
    let south = dir.path().join("iso-south.csv");
    assert!(north.exists() && south.exists());
    let text = std::fs::read_to_string(&north).unwrap();
    assert!(text.starts_with("theta,phi,x,y,z,s"));
}

#[test]
fn locus_p_range_writes_one_json_file_per_index() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("branch.json");
    let json = run_json(&[
        "locus",
        "--kappa",
        "4",
        "--tau",
        "1",
        "--family",
        "branch",
        "--p-min",
        "0",
        "--p-max",
        "1",
        "--theta-samples",
        "17",
        "--phi-samples",
        "12",
        "--out",
        path.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(json["p_min"], 0);
    assert_eq!(json["p_max"], 1);
    let surfaces = json["surfaces"].as_array().expect("surfaces");
    assert_eq!(surfaces.len(), 2);
    assert_eq!(surfaces[0]["p"], 0);
    assert_eq!(surfaces[1]["p"], 1);
    let first = dir.path().join("branch-p0.json");
    let second = dir.path().join("branch-p1.json");
    assert!(first.exists() && second.exists());
    let grid: Value =
        serde_json::from_str(&std::fs::read_to_string(&first).unwrap()).expect("grid json");
    assert_eq!(grid["rows"], 17);
    assert_eq!(grid["cols"], 12);
    let points = grid["points"].as_array().expect("points");
    assert_eq!(points.len(), 17);
    assert_eq!(points[0].as_array().unwrap().len(), 12);
    assert_eq!(points[0][0].as_array().unwrap().len(), 3);
}

#[test]
fn locus_rejects_inverted_p_range() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("bad.obj");
    let output = run(&[
        "locus",
        "--kappa",
        "4",
        "--tau",
        "1",
        "--family",
        "branch",
        "--p-min",
        "2",
        "--p-max",
        "1",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn check_reads_algebra_from_json() {
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("s2.json");
    std::fs::write(
        &path,
        r#"{
            "dim_m": 2,
            "dim_k": 1,
            "metric_m": [1.0, 0.0, 0.0, 1.0],
            "brackets": [
                {"kind": "mm_k", "i": 0, "j": 1, "k": 0, "value": 1.0},
                {"kind": "km", "i": 0, "j": 0, "k": 1, "value": 1.0},
                {"kind": "km", "i": 0, "j": 1, "k": 0, "value": -1.0}
            ]
        }"#,
    )
    .unwrap();
    let json = run_json(&["check", path.to_str().unwrap()]);
    assert_eq!(json["naturally_reductive"], Value::Bool(true));
    assert!(num(&json["jacobi_residual"]) < 1e-12);
    assert!(num(&json["max_violation"]) < 1e-12);
    let directions = json["directions"].as_array().expect("directions");
    assert_eq!(directions.len(), 2);
    for entry in directions {
        assert_eq!(entry["rank"], 0);
    }
    assert_eq!(json["biinvariant"], "unique");
    assert!((num(&json["biinvariant_r"]) - 1.0).abs() < 1e-10);
}

#[test]
fn verify_quick_passes() {
    let json = run_json(&["verify", "--level", "quick"]);
    assert_eq!(json["passed"], Value::Bool(true));
    assert_eq!(json["criteria"].as_array().expect("criteria").len(), 13);
}

#[test]
fn output_is_deterministic() {
    let first = run(&["info", "--kappa", "4", "--tau", "1"]);
    let second = run(&["info", "--kappa", "4", "--tau", "1"]);
    assert!(first.status.success() && second.status.success());
    assert_eq!(first.stdout, second.stdout);
}
