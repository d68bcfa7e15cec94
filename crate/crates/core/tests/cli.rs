use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_steklov-lab");

const CONFIG: &str = r#"{
  "domains": ["unit_disk", "square", {"id": "small_rect", "kind": "rectangle", "a": 1.0, "b": 0.5}],
  "h_levels": [0.2, 0.1],
  "k_eigenpairs": 6,
  "lambda_window": [0.5, 4.0],
  "mixed_sweeps": [
    {"kind": "ball", "domain": "flat_graph", "x0_index": 9, "n_boundary_samples": 14, "s_values": [0.5, 0.25], "h_over_s": 0.1},
    {"kind": "ball", "domain": "square", "s_values": [0.4, 0.2], "h_over_s": 0.1},
    {"kind": "tank", "length": 3.14159, "depth_values": [1.0, 2.0], "h": 0.1}
  ],
  "seed": 3
}"#;

fn lab(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env_remove("STEKLOV_LAB_OUT").output().unwrap()
}

fn write_config(dir: &Path) -> String {
    let path = dir.join("cfg.json");
    fs::write(&path, CONFIG).unwrap();
    path.to_str().unwrap().to_string()
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let mut rows = vec![r.headers().unwrap().iter().map(String::from).collect()];
    rows.extend(r.records().map(|x| x.unwrap().iter().map(String::from).collect()));
    rows
}

#[test]
fn run_writes_all_artifacts_deterministically() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let out = lab(&["run", "--config", &cfg, "--out", a.to_str().unwrap(), "--jobs", "1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let out = lab(&["run", "--config", &cfg, "--out", b.to_str().unwrap(), "--jobs", "3"]);
    assert!(out.status.success());
    for f in ["spectra.json", "nodal_scaling.csv", "convergence.csv", "lemma1.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }

    // 3 domains × 2 levels × 5 nonconstant modes.
    let nodal = csv_rows(&a.join("nodal_scaling.csv"));
    assert_eq!(nodal.len(), 1 + 30);
    assert_eq!(nodal[0][0], "domain_id");

    let lemma = csv_rows(&a.join("lemma1.csv"));
    assert_eq!(lemma[0], ["domain", "x0", "s", "sigma1", "r_psi", "sigma1_s"]);
    assert_eq!(lemma.len(), 1 + 6);
    for row in &lemma[1..] {
        let s: f64 = row[2].parse().unwrap();
        let sigma: f64 = row[3].parse().unwrap();
        let prod: f64 = row[5].parse().unwrap();
        assert!((sigma * s - prod).abs() <= 1e-12 * prod.abs().max(1.0));
    }

    let json: serde_json::Value = serde_json::from_slice(&fs::read(a.join("spectra.json")).unwrap()).unwrap();
    assert_eq!(json["config_hash"].as_str().unwrap().len(), 16);
    assert_eq!(json["spectra"].as_array().unwrap().len(), 6);
}

#[test]
fn scaling_skips_the_mixed_sweeps() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let out = tmp.path().join("s");
    assert!(lab(&["scaling", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
    assert!(out.join("nodal_scaling.csv").exists());
    assert!(!out.join("lemma1.csv").exists());
}

#[test]
fn output_directory_comes_from_the_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path());
    let env_dir = tmp.path().join("env");
    let status = Command::new(BIN)
        .args(["scaling", "--config", &cfg])
        .env("STEKLOV_LAB_OUT", &env_dir)
        .current_dir(tmp.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(env_dir.join("spectra.json").exists());
}

#[test]
fn unknown_domain_is_a_usage_error() {
    let out = lab(&["solve", "--domain", "heptagon"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown domain"));
}

#[test]
fn module_errors_print_json_and_exit_one() {
    let out = lab(&["mixed", "--domain", "unit_disk", "--s", "2.5", "--h", "0.1"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["error"], "BallCoversDomain");

    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, r#"{"domains": [], "h_levels": [0.1], "k_eigenpairs": 4, "lambda_window": [1, 2]}"#).unwrap();
    let out = lab(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["error"], "InvalidInput");
}

#[test]
fn solve_prints_and_exports() {
    let tmp = tempfile::tempdir().unwrap();
    let out = lab(&[
        "solve", "--domain", "unit_disk", "--h", "0.1", "--k", "5", "--out", tmp.path().to_str().unwrap(), "--export", "1",
    ]);
    assert!(out.status.success());
    let values: Vec<f64> = String::from_utf8(out.stdout).unwrap().lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(values.len(), 5);
    assert!((values[1] - 1.0).abs() < 0.05);
    assert!(tmp.path().join("spectrum.json").exists());
    let text = fs::read_to_string(tmp.path().join("eigvec_1.txt")).unwrap();
    assert!(steklov_core::mesh::PlanarMesh::from_text(&text).is_ok());
}

#[test]
fn mesh_dump_round_trips() {
    let out = lab(&["mesh-dump", "--domain", "l_shape", "--h", "0.2"]);
    assert!(out.status.success());
    let mesh = steklov_core::mesh::PlanarMesh::from_text(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let area = steklov_core::domain::DomainSpec::by_id("l_shape").unwrap().area();
    assert!((mesh.area() - area).abs() < 1e-9);
}

#[test]
fn sloshing_prints_oracle_alongside() {
    let out = lab(&["mixed", "--domain", "sloshing", "--h", "0.1", "--k", "2"]);
    assert!(out.status.success());
    for line in String::from_utf8(out.stdout).unwrap().lines() {
        let v: Vec<f64> = line.split_whitespace().map(|x| x.parse().unwrap()).collect();
        assert!((v[0] - v[1]).abs() / v[1] < 0.02, "{line}");
    }
}

#[test]
fn nodal_prints_a_csv_table() {
    let out = lab(&["nodal", "--domain", "square", "--h", "0.1", "--k", "4"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 4);
}
