use std::path::Path;
use std::process::{Command, Output};

use hjb_iso::sde::PathEnsemble;
use serde_json::Value;

fn hjb(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hjb-iso"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn basis_reports_both_structures() {
    let dir = tempfile::tempdir().unwrap();
    let free = hjb(dir.path(), &["basis", "--C", "0", "--D", "0", "--gamma", "1"]);
    assert_eq!(free.status.code(), Some(0));
    assert!(stdout(&free).contains("6 generators"));
    assert!(stdout(&free).contains("Sl2SemidirectHeisenberg"));
    let c = hjb(dir.path(), &["basis", "--C", "1", "--D", "0.5", "--gamma", "1"]);
    assert_eq!(c.status.code(), Some(0));
    assert!(stdout(&c).contains("4 generators"));
    assert!(stdout(&c).contains("Sl2DirectCenter"));
    let v = json(&hjb(dir.path(), &["basis", "--D", "-0.5", "--json"]));
    assert_eq!(v["family"], "V");
    assert_eq!(v["generators"].as_array().unwrap().len(), 6);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hjb(dir.path(), &["basis", "--gamma", "-1"]).status.code(), Some(2));
    assert_eq!(hjb(dir.path(), &["basis", "--bogus"]).status.code(), Some(2));
    assert_eq!(hjb(dir.path(), &["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(
        hjb(dir.path(), &["simulate", "--model", "affine", "--delta", "3", "--phi", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(hjb(dir.path(), &["basis", "--threads", "0"]).status.code(), Some(2));
}

#[test]
fn config_file_rejects_unknown_keys_and_yields_to_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("bad.toml"), "[potential]\ngama = 1\n").unwrap();
    let bad = hjb(dir.path(), &["basis", "--config", "bad.toml"]);
    assert_eq!(bad.status.code(), Some(2));
    std::fs::write(dir.path().join("run.toml"), "[potential]\nc = 1.0\nd = 0.0\n").unwrap();
    let from_file = json(&hjb(dir.path(), &["basis", "--config", "run.toml", "--json"]));
    assert_eq!(from_file["generators"].as_array().unwrap().len(), 4);
    let overridden = json(&hjb(dir.path(), &["basis", "--config", "run.toml", "--C", "0", "--json"]));
    assert_eq!(overridden["generators"].as_array().unwrap().len(), 6);
}

#[test]
fn brackets_show_reference_agreement() {
    let dir = tempfile::tempdir().unwrap();
    let o = hjb(dir.path(), &["brackets", "--D", "0.5"]);
    assert!(stdout(&o).contains("reference table: all 15 pairs match"), "{}", stdout(&o));
}

#[test]
fn fast_suites_pass() {
    let dir = tempfile::tempdir().unwrap();
    for suite in ["brackets", "residuals"] {
        let o = hjb(dir.path(), &["verify", "--suite", suite]);
        assert_eq!(o.status.code(), Some(0), "{suite}");
        assert_eq!(json(&o)["pass"], true);
    }
    let o = hjb(dir.path(), &["verify", "--suite", "density", "--delta", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["report"]["ks_within_95"], true);
}

#[test]
fn omega_suite_fails_with_exit_one_when_threshold_is_impossible() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["verify", "--suite", "omega", "--paths", "2000", "--steps", "100", "--stride", "20"];
    let ok = hjb(dir.path(), &args);
    assert_eq!(ok.status.code(), Some(0));
    let mut strict = args.to_vec();
    strict.extend(["--z", "0"]);
    assert_eq!(hjb(dir.path(), &strict).status.code(), Some(1));
}

#[test]
fn simulate_writes_matching_csv_binary_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = hjb(
        dir.path(),
        &["simulate", "--model", "bernstein", "--eta", "affine:2,2,1", "--paths", "20", "--steps", "10", "--out", "ou"],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let bin = PathEnsemble::read_binary(std::fs::File::open(dir.path().join("ou.bin")).unwrap()).unwrap();
    assert_eq!(bin.n_paths(), 20);
    let csv = std::fs::read_to_string(dir.path().join("ou.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "path_id,t,value");
    assert_eq!(lines.len(), 1 + 20 * 11);
    let last: Vec<&str> = lines[lines.len() - 1].split(',').collect();
    assert_eq!(last[2].parse::<f64>().unwrap(), bin.value(19, 10));
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("ou.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["request"]["sim"]["seed"], 0);
    assert!(manifest["git_describe"].as_str().is_some());
    assert!(manifest["command"].as_str().unwrap().contains("--eta affine:2,2,1"));
}

#[test]
fn manifest_command_regenerates_the_data() {
    let dir = tempfile::tempdir().unwrap();
    hjb(
        dir.path(),
        &["simulate", "--model", "affine", "--delta", "1", "--paths", "50", "--steps", "20", "--seed", "3", "--out", "a"],
    );
    let manifest: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a.manifest.json")).unwrap()).unwrap();
    let cmd = manifest["command"].as_str().unwrap().replace("--out a", "--out b");
    let args: Vec<&str> = cmd.split_whitespace().skip(1).collect();
    assert_eq!(hjb(dir.path(), &args).status.code(), Some(0));
    let a = std::fs::read(dir.path().join("a.bin")).unwrap();
    let b = std::fs::read(dir.path().join("b.bin")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn transform_reports_small_residual() {
    let dir = tempfile::tempdir().unwrap();
    let o = hjb(
        dir.path(),
        &["transform", "--eta", "gaussian:2,0", "--generator", "1", "--mu", "0.3", "--out", "g.csv"],
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o)["residual"]["relative"].as_f64().unwrap() < 1e-8);
    assert!(dir.path().join("g.csv").exists());
    let t = json(&hjb(dir.path(), &["transform", "--eta", "affine:2,2,3", "--generator", "5"]));
    assert_eq!(t["generator"], "R5");
    assert!(t["residual"]["relative"].as_f64().unwrap() < 1e-8);
}

#[test]
fn density_command_normalizes() {
    let dir = tempfile::tempdir().unwrap();
    let o = hjb(dir.path(), &["density", "--delta", "3", "--out", "rho.csv", "--points", "11"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert!((v["normalization"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    let csv = std::fs::read_to_string(dir.path().join("rho.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
}
