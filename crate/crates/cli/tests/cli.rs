use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn isosplit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isosplit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid json")
}

fn golden_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/golden/reference_lists.toml")
}

fn base_labels(v: &Value) -> Vec<String> {
    v["cases"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["label"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn catalog_e8_bases() {
    let o = isosplit(&["catalog", "--family", "E8"]);
    assert!(o.status.success());
    let v = json(&o);
    assert_eq!(v["schema_version"], 1);
    let labels = base_labels(&v);
    for want in ["E8/A1E7", "E8/A2E6", "E8/A4A4"] {
        assert!(labels.iter().any(|l| l == want), "{want} missing from {labels:?}");
    }
    let records = v["records"].as_array().unwrap();
    assert!(records.iter().all(|r| r["base_label"].as_str().unwrap().starts_with("E8/")));
}

#[test]
fn simple_k_bases_flagged() {
    let o = isosplit(&["catalog", "--class", "nearly-kaehler", "--simple-k"]);
    assert!(o.status.success());
    let v = json(&o);
    let cases = v["cases"].as_array().unwrap();
    let labels = base_labels(&v);
    assert_eq!(labels, vec!["E8/A8", "G2/A2"]);
    for c in cases {
        assert_eq!(c["note"], "no splitting: K is simple");
        assert!(c["record_ids"].as_array().unwrap().is_empty());
    }
    assert!(v["records"].as_array().unwrap().is_empty());
}

#[test]
fn rank_zero_is_empty() {
    let o = isosplit(&["catalog", "--family", "A", "--rank", "0"]);
    assert!(o.status.success());
    let v = json(&o);
    assert!(v["cases"].as_array().unwrap().is_empty());
    assert!(v["records"].as_array().unwrap().is_empty());
}

#[test]
fn bad_arguments_rejected() {
    for args in [
        &["catalog", "--rank-cap", "0"][..],
        &["catalog", "--rank-cap", "99"],
        &["catalog", "--family", "Q"],
        &["catalog", "--class", "kaehler"],
        &["verify", "su3-hopf", "--tol-gap", "-1"],
    ] {
        let o = isosplit(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn catalog_is_deterministic() {
    let a = isosplit(&["catalog", "--rank-cap", "6"]);
    let b = isosplit(&["catalog", "--rank-cap", "6"]);
    let c = isosplit(&["catalog", "--rank-cap", "6", "--sequential"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn catalog_csv_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cat.csv");
    let o = isosplit(&["catalog", "--rank-cap", "4", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(&headers[3], "case_id");
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let json_out = json(&isosplit(&["catalog", "--rank-cap", "4"]));
    let n_records = json_out["records"].as_array().unwrap().len();
    let with_id = rows.iter().filter(|r| !r[3].is_empty()).count();
    assert_eq!(with_id, n_records);
    assert!(rows.iter().any(|r| &r[0] == "G2/A2" && r[3].is_empty()));
}

#[test]
fn golden_lists_match() {
    let o = isosplit(&["catalog", "--golden", "--format", "text"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
    let o = isosplit(&["catalog", "--golden", golden_path().to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(json(&o)["pass"], true);
}

#[test]
fn corrupted_golden_fails_with_diff() {
    let text = std::fs::read_to_string(golden_path()).unwrap();
    let bad = text.replace("labels = [\"E8/A4A4\"]", "labels = [\"E8/A4A4\", \"E7/A3A3\"]");
    assert_ne!(bad, text);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, bad).unwrap();

    let o = isosplit(&["catalog", "--golden", path.to_str().unwrap(), "--format", "text"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("FAIL 5-symmetric bases"), "{out}");
    assert!(out.contains("  - E7/A3A3"), "{out}");

    let o = isosplit(&["selfcheck", "--rank-cap", "7", "--golden", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["pass"], false);

    std::fs::write(&path, "schema_version = 1\nnonsense = true\n").unwrap();
    let o = isosplit(&["selfcheck", "--rank-cap", "2", "--golden", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn selfcheck_small_cap() {
    let o = isosplit(&["selfcheck", "--rank-cap", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o);
    assert_eq!(v["pass"], true);
    assert_eq!(v["rank_cap"], 2);
    let types: Vec<&str> = v["weyl_orders"].as_array().unwrap().iter().map(|w| w["type"].as_str().unwrap()).collect();
    assert!(types.contains(&"G2") && !types.contains(&"A3"));
    let o = isosplit(&["selfcheck", "--rank-cap", "2", "--format", "csv"]);
    assert!(o.status.success());
    assert!(stdout(&o).starts_with("section,property,subject,status"));
}

fn verify_json(case: &str, extra: &[&str]) -> (Output, Value) {
    let mut args = vec!["verify", case, "--seed", "42", "--samples", "24"];
    args.extend_from_slice(extra);
    let o = isosplit(&args);
    let v = json(&o);
    (o, v)
}

#[test]
fn verify_hopf_passes() {
    let (o, v) = verify_json("su3-hopf", &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert_eq!(v["pass"], true);
    assert_eq!(v["settings"]["seed"], 42);
    assert_eq!(v["tolerances"]["geometry"]["constancy"], 1e-4);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["status"] == "pass"));
    assert!(checks
        .iter()
        .any(|c| c["property"] == "every isometry of the identity component preserves some fiber"));
    assert!(v["displacement"].as_array().unwrap().len() >= 20);
}

#[test]
fn verify_stiefel_passes() {
    let (o, v) = verify_json("so6-stiefel", &["--tol-constancy", "2e-4"]);
    assert!(o.status.success());
    assert_eq!(v["tolerances"]["geometry"]["constancy"], 2e-4);
    let checks = v["checks"].as_array().unwrap();
    let constant: Vec<&Value> = checks
        .iter()
        .filter(|c| c["property"] == "isometries in {+-I} x r(SO(3)) have constant displacement")
        .collect();
    assert!(constant.len() >= 10);
    assert!(constant.iter().all(|c| c["status"] == "pass"));
    let planes = checks
        .iter()
        .filter(|c| c["property"].as_str().unwrap().contains("3-plane invariant"))
        .count();
    assert_eq!(planes, 21);
}

#[test]
fn verify_is_deterministic() {
    let args = ["verify", "su3-hopf", "--samples", "12", "--format", "csv"];
    let a = isosplit(&args);
    let mut seq = args.to_vec();
    seq.push("--sequential");
    let b = isosplit(&seq);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_catalog_only_case() {
    let o = isosplit(&["verify", "e8-a4a4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("no concrete model"));
    let o = isosplit(&["verify", "no-such-case"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn strict_tolerance_reports_failure() {
    let (o, v) = verify_json("su3-hopf", &["--tol-killing-length", "1e-30"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(v["pass"], false);
    let failed: Vec<&Value> = v["checks"].as_array().unwrap().iter().filter(|c| c["status"] == "fail").collect();
    assert!(failed
        .iter()
        .all(|c| c["property"] == "Killing fields from k2 acting on the right have constant length"));
    assert!(!failed.is_empty());
}
