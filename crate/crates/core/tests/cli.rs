use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn psiq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psiq")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = psiq(&all);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn copy_tables(to: &Path) {
    let from = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/appendix");
    for entry in std::fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), to.join(entry.file_name())).unwrap();
    }
}

#[test]
fn coeffs_row_nine() {
    let v = json(&["coeffs", "--degree", "9"]);
    let row = &v["coefficients"][8];
    assert_eq!(row["n"], 9);
    assert_eq!(row["b_n"], "20711204716544");
    assert_eq!(row["valuation"], 26);
    assert_eq!(row["cofactor"], "308621");
}

#[test]
fn coeffs_csv_header() {
    let out = psiq(&["coeffs", "--degree", "1", "--format", "csv"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "n,b_n,v,cofactor\n1,1,0,1\n");
}

#[test]
fn polygon_matches_closed_form() {
    let v = json(&["polygon", "--degree", "32", "--emit-closed-form"]);
    assert_eq!(v["verdict"], "match");
    assert_eq!(v["polygon"]["kind"], "newton");
}

#[test]
fn zeros_of_valuation_minus_two() {
    let v = json(&["zeros", "--p", "3", "--n", "2"]);
    assert_eq!(v["count"], 6);
    for z in v["zeros"].as_array().unwrap() {
        assert_eq!(z["zero_valuation"], -2);
        assert!(z["residual_valuation"]["value"].as_i64().unwrap() >= 20);
    }
}

#[test]
fn decompose_seven_eighths() {
    let v = json(&["decompose", "--value", "7/8", "--digits", "4"]);
    assert_eq!(v["start"], -3);
    assert_eq!(v["digits"], serde_json::json!([[1], [1], [1], [0]]));
}

#[test]
fn eval_is_identity_mod_p() {
    let v = json(&["eval", "--p", "3", "--x", "5", "--target", "1"]);
    assert_eq!(v["value"]["unit"][0], "2");
}

#[test]
fn verify_exit_status() {
    let out = psiq(&["verify", "--suite", "witt", "--p", "3"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).ends_with("pass\n"));
}

#[test]
fn corrupted_table_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    copy_tables(dir.path());
    let ok = psiq(&["verify", "--suite", "appendix", "--fixtures", dir.path().to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));

    let path = dir.path().join("psi2_valuations.csv");
    let text = std::fs::read_to_string(&path).unwrap().replace("\n5,11\n", "\n5,12\n");
    std::fs::write(&path, text).unwrap();
    let bad = psiq(&["verify", "--suite", "appendix", "--fixtures", dir.path().to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&bad.stdout);
    assert!(stdout.contains("psi2_valuations.csv row n=5"), "{stdout}");
}

#[test]
fn bad_configuration_is_an_error() {
    assert_eq!(psiq(&["coeffs", "--p", "4"]).status.code(), Some(2));
    assert_eq!(psiq(&["coeffs", "--p", "3", "--f", "3"]).status.code(), Some(2));
    // x^2 + 1 = (x + 1)^2 over F_2
    let out = psiq(&["coeffs", "--p", "2", "--f", "2", "--modulus", "1,0,1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reducible"));
    assert!(psiq(&["coeffs", "--p", "2", "--f", "2", "--modulus", "1,1,1"]).status.success());
}

#[test]
fn output_file_and_directory() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("c.json");
    let out = psiq(&["coeffs", "--degree", "2", "--format", "json", "-o", file.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    assert_eq!(v["degree"], 2);

    let out = Command::new(env!("CARGO_BIN_EXE_psiq"))
        .args(["polygon", "--degree", "8", "--format", "csv"])
        .env("PSIQ_OUTPUT_DIR", dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("polygon.csv").exists());
}
