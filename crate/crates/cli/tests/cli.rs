use std::process::Command;

use hgm_cli::output::ResultDocument;
use hgm_cli::run_with;
use hgm_core::scalar::{parse_rat, rat};
use hgm_core::{evaluate, oracle_z, EvalOptions, TableProblem};
use serde_json::Value;

const WORKED: &str = r#"{
  "row_sums": [2, 3, 3],
  "col_sums": [1, 3, 4],
  "probabilities": [["1", "0.5", "1/3"], ["1", "0.2", "1/7"], ["1", "1", "1"]]
}"#;

fn run_json(args: &[&str], input: &str) -> (i32, Value, String) {
    let mut argv = vec!["hgm"];
    argv.extend_from_slice(args);
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run_with(argv, &mut input.as_bytes(), &mut out, &mut err);
    let value = serde_json::from_slice(&out).expect("stdout is JSON");
    (code, value, String::from_utf8(err).unwrap())
}

fn worked_problem() -> TableProblem {
    TableProblem::new(
        vec![2, 3, 3],
        vec![1, 3, 4],
        vec![
            vec![rat(1, 1), rat(1, 2), rat(1, 3)],
            vec![rat(1, 1), rat(1, 5), rat(1, 7)],
            vec![rat(1, 1), rat(1, 1), rat(1, 1)],
        ],
    )
    .unwrap()
}

#[test]
fn worked_example_reports_path_length_nine() {
    let (code, v, err) = run_json(&["-"], WORKED);
    assert_eq!(code, 0);
    assert_eq!(v["diagnostics"]["e"], 9);
    assert_eq!(v["diagnostics"]["path"].as_array().unwrap().len(), 9);
    let p = worked_problem();
    let z = oracle_z(p.row_sums(), p.col_sums(), p.probabilities()).unwrap();
    assert_eq!(parse_rat(v["z_exact"].as_str().unwrap()).unwrap(), z);
    assert_eq!(v["z_decimal"], "9.31017168772271e-3");
    assert!(err.contains("e = 9"));
}

#[test]
fn oracle_block_reports_match() {
    let small = r#"{"row_sums": [1, 2], "col_sums": [2, 1], "probabilities": [["1", "1/2"], ["1", "1/3"]]}"#;
    let (code, v, _) = run_json(&["--oracle", "-q", "-"], small);
    assert_eq!(code, 0);
    assert_eq!(v["oracle"]["match"], true);
}

#[test]
fn malformed_probability_is_a_parse_error() {
    let bad = r#"{"row_sums": [1, 1], "col_sums": [1, 1], "probabilities": [["1", "0.5"], ["1", "half"]]}"#;
    let (code, v, _) = run_json(&["-q", "-"], bad);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["kind"], "parse");
    assert_eq!(v["error"]["location"], "probabilities[1][1]");

    let (code, v, _) = run_json(&["-q", "-"], "{\"row_sums\": [1,");
    assert_eq!(code, 2);
    assert!(v["error"]["location"].as_str().unwrap().starts_with("-:1:"));

    let floaty = r#"{"row_sums": [1, 1], "col_sums": [1, 1], "probabilities": [[1, 0.5], [1, 1]]}"#;
    let (code, _, _) = run_json(&["-q", "-"], floaty);
    assert_eq!(code, 2);
}

#[test]
fn point_outside_x_is_a_math_error() {
    let flat = r#"{"row_sums": [1, 1], "col_sums": [1, 1], "probabilities": [["1", "1"], ["1", "1"]]}"#;
    let (code, v, _) = run_json(&["-q", "-"], flat);
    assert_eq!(code, 3);
    assert_eq!(v["error"]["kind"], "math");
    assert!(v["error"]["message"].as_str().unwrap().contains("{23}"));
}

#[test]
fn result_round_trips_exactly() {
    let (code, v, _) = run_json(&["-q", "--emit-pfaffian", "--emit-contiguity", "2", "-"], WORKED);
    assert_eq!(code, 0);
    let doc: ResultDocument = serde_json::from_value(v.clone()).unwrap();
    assert_eq!(serde_json::to_value(&doc).unwrap(), v);

    let exact = evaluate(&worked_problem(), EvalOptions::default()).unwrap();
    assert_eq!(parse_rat(doc.z_exact.as_deref().unwrap()).unwrap(), exact.z);
    for (row, erow) in doc.expectations.iter().zip(&exact.expectations) {
        for (s, e) in row.iter().zip(erow) {
            assert_eq!(&parse_rat(s).unwrap(), e);
        }
    }
    for (a, b) in doc.gradients.iter().flatten().flatten().flatten().zip(exact.gradients.iter().flatten().flatten().flatten()) {
        assert_eq!(&parse_rat(a).unwrap(), b);
    }
    assert_eq!(doc.pfaffian.as_ref().unwrap().len(), 4);
    assert_eq!(doc.contiguity.as_ref().unwrap().index, Some(2));
}

#[test]
fn digits_and_float_backend() {
    let (_, v, _) = run_json(&["-q", "--digits", "4", "-"], WORKED);
    assert_eq!(v["z_decimal"], "9.310e-3");
    let (code, v, _) = run_json(&["-q", "--float", "-"], WORKED);
    assert_eq!(code, 0);
    assert!(v["z_exact"].is_null());
    assert_eq!(v["diagnostics"]["backend"], "float");
    let z: f64 = v["z_decimal"].as_str().unwrap().parse().unwrap();
    assert!((z - 9.31017168772271e-3).abs() < 1e-15);
}

#[test]
fn batch_input_keeps_order_and_worst_exit_code() {
    let flat = r#"{"row_sums": [1, 1], "col_sums": [1, 1], "probabilities": [["1", "1"], ["1", "1"]]}"#;
    let batch = format!("[{WORKED}, {flat}, {WORKED}]");
    let (code, v, err) = run_json(&["-"], &batch);
    assert_eq!(code, 3);
    let items = v.as_array().unwrap();
    assert_eq!(items.len(), 3);
    assert_eq!(items[0]["diagnostics"]["e"], 9);
    assert_eq!(items[1]["error"]["kind"], "math");
    assert_eq!(items[0]["z_exact"], items[2]["z_exact"]);
    assert!(err.contains("[1] error"));
}

#[test]
fn contiguity_index_out_of_range() {
    let (code, v, _) = run_json(&["-q", "--emit-contiguity", "9", "-"], WORKED);
    assert_eq!(code, 2);
    assert_eq!(v["error"]["location"], "--emit-contiguity");
}

#[test]
fn binary_exit_codes_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("worked.json");
    let output = dir.path().join("result.json");
    std::fs::write(&input, WORKED).unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_hgm"))
        .arg(&input)
        .arg("--quiet")
        .arg("--output")
        .arg(&output)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let doc: ResultDocument = serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(doc.diagnostics.e, 9);

    let missing = Command::new(env!("CARGO_BIN_EXE_hgm"))
        .arg(dir.path().join("absent.json"))
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&missing.stdout).unwrap();
    assert_eq!(v["error"]["kind"], "io");
}
