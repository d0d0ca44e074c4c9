use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lientropy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lientropy"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const DOUBLING: &str = r#"{
  "group": {"kind": "compact", "toral_dim": 1},
  "endo": {"kind": "compact", "toral_map": [[2]]}
}"#;

const SEMISIMPLE: &str = r#"{
  "group": {"kind": "semisimple_linear", "matrix_size": 2},
  "endo": {"kind": "semisimple_linear", "g": [[2, 0], [0, 0.5]]}
}"#;

const SINGULAR_VECTOR_PART: &str = r#"{
  "group": {"kind": "abelian", "p": 1, "q": 1},
  "endo": {"kind": "abelian", "lattice_map": [[2]], "vector_map": [[0]]}
}"#;

const GENERAL: &str = r#"{
  "group": {"kind": "general_conjecture", "radical_toral_dim": 1, "quotient_toral_dim": 1},
  "endo": {"kind": "general_conjecture", "toral_r_prime": [[2]], "toral_r_mod_r_prime": [[3]]}
}"#;

#[test]
fn compute_compact_doubling() {
    let dir = tempfile::tempdir().unwrap();
    let out = lientropy(&["compute", &write(dir.path(), "d.json", DOUBLING)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let cert = stdout_json(&out);
    assert!((cert["value"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
    assert_eq!(cert["conjectural"], false);
    assert!(!stderr(&out).contains("CONJECTURAL"));
}

#[test]
fn compute_log_base_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = lientropy(&[
        "compute",
        &write(dir.path(), "d.json", DOUBLING),
        "--log-base",
        "2",
    ]);
    assert_eq!(code(&out), 0);
    let cert = stdout_json(&out);
    assert!((cert["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(cert["log_base"], "2");
}

#[test]
fn compute_semisimple_is_zero_with_reduction_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = lientropy(&["compute", &write(dir.path(), "s.json", SEMISIMPLE)]);
    assert_eq!(code(&out), 0);
    let cert = stdout_json(&out);
    assert_eq!(cert["value"].as_f64(), Some(0.0));
    let rules: Vec<&str> = cert["trace"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["rule"].as_str().unwrap())
        .collect();
    assert!(rules.contains(&"SEMISIMPLE_REDUCTION"), "{rules:?}");
}

#[test]
fn compute_singular_vector_part_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = lientropy(&[
        "compute",
        &write(dir.path(), "a.json", SINGULAR_VECTOR_PART),
    ]);
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("ERROR NOT_SURJECTIVE"),
        "{}",
        stderr(&out)
    );
    assert!(out.stdout.is_empty());
}

#[test]
fn compute_conjectural_prints_banner() {
    let dir = tempfile::tempdir().unwrap();
    let out = lientropy(&["compute", &write(dir.path(), "g.json", GENERAL)]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("CONJECTURAL"));
    let cert = stdout_json(&out);
    assert_eq!(cert["conjectural"], true);
    assert!((cert["value"].as_f64().unwrap() - 6f64.ln()).abs() < 1e-12);
}

#[test]
fn parse_error_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(
        dir.path(),
        "bad.json",
        "{\n  \"group\": {\"kind\": \"torus\", \"p\": 1},\n  oops\n}",
    );
    let out = lientropy(&["compute", &path]);
    assert_eq!(code(&out), 2);
    let err = stderr(&out);
    assert!(
        err.contains("PARSE_ERROR") && err.contains("line 3"),
        "{err}"
    );
}

#[test]
fn missing_file_is_an_input_error() {
    let out = lientropy(&["compute", "/nonexistent/descriptor.json"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unknown_flag_is_an_input_error() {
    assert_eq!(code(&lientropy(&["estimate", "--bogus"])), 2);
    assert_eq!(code(&lientropy(&[])), 2);
}

#[test]
fn output_is_byte_stable() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "d.json", DOUBLING);
    let a = lientropy(&["compute", &path]);
    let b = lientropy(&["compute", &path]);
    assert_eq!(a.stdout, b.stdout);
    let a = lientropy(&["adjoint", "--matrix", "[[1, 2], [0.5, 3]]"]);
    let b = lientropy(&["adjoint", "--matrix", "[[1, 2], [0.5, 3]]"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(stderr(&a).contains("elapsed"));
    assert!(!String::from_utf8_lossy(&a.stdout).contains("elapsed"));
}

#[test]
fn schema_flag_prints_descriptor_schema() {
    let out = lientropy(&["--schema"]);
    assert_eq!(code(&out), 0);
    let schema = stdout_json(&out);
    assert_eq!(schema["type"], "object");
}

#[test]
fn jordan_of_a_shear_is_all_unipotent() {
    let out = lientropy(&["jordan", "--matrix", "[[1, 1], [0, 1]]"]);
    assert_eq!(code(&out), 0);
    let j = stdout_json(&out);
    let identity = serde_json::json!([[1.0, 0.0], [0.0, 1.0]]);
    assert_eq!(j["elliptic"], identity);
    assert_eq!(j["hyperbolic"], identity);
    assert_eq!(j["unipotent"], serde_json::json!([[1.0, 1.0], [0.0, 1.0]]));
}

#[test]
fn jordan_reads_a_matrix_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "m.json", "[[2, 0], [0, 3]]");
    let out = lientropy(&["jordan", &path]);
    assert_eq!(code(&out), 0);
    assert_eq!(
        stdout_json(&out)["hyperbolic"],
        serde_json::json!([[2.0, 0.0], [0.0, 3.0]])
    );
}

#[test]
fn singular_matrix_is_a_numeric_failure() {
    let out = lientropy(&["jordan", "--matrix", "[[1, 2], [2, 4]]"]);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert!(stderr(&out).contains("SINGULAR_MATRIX"));
}

#[test]
fn recurrent_subspace_of_expanding_diagonal_is_empty() {
    let out = lientropy(&["recurrent", "--matrix", "[[2, 0], [0, 3]]"]);
    assert_eq!(code(&out), 0);
    let r = stdout_json(&out);
    assert_eq!(r["subspace"]["basis"], serde_json::json!([]));
}

#[test]
fn recurrent_check_confirms_rotation_vectors_return() {
    let out = lientropy(&["recurrent", "--matrix", "[[0, -1], [1, 0]]", "--check"]);
    assert_eq!(code(&out), 0);
    let r = stdout_json(&out);
    let checks = r["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 2);
    assert!(checks.iter().all(|c| c["recurrent"] == true));
}

#[test]
fn recurrent_conjugation_mode_tests_probes() {
    let out = lientropy(&[
        "recurrent",
        "--matrix",
        "[[2, 0], [0, 0.5]]",
        "--conjugation",
        "--probe",
        "[[0, -1], [1, 0]]",
        "--probe",
        "[[3, 0], [0, 1]]",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = stdout_json(&out);
    let members: Vec<bool> = r["probes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| p["member"].as_bool().unwrap())
        .collect();
    assert_eq!(members, vec![false, true]);
}

#[test]
fn adjoint_of_hyperbolic_element_has_radius_four() {
    let out = lientropy(&["adjoint", "--matrix", "[[2, 0], [0, 0.5]]"]);
    assert_eq!(code(&out), 0);
    let a = stdout_json(&out);
    assert!((a["spectral_radius"].as_f64().unwrap() - 4.0).abs() < 1e-12);
    assert_eq!(a["jordan_check"]["consistent"], true);
}

#[test]
fn estimate_doubling_with_defaults() {
    let out = lientropy(&["estimate", "--matrix", "[[2]]"]);
    assert_eq!(code(&out), 0);
    let e = stdout_json(&out);
    assert!((e["extrapolated"].as_f64().unwrap() - 2f64.ln()).abs() <= 0.1);
    assert_eq!(e["per_n"].as_array().unwrap().len(), 14);
}

#[test]
fn estimate_csv_table() {
    let out = lientropy(&[
        "estimate", "--matrix", "[[2]]", "--n-max", "4", "--format", "csv",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,epsilon,separated_count,rate");
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("1,0.05,"));
}

#[test]
fn estimate_out_of_wall_budget_exits_four() {
    let out = lientropy(&[
        "estimate",
        "--matrix",
        "[[2, 1], [1, 1]]",
        "--wall-budget",
        "0",
    ]);
    assert_eq!(code(&out), 4);
    assert_eq!(stdout_json(&out)["wall_budget_exhausted"], true);
}

#[test]
fn estimate_rejects_coarse_grid() {
    let out = lientropy(&["estimate", "--matrix", "[[2]]", "--grid", "10"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("INVALID_ARGUMENT"));
}

#[test]
fn liyorke_doubling_finds_witness() {
    let out = lientropy(&["liyorke", "--matrix", "[[2]]"]);
    assert_eq!(code(&out), 0);
    assert!(stdout_json(&out)["witness"].is_object());
}

#[test]
fn liyorke_rotation_reports_absence_with_caveat() {
    let out = lientropy(&["liyorke", "--matrix", "[[0, -1], [1, 0]]"]);
    assert_eq!(code(&out), 0);
    let s = stdout_json(&out);
    assert!(s["witness"].is_null());
    assert!(s["caveat"]
        .as_str()
        .unwrap()
        .contains("does not prove zero entropy"));
    assert!(stderr(&out).contains("does not prove zero entropy"));
}

#[test]
fn verify_fast_passes() {
    let out = lientropy(&["verify", "--level", "fast"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let r = stdout_json(&out);
    assert_eq!(r["passed"], true);
    let product = r["properties"]
        .as_array()
        .unwrap()
        .iter()
        .find(|p| p["name"] == "product_formula")
        .unwrap();
    assert!(product["residual"].as_f64().unwrap() <= 1e-9);
}

// The full level includes the cat-map oracle, which misses its 0.1 gap on
// the default 200² grid; the report carries the failure and the exit code
// says so.
#[test]
fn verify_full_reports_failures_with_exit_one() {
    let out = lientropy(&["verify", "--level", "full"]);
    let r = stdout_json(&out);
    let failed: Vec<&str> = r["properties"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|p| p["passed"] == false)
        .map(|p| p["name"].as_str().unwrap())
        .collect();
    if failed.is_empty() {
        assert_eq!(code(&out), 0);
    } else {
        assert_eq!(code(&out), 1);
        assert!(stderr(&out).contains("FAIL"));
    }
    assert_eq!(r["properties"].as_array().unwrap().len(), 12);
}
