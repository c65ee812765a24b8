use std::fs;
use std::path::Path;
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;

const WORKED_EXAMPLE: &str = r#"["z2^2 + z3^2 - z1^2 - 1", "z3^2 + z2*z3 - 2*z2^2 + z1*z3 - z1*z2 + 1"]"#;

fn run(cmd: &str, dir: &Path, spec: &str, extra: &[&str]) -> (i32, String) {
    let path = dir.join("spec.json");
    fs::write(&path, spec).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_curvecap"))
        .arg(cmd)
        .arg("--spec")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn read_json(dir: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("out").join(name)).unwrap()).unwrap()
}

/// Line over `n + 2` roots of unity: Fekete sets drop one root, so
/// `d_n = (n + 2)^{1/(n+1)}` while `τ = 1`.
fn line_spec(n: u32, gap: f64) -> String {
    format!(
        r#"{{"nvars": 2, "generators": ["z2 - z1"],
            "sampling": {{"circle": {{"radius": "1", "count": {}}}}},
            "analysis": {{"s_max": {n}, "n_max": {n}, "passes": 2, "tolerances": {{"gap": {gap}}}}}}}"#,
        n + 2
    )
}

fn line_gap(n: u32) -> f64 {
    ((n + 2) as f64).ln() / (n + 1) as f64
}

#[test]
fn analyze_worked_example_has_exact_matrix() {
    let dir = TempDir::new().unwrap();
    let spec = format!(r#"{{"nvars": 3, "generators": {WORKED_EXAMPLE}}}"#);
    let (code, err) = run("analyze", dir.path(), &spec, &[]);
    assert_eq!(code, 0, "{err}");
    let r = read_json(dir.path(), "analyze.json");
    assert_eq!(r["d"], 4);
    assert_eq!(r["n0"], 2);
    let z2 = &r["mul_matrices"][1];
    assert_eq!(z2["variable"], "z2");
    let want = [["0", "0", "-1", "-1/10"], ["1", "0", "1", "3/5"], ["0", "0", "-1", "-1/10"], ["0", "1", "3", "1/5"]];
    assert_eq!(z2["rows"], serde_json::to_value(want).unwrap());
    assert_eq!(r["infinity_points"].as_array().unwrap().len(), 4);
}

#[test]
fn analyze_line_has_one_direction() {
    let dir = TempDir::new().unwrap();
    let (code, err) = run("analyze", dir.path(), r#"{"nvars": 2, "generators": ["z2 - z1"]}"#, &[]);
    assert_eq!(code, 0, "{err}");
    let r = read_json(dir.path(), "analyze.json");
    assert_eq!(r["d"], 1);
    assert_eq!(r["infinity_points"].as_array().unwrap().len(), 1);
}

#[test]
fn unit_ideal_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let (code, _) = run("analyze", dir.path(), r#"{"nvars": 2, "generators": ["1"]}"#, &[]);
    assert_eq!(code, 1);
    let e = read_json(dir.path(), "error.json");
    assert_eq!(e["exit_code"], 1);
    assert!(e["message"].as_str().unwrap().contains("empty"), "{e}");
}

#[test]
fn unknown_key_is_rejected_before_computation() {
    let dir = TempDir::new().unwrap();
    let (code, err) = run("analyze", dir.path(), r#"{"nvars": 2, "generators": ["z2 - z1"], "colour": 1}"#, &[]);
    assert_eq!(code, 1);
    assert!(err.contains("colour"), "{err}");
    assert!(!dir.path().join("out").join("analyze.json").exists());
}

#[test]
fn cheb_below_minimum_degree_names_it() {
    let dir = TempDir::new().unwrap();
    let spec = format!(
        r#"{{"nvars": 3, "generators": {WORKED_EXAMPLE},
             "sampling": {{"circle": {{"radius": "2", "count": 8}}}}, "analysis": {{"s_max": 1}}}}"#
    );
    let (code, err) = run("cheb", dir.path(), &spec, &[]);
    assert_eq!(code, 1);
    assert!(err.contains("a = 2"), "{err}");
}

#[test]
fn verify_line_matches_the_analytic_gap() {
    let n = 20;
    let want = line_gap(n);
    for (tol, expect) in [(want + 5e-3, 0), (want - 5e-3, 3)] {
        let dir = TempDir::new().unwrap();
        let (code, err) = run("verify", dir.path(), &line_spec(n, tol), &[]);
        assert_eq!(code, expect, "{err}");
        let v = &read_json(dir.path(), "verify.json")["verdict"];
        assert!((v["gap"].as_f64().unwrap() - want).abs() < 1e-9, "{v}");
        assert_eq!(v["pass"], expect == 0);
    }
}

/// The 2% tolerance needs `ln(n + 2)/(n + 1) ≤ 0.02`, so `n ≈ 300`: about eleven
/// minutes in release.
#[test]
#[ignore]
fn verify_line_within_two_percent() {
    let dir = TempDir::new().unwrap();
    let (code, err) = run("verify", dir.path(), &line_spec(300, 0.02), &[]);
    assert_eq!(code, 0, "{err}");
}

#[test]
fn verify_absurd_tolerance_exits_3_with_report() {
    let dir = TempDir::new().unwrap();
    let (code, _) = run("verify", dir.path(), &line_spec(6, 1e-9), &[]);
    assert_eq!(code, 3);
    let v = read_json(dir.path(), "verify.json");
    assert_eq!(v["verdict"]["pass"], false);
    assert!(dir.path().join("out").join("fekete.csv").exists());
}

#[test]
fn single_thread_output_is_byte_identical() {
    let spec = r#"{"nvars": 2, "generators": ["z2^2 - z1^2 - 1"],
                   "sampling": {"circle": {"radius": "1", "count": 16}},
                   "analysis": {"s_max": 5, "n_max": 5, "passes": 2}}"#;
    let csv = |extra: &[&str]| {
        let dir = TempDir::new().unwrap();
        for cmd in ["cheb", "fekete"] {
            let (code, err) = run(cmd, dir.path(), spec, extra);
            assert_eq!(code, 0, "{err}");
        }
        let out = dir.path().join("out");
        (fs::read(out.join("cheb.csv")).unwrap(), fs::read(out.join("fekete.csv")).unwrap())
    };
    assert_eq!(csv(&["--threads", "1"]), csv(&[]));
    assert_eq!(csv(&["--threads", "1"]), csv(&["--threads", "3"]));
}

#[test]
fn rows_carry_tolerances_and_seed() {
    let dir = TempDir::new().unwrap();
    let spec = r#"{"nvars": 2, "generators": ["z2 - z1"],
                   "sampling": {"circle": {"radius": "1", "count": 8}}, "analysis": {"s_max": 3}}"#;
    let (code, err) = run("cheb", dir.path(), spec, &["--seed", "7"]);
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(dir.path().join("out").join("cheb.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().ends_with(",tol,max_iters,seed"));
    for line in lines {
        assert!(line.ends_with(",7"), "{line}");
    }
}

#[test]
fn transform_identity_has_zero_gaps() {
    let dir = TempDir::new().unwrap();
    let spec = r#"{"nvars": 2, "generators": ["z2^2 - z1^2 - 1"],
                   "sampling": {"circle": {"radius": "1", "count": 16}},
                   "analysis": {"s_max": 4, "n_max": 4, "passes": 2,
                                "transform": {"matrix": [["1", "0"], ["0", "1"]], "shift": ["0", "0"]}}}"#;
    let (code, err) = run("transform", dir.path(), spec, &[]);
    assert_eq!(code, 0, "{err}");
    let r = read_json(dir.path(), "transform.json");
    for row in r["chebyshev"]["rows"].as_array().unwrap() {
        assert_eq!(row["rel_gap"].as_f64().unwrap(), 0.0, "{row}");
    }
    assert_eq!(r["diameter"]["rel_gap"].as_f64().unwrap(), 0.0);
}
