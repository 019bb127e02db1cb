use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn golden() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

fn run_in(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_adhmkit"));
    cmd.current_dir(dir).args(args).env_remove("ADHMKIT_TOL");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("spawn adhmkit")
}

fn run(args: &[&str]) -> Output {
    run_in(&golden(), args, &[])
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

fn complex(v: &Value) -> (f64, f64) {
    match v {
        Value::Array(p) => (p[0].as_f64().unwrap(), p[1].as_f64().unwrap()),
        other => (other.as_f64().unwrap(), 0.0),
    }
}

fn scalar_entry(m: &Value) -> (f64, f64) {
    complex(&m[0][0])
}

fn close(a: (f64, f64), b: (f64, f64)) -> bool {
    (a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12
}

#[test]
fn exit_code_manifest() {
    let text = std::fs::read_to_string(golden().join("exit_codes.json")).unwrap();
    let cases: Vec<Value> = serde_json::from_str(&text).unwrap();
    let mut bad = Vec::new();
    for case in &cases {
        let args: Vec<&str> = case["args"]
            .as_array()
            .unwrap()
            .iter()
            .map(|a| a.as_str().unwrap())
            .collect();
        let expected = case["exit"].as_i64().unwrap() as i32;
        let out = run(&args);
        let code = out.status.code().unwrap_or(-1);
        if code != expected {
            bad.push(format!("{args:?}: expected {expected}, got {code}"));
        }
        if code == 2 {
            let err = stderr_json(&out);
            for key in ["error", "path", "detail"] {
                assert!(err.get(key).is_some(), "{args:?} stderr lacks {key}");
            }
        }
    }
    assert!(bad.is_empty(), "exit code mismatches:\n{}", bad.join("\n"));
}

#[test]
fn scalar_plane_transition() {
    let out = run(&[
        "transition", "plane_scalar.json", "--m", "1", "--l", "0", "--n", "1", "--cbase", "1",
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    assert!(close(scalar_entry(&v["b1"]), (-0.5, 0.0)));
    assert!(close(scalar_entry(&v["b2"]), (-10.0, 0.0)));
    assert!(close(complex(&v["e"][0]), (7.0, 0.0)));
}

#[test]
fn identity_transition_round_trips_bits() {
    let input: Value =
        serde_json::from_str(&std::fs::read_to_string(golden().join("plane_seed42_c3.json")).unwrap())
            .unwrap();
    let out = run(&[
        "transition-plane", "plane_seed42_c3.json", "--m", "1", "--l", "1", "--n", "2", "--cbase", "3",
    ]);
    assert!(out.status.success());
    let v = stdout_json(&out);
    for key in ["b1", "b2", "e"] {
        assert_eq!(v[key], input[key], "{key} changed");
    }
}

#[test]
fn transition_there_and_back() {
    let dir = tempfile::tempdir().unwrap();
    let mid = dir.path().join("mid.json");
    let back = dir.path().join("back.json");
    let src = golden().join("plane_seed42_c3.json");
    let out = run(&[
        "--out", mid.to_str().unwrap(), "transition-plane", src.to_str().unwrap(),
        "--m", "0", "--l", "2", "--n", "2", "--cbase", "3",
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let out = run(&[
        "--out", back.to_str().unwrap(), "transition-plane", mid.to_str().unwrap(),
        "--m", "2", "--l", "0", "--n", "2", "--cbase", "3",
    ]);
    assert!(out.status.success());
    let a: Value = serde_json::from_str(&std::fs::read_to_string(&src).unwrap()).unwrap();
    let b: Value = serde_json::from_str(&std::fs::read_to_string(&back).unwrap()).unwrap();
    for key in ["b1", "b2"] {
        for (ra, rb) in a[key].as_array().unwrap().iter().zip(b[key].as_array().unwrap()) {
            for (x, y) in ra.as_array().unwrap().iter().zip(rb.as_array().unwrap()) {
                let (x, y) = (complex(x), complex(y));
                assert!((x.0 - y.0).hypot(x.1 - y.1) < 1e-9, "{key}: {x:?} vs {y:?}");
            }
        }
    }
}

#[test]
fn stdin_input() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_adhmkit"))
        .args(["validate", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let text = std::fs::read(golden().join("hirz_scalar.json")).unwrap();
    child.stdin.take().unwrap().write_all(&text).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["verdict"], "pass");
}

#[test]
fn validation_report_shape() {
    let out = run(&["validate", "hirz_p1_fail.json"]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    assert_eq!(v["verdict"], "fail");
    let checks = v["checks"].as_array().unwrap();
    assert!(checks
        .iter()
        .any(|c| c["name"].as_str().unwrap().starts_with("P1") && c["verdict"] == "fail"));
    let p3 = checks.iter().find(|c| c["name"] == "P3").unwrap();
    assert_eq!(p3["verdict"], "indeterminate");
}

#[test]
fn malformed_input_is_reported() {
    let out = run(&["validate", "malformed.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err = stderr_json(&out);
    assert_eq!(err["error"], "parse");
    assert_eq!(err["path"], "malformed.json");
}

#[test]
fn bad_tolerance_env_rejected() {
    let out = run_in(&golden(), &["validate", "hirz_scalar.json"], &[("ADHMKIT_TOL", "eq=banana")]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"], "tolerance");
}

#[test]
fn tolerance_flags_are_applied() {
    let out = run(&["validate", "hirz_seed7_n2_c3.json"]);
    assert_eq!(out.status.code(), Some(0));
    let out = run(&["--tol.eq", "1e-20", "validate", "hirz_seed7_n2_c3.json"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run_in(&golden(), &["validate", "hirz_seed7_n2_c3.json"], &[("ADHMKIT_TOL", "eq=1e-20")]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(&["--tol.eq", "-1", "validate", "hirz_scalar.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn orbit_equality() {
    let out = run(&["orbit-equal", "hirz_seed7_n2_c3.json", "hirz_seed7_n2_c3.json"]);
    assert_eq!(stdout_json(&out)["equal"], true);
    let out = run(&["orbit-equal", "hirz_seed7_n2_c3.json", "hirz_seed11_n2_c3.json"]);
    assert_eq!(stdout_json(&out)["equal"], false);
}

#[test]
fn sigma_rotation_by_right_angle() {
    let out = run(&["sigma", "--h", "2", "--m", "1", "--cbase", "1"]);
    let v = stdout_json(&out);
    let rows: Vec<Vec<f64>> = v["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect())
        .collect();
    let expected = [[0.0, 0.0, 1.0], [0.0, -1.0, 0.0], [1.0, 0.0, 0.0]];
    for (r, e) in rows.iter().zip(expected) {
        for (x, y) in r.iter().zip(e) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}

#[test]
fn dimension_counts() {
    let v = stdout_json(&run(&["jacobian-dim", "hirz_seed7_n2_c3.json"]));
    assert_eq!(v["nullity"], 24);
    assert_eq!(v["quotient_dim"], 6);
    let v = stdout_json(&run(&["syst-rank", "hirz_seed7_n2_c3.json"]));
    assert_eq!(v["rank"], v["expected"]);
    assert_eq!(v["rank"], 9);
}

#[test]
fn c1_maps() {
    let v = stdout_json(&run(&["c1-from-ytilde", "ytilde_n2.json", "--n", "2"]));
    assert_eq!(v["n"], 2);
    assert!(close(scalar_entry(&v["A1"]), (1.0, 0.0)));
    assert!(close(scalar_entry(&v["A2"]), (2.0, 0.0)));
    assert!(close(scalar_entry(&v["C"][0]), (2.0, 0.0)));
    assert!(close(scalar_entry(&v["C"][1]), (1.0, 0.0)));
    assert!(close(complex(&v["e"][0]), (1.0, 0.0)));

    let v = stdout_json(&run(&["c1-to-tot", "hirz_scalar.json"]));
    assert!(close(complex(&v["y1"]), (2.0, 0.0)));
    assert!(close(complex(&v["y2"]), (1.0, 0.0)));
    assert!(close(complex(&v["u1"]), (3.0, 0.0)));
    assert!(close(complex(&v["u2"]), (12.0, 0.0)));
}

#[test]
fn support_of_diagonal_point() {
    let v = stdout_json(&run(&["support", "hirz_diagonal.json"]));
    let text = v.to_string();
    assert!(v.get("base").is_some(), "{text}");
    let base = v["base"].as_array().unwrap();
    assert_eq!(base.len(), 2);
}

#[test]
fn generated_points_validate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("gen.json");
    let out = run(&[
        "--out", path.to_str().unwrap(), "generate", "--kind", "hirz", "--seed", "3", "--n", "3", "--c", "2",
    ]);
    assert!(out.status.success());
    let out = run(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn small_property_run() {
    let out = run(&["property-run", "--samples", "3", "--max-n", "2", "--max-c", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = stdout_json(&out);
    assert!(v.is_object() || v.is_array());
}
