use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nilwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nilwalk")).args(args).output().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

const SKEWED: [&str; 12] = [
    "--alpha", "0.5", "--beta", "0.3", "--gamma", "0.2", "--alpha-prime", "0.2", "--beta-prime", "0.3",
    "--gamma-prime", "0.5",
];

const HEX_SPEC: &str = r#"{
  "algebra": "heisenberg",
  "vertices": ["x", "y"],
  "edge_pairs": [
    {"o": "x", "t": "y", "voltage": [1, 0, 0], "p": 0.5, "p_rev": 0.2},
    {"o": "x", "t": "y", "voltage": [0, 0, 0], "p": 0.3, "p_rev": 0.3},
    {"o": "x", "t": "y", "voltage": [0, 1, 0], "p": 0.2, "p_rev": 0.5}
  ]
}"#;

#[test]
fn analyze_uniform_hex_is_centred() {
    let v = stdout_json(&nilwalk(&["analyze", "--preset", "hex"]));
    assert!(floats(&v["gamma_p"]).iter().all(|g| *g == 0.0));
    assert!(floats(&v["rho"]).iter().all(|g| *g == 0.0));
    assert!(floats(&v["beta"]).iter().all(|b| b.abs() < 1e-15));
    assert_eq!(floats(&v["invariant_measure"]), vec![0.5, 0.5]);
}

#[test]
fn analyze_skewed_hex_and_graph_file_agree() {
    let mut args = vec!["analyze", "--preset", "hex"];
    args.extend(SKEWED);
    let preset = stdout_json(&nilwalk(&args));
    let rho = floats(&preset["rho"]);
    assert!((rho[0] - 0.15).abs() < 1e-14 && (rho[1] + 0.15).abs() < 1e-14);

    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("hex.json");
    std::fs::write(&spec, HEX_SPEC).unwrap();
    let out = dir.path().join("an");
    let file = stdout_json(&nilwalk(&["analyze", "--graph", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]));
    assert_eq!(preset["gram"], file["gram"]);
    assert_eq!(preset["rho"], file["rho"]);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(out.join("analysis.json")).unwrap()).unwrap();
    assert_eq!(written, file);
}

#[test]
fn malformed_spec_reports_json_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.json");
    std::fs::write(&spec, HEX_SPEC.replace("\"p\": 0.5", "\"p\": 0.9")).unwrap();
    let out = nilwalk(&["analyze", "--graph", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "validation");
    assert!(err["message"].as_str().unwrap().contains("stochasticity"));

    std::fs::write(&spec, "{ not json").unwrap();
    let out = nilwalk(&["analyze", "--graph", spec.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "parse");
}

#[test]
fn usage_errors_and_version() {
    let out = nilwalk(&["simulate", "walk", "--n", "x"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "usage");
    let out = nilwalk(&["--version"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains(env!("CARGO_PKG_VERSION")));
}

fn walk(dir: &Path, extra: &[&str]) -> Vec<u8> {
    let mut args = vec!["simulate", "walk", "--preset", "hex", "--out", dir.to_str().unwrap()];
    args.extend(extra);
    let out = nilwalk(&args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    std::fs::read(dir.join("walk.csv")).unwrap()
}

#[test]
fn walk_output_is_reproducible_and_sized() {
    let dir = tempfile::tempdir().unwrap();
    let a = walk(dir.path(), &["--n", "4", "--paths", "2", "--seed", "9"]);
    let b = walk(dir.path(), &["--n", "4", "--paths", "2", "--seed", "9", "--workers", "2"]);
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 2);
    assert!(dir.path().join("walk.json").exists());
    let c = walk(dir.path(), &["--n", "4", "--paths", "2", "--seed", "10"]);
    assert_ne!(text.as_bytes(), c.as_slice());
}

#[test]
fn off_grid_time_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = nilwalk(&["simulate", "walk", "--preset", "hex", "--n", "3", "--paths", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "time_not_on_grid");
}

#[test]
fn compare_with_itself_and_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let mut args = vec!["simulate", "sde", "--preset", "hex", "--steps", "8", "--paths", "50", "--grid", "k/8", "--out", d];
    args.extend(SKEWED);
    assert!(nilwalk(&args).status.success());
    let sde = dir.path().join("sde.csv");
    let rep_dir = dir.path().join("rep");
    let r = stdout_json(&nilwalk(&[
        "compare",
        sde.to_str().unwrap(),
        sde.to_str().unwrap(),
        "--out",
        rep_dir.to_str().unwrap(),
        "--fit-power",
        "4",
        "--ecdf",
    ]));
    assert_eq!(r["pass"], true);
    assert!(r["ks"].as_array().unwrap().iter().all(|k| k["distance"] == 0.0));
    assert!(rep_dir.join("report.json").exists() && rep_dir.join("ecdf.csv").exists());

    // Same sample file, sidecar rewritten for a different algebra.
    let other = dir.path().join("other.csv");
    std::fs::copy(&sde, &other).unwrap();
    let side = std::fs::read_to_string(dir.path().join("sde.json")).unwrap();
    let mut v: Value = serde_json::from_str(&side).unwrap();
    v["algebra"]["brackets"][0]["c"] = Value::from(2.0);
    std::fs::write(dir.path().join("other.json"), v.to_string()).unwrap();
    let out = nilwalk(&["compare", sde.to_str().unwrap(), other.to_str().unwrap(), "--out", d]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert!(err["message"].as_str().unwrap().contains("different algebras"));
}

#[test]
fn sde_frame_order_reaches_header() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let mut args = vec!["simulate", "sde", "--preset", "hex", "--steps", "4", "--paths", "3", "--frame-order", "2,1", "--out", d];
    args.extend(SKEWED);
    assert!(nilwalk(&args).status.success());
    let side: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("sde.json")).unwrap()).unwrap();
    let frame = &side["frame"];
    // Processing X2 first makes V2 parallel to X2.
    assert_eq!(frame[1][0].as_f64().unwrap(), 0.0);
    let drift = floats(&side["drift"]);
    assert!((drift[0] - 0.15).abs() < 1e-14);
}
