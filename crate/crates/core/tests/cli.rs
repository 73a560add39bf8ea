use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn curvekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_curvekit"))
        .args(args)
        .env_remove("CURVEKIT_DATA")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json_lines(out: &Output) -> Vec<Value> {
    stdout(out).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn info_reports_cp2_and_rp3() {
    let out = curvekit(&["info", "--builtin", "cp2"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("f-vector: (9,36,84,90,36)"));
    assert!(text.contains("chi: 3"));

    let out = curvekit(&["info", "--builtin", "rp3", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["betti"], serde_json::json!([1, 0, 0, 1]));
}

#[test]
fn info_on_degenerate_files() {
    let out = curvekit(&["info", "--file", fixture("empty.facets").to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("f-vector: ()"));

    let out = curvekit(&["info", "--file", fixture("bad.facets").to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn curvature_value_multiset() {
    let out = curvekit(&["curvature", "--builtin", "homology_sphere", "-k", "3"]);
    assert!(out.status.success());
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for line in stdout(&out).lines().skip(1).filter(|l| !l.starts_with('#')) {
        *counts.entry(line.split(';').nth(1).unwrap().to_string()).or_default() += 1;
    }
    let keys: Vec<&str> = counts.keys().map(String::as_str).collect();
    assert_eq!(keys, ["-1/40", "-1/90", "0/1", "7/180"]);
    assert_eq!(counts.values().sum::<usize>(), 130);
    assert!(stdout(&out).contains("# sum=0/1 chi=0"));
}

#[test]
fn curvature_json_and_wave() {
    let out = curvekit(&["curvature", "--builtin", "cp2", "-k", "0", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let values = v["values"].as_array().unwrap();
    assert_eq!(values.len(), 9);
    assert!(values.iter().all(|x| x["value"] == "1/3"));

    let out = curvekit(&["curvature", "--builtin", "cross4", "-k", "2", "-t", "0", "--format", "json"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["values"].as_array().unwrap().iter().all(|x| x["value"].as_f64().unwrap().abs() < 1e-10));
    assert!(v["abs_error"].as_f64().unwrap() < 1e-9);
}

#[test]
fn curvature_reports_cover_violation() {
    let path = fixture("two-triangles-bridge.facets");
    let out = curvekit(&["curvature", "--file", path.to_str().unwrap(), "-k", "2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("(3,4)"));
}

#[test]
fn check_passes_on_manifolds() {
    for name in ["rp3", "cross4"] {
        let out = curvekit(&["check", "--builtin", name]);
        assert!(out.status.success(), "{name}");
        let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
        assert_eq!(v["ok"], true);
        assert!(v["checks"].as_array().unwrap().iter().all(|c| c["status"] != "fail"));
    }
}

#[test]
fn check_records_cover_violation() {
    let path = fixture("two-triangles-bridge.facets");
    let out = curvekit(&["check", "--file", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let checks = v["checks"].as_array().unwrap();
    let status = |name: &str| checks.iter().find(|c| c["name"] == name).unwrap()["status"].clone();
    assert_eq!(status("gauss_bonnet_k2"), "skipped");
    assert_eq!(status("gauss_bonnet_k1"), "pass");
    assert_eq!(status("poincare_hopf_k2"), "skipped");
    assert_eq!(status("euler_poincare"), "pass");
}

#[test]
fn sample_is_deterministic() {
    let args = ["sample", "--builtin", "cross4", "-k", "1", "-n", "2000", "--seed", "7"];
    let a = curvekit(&args);
    let b = curvekit(&args);
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    let mean = v["mean"].as_array().unwrap();
    let se = v["stderr"].as_array().unwrap();
    assert_eq!(mean.len(), 24);
    for (m, s) in mean.iter().zip(se) {
        assert!(m.as_f64().unwrap().abs() <= 5.0 * s.as_f64().unwrap());
    }
    assert!(v["exact"].as_array().unwrap().iter().all(|e| e == "0/1"));
}

#[test]
fn deform_qr_causal_choice() {
    let out = curvekit(&["deform", "--builtin", "cross4", "--method", "qr", "--g", "log", "--c", "0.05", "--t", "0,1,2"]);
    assert!(out.status.success());
    let rows = json_lines(&out);
    assert_eq!(rows.len(), 3);
    for r in &rows {
        assert!(r["eig_drift"].as_f64().unwrap() < 1e-8);
        assert!(r["offdiag_pattern_ok"].is_boolean());
    }
    assert_eq!(rows[0]["offdiag_pattern_ok"], true);
}

#[test]
fn deform_ode_and_wave() {
    let out = curvekit(&["deform", "--builtin", "cycle4", "--method", "ode", "--c-imag", "0.5", "--t", "0.25,0.5"]);
    assert!(out.status.success());
    let rows = json_lines(&out);
    assert!(rows.iter().all(|r| r["eig_drift"].as_f64().unwrap() < 1e-6));
    assert!(rows[1]["max_imaginary"].as_f64().unwrap() > 0.0);

    let out = curvekit(&["deform", "--builtin", "16cell", "--method", "wave", "-k", "1", "--t", "0.5,1,1.5"]);
    for r in json_lines(&out) {
        assert!(r["sum_K"].as_f64().unwrap().abs() < 1e-9);
    }
}

#[test]
fn deform_rejects_empty_grid() {
    let out = curvekit(&["deform", "--builtin", "cross4", "--t", ""]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn index_with_user_function() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("g.json");
    std::fs::write(&f, r#"{"1": 0.1, "2": 0.5, "3": 0.9, "4": 0.3}"#).unwrap();
    let path = fixture("triangle-tail.json");
    let out = curvekit(&["index", "--file", path.to_str().unwrap(), "-k", "0", "--function", f.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["sum"], 1);
    assert_eq!(v["function"], "user");
}

#[test]
fn matrix_dump_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("d.csv");
    let out = curvekit(&["matrix", "--builtin", "triangle", "dirac", "-o", target.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&target).unwrap();
    assert!(text.starts_with("# dirac n=7"));
    assert_eq!(text.lines().count(), 8);
    assert!(!dir.path().join("d.csv.tmp").exists());
}

#[test]
fn input_source_is_required_and_exclusive() {
    assert_eq!(curvekit(&["info"]).status.code(), Some(2));
    let path = fixture("empty.facets");
    assert_eq!(
        curvekit(&["info", "--builtin", "cp2", "--file", path.to_str().unwrap()]).status.code(),
        Some(2)
    );
    let out = curvekit(&["info", "--builtin", "nonsense"]);
    assert!(!out.status.success());
}
