//! The `masslab` binary end to end: exit codes, outputs, determinism and
//! report comparison.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const FLAT: &str = r#"{
    "name": "flat-smoke",
    "metric": {"kind": "flat"},
    "domain": {"half_extent": 4, "spacing": 0.5},
    "analysis": ["mass", "bound", "levelsets"],
    "levelsets": {"settings": {"levels": 8}},
    "output": {"meshes": [0.5]}
}"#;

fn masslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_masslab")).args(args).env("MASSLAB_JOBS", "1").output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn reports(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.to_string_lossy().ends_with(".report.json"))
        .collect();
    v.sort();
    v
}

fn load(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn flat_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "flat.json", FLAT);
    let out = masslab(&["run", cfg.to_str().unwrap(), "--force"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for suffix in ["report.json", "mass.csv", "bound.csv", "levels.csv", "0.5.off"] {
        assert!(dir.path().join(format!("flat.{suffix}")).exists(), "{suffix}");
    }
    let r = load(&dir.path().join("flat.report.json"));
    assert_eq!(r["schema_version"], masslab::config::SCHEMA_VERSION);
    assert_eq!(r["config"]["domain"]["spacing"], 0.5);
    assert!(r["mass"]["mass_estimate"].as_f64().unwrap().abs() < 1e-10);
    assert!(r["bound"]["stern"]["integral"]["bound"].as_f64().unwrap().abs() < 1e-10);
    assert_eq!(r["passed"], true);
    let off = fs::read_to_string(dir.path().join("flat.0.5.off")).unwrap();
    assert!(off.starts_with("OFF"));
}

#[test]
fn spacing_not_dividing_extent_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", &FLAT.replace("\"spacing\": 0.5", "\"spacing\": 0.3"));
    let out = masslab(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("domain.spacing"));
    assert!(reports(dir.path()).is_empty());
}

#[test]
fn solver_cap_is_non_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let text = FLAT
        .replace("{\"kind\": \"flat\"}", "{\"kind\": \"smeared_mass\", \"mass\": 1, \"width\": 1}")
        .replace("\"analysis\"", "\"solver\": {\"max_iter\": 2}, \"analysis\"");
    let cfg = write_config(dir.path(), "cap.json", &text);
    let out = masslab(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn failed_check_exits_3_and_names_it() {
    let dir = tempfile::tempdir().unwrap();
    // sphere and cylinder routes agree to 1e-3, not to 1e-12
    let text = FLAT
        .replace("{\"kind\": \"flat\"}", "{\"kind\": \"schwarzschild\", \"mass\": 1}")
        .replace(
            "\"half_extent\": 4, \"spacing\": 0.5}",
            "\"half_extent\": 8, \"spacing\": 0.5, \"excision_radius\": 1}",
        )
        .replace("[\"mass\", \"bound\", \"levelsets\"]", "[\"mass\"]")
        .replace("\"output\": {\"meshes\": [0.5]}", "\"mass\": {\"route_tolerance\": 1e-12}");
    let cfg = write_config(dir.path(), "strict.json", &text);
    let out = masslab(&["run", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mass.routes"));
    // the report is still written
    assert_eq!(reports(dir.path()).len(), 1);
}

#[test]
fn reruns_are_byte_identical_and_never_overwrite() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "flat.json", FLAT);
    let first = masslab(&["run", cfg.to_str().unwrap()]);
    let second = masslab(&["run", cfg.to_str().unwrap()]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(second.status.code(), Some(0));
    let files = reports(dir.path());
    assert_eq!(files.len(), 2, "{files:?}");
    assert_eq!(fs::read(&files[0]).unwrap(), fs::read(&files[1]).unwrap());

    let forced = masslab(&["run", cfg.to_str().unwrap(), "--force", "--jobs", "2"]);
    assert_eq!(forced.status.code(), Some(0));
    assert_eq!(fs::read(dir.path().join("flat.report.json")).unwrap(), fs::read(&files[0]).unwrap());
}

#[test]
fn compare_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "flat.json", FLAT);
    assert_eq!(masslab(&["run", cfg.to_str().unwrap(), "--force"]).status.code(), Some(0));
    let report = dir.path().join("flat.report.json");
    let tol = write_config(dir.path(), "tol.json", r#"{"default": 0.0}"#);
    let out = masslab(&["compare", report.to_str().unwrap(), report.to_str().unwrap(), "--tol", tol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 differ"));

    let mut other = load(&report);
    other["mass"]["mass_estimate"] = Value::from(0.5);
    let other_path = dir.path().join("other.json");
    fs::write(&other_path, serde_json::to_string(&other).unwrap()).unwrap();
    let out =
        masslab(&["compare", report.to_str().unwrap(), other_path.to_str().unwrap(), "--tol", tol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stdout).contains("mass.mass_estimate"));

    other["schema_version"] = Value::from("masslab-report/0");
    fs::write(&other_path, serde_json::to_string(&other).unwrap()).unwrap();
    let out =
        masslab(&["compare", report.to_str().unwrap(), other_path.to_str().unwrap(), "--tol", tol.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema"));
}

#[test]
fn refinement_pair_differs_consistently_with_second_order() {
    // B at h and h/2 from two runs; compare reports the gap, and Richardson
    // with p = 2 must move the fine value by a third of it
    let dir = tempfile::tempdir().unwrap();
    let base = r#"{
        "name": "refine",
        "metric": {"kind": "smeared_mass", "mass": 1, "width": 1},
        "domain": {"half_extent": 8, "spacing": H},
        "analysis": ["bound"],
        "bound": {"companion": false, "inequality": false, "stern": {"epsilon": 0.01}}
    }"#;
    let a = write_config(dir.path(), "a.json", &base.replace("H", "1.0"));
    let b = write_config(dir.path(), "b.json", &base.replace("H", "0.5"));
    for c in [&a, &b] {
        assert_eq!(masslab(&["run", c.to_str().unwrap(), "--force"]).status.code(), Some(0));
    }
    let tol =
        write_config(dir.path(), "tol.json", r#"{"rules": [{"pattern": "bound.stern.integral.bound", "tol": 0.2}]}"#);
    let out = masslab(&[
        "compare",
        dir.path().join("a.report.json").to_str().unwrap(),
        dir.path().join("b.report.json").to_str().unwrap(),
        "--tol",
        tol.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let ba = load(&dir.path().join("a.report.json"))["bound"]["stern"]["integral"]["bound"].as_f64().unwrap();
    let bb = load(&dir.path().join("b.report.json"))["bound"]["stern"]["integral"]["bound"].as_f64().unwrap();
    let extrapolated = masslab::fit::richardson(ba, bb, 2.0);
    assert!(((extrapolated - bb) - (bb - ba) / 3.0).abs() < 1e-12);
    assert!(bb > ba, "B grows as the grid resolves the Hessian: {ba} {bb}");
}

#[test]
fn schema_is_json() {
    let out = masslab(&["schema"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["properties"]["analysis"].is_object());
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut n = 0;
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.extension().is_some_and(|x| x == "json") {
            masslab::config::ExperimentConfig::load(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
            n += 1;
        }
    }
    assert!(n >= 3);
}

#[test]
fn schwarzschild_full_config() {
    let src = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/schwarzschild-full.json");
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(src).unwrap().replace("\"directory\": \"out\"", "\"directory\": \".\"");
    let cfg = write_config(dir.path(), "full.json", &text);
    let out = masslab(&["run", cfg.to_str().unwrap(), "--force"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = load(&dir.path().join("full.report.json"));
    let m = r["mass"]["mass_estimate"].as_f64().unwrap();
    assert!((m - 1.0).abs() < 0.01, "{m}");
    assert!(r["identities"].as_array().unwrap().len() == 4);
}
