use serde_json::Value;
use std::process::{Command, Output};

fn bic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bic")).args(args).env("SOURCE_DATE_EPOCH", "1700000000").output().unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn find_n3_antisymmetric_example() {
    let v = json(&bic(&["find", "--n", "3", "--d", "7", "--gamma", "0.01", "--sector", "a", "--emin", "1.0", "--emax", "1.3"]));
    assert!(v.get("manifest").is_some());
    let res = v["results"].as_array().unwrap();
    let e1 = (1.0 + (std::f64::consts::PI / 7.0).powi(2)).sqrt();
    let hits: Vec<&Value> = res.iter().filter(|s| (s["energy"].as_f64().unwrap() - e1).abs() <= 1e-10).collect();
    assert_eq!(hits.len(), 1, "{res:?}");
    assert_eq!(v["manifest"]["command"], "find");
}

#[test]
fn find_below_threshold_is_usage_error() {
    let out = bic(&["find", "--n", "3", "--d", "7", "--gamma", "0.01", "--emin", "0.5", "--emax", "0.9"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("continuum threshold"));
}

#[test]
fn bad_flags_exit_with_usage_status() {
    assert_eq!(bic(&["find", "--n", "3"]).status.code(), Some(2));
    assert_eq!(bic(&["nope"]).status.code(), Some(2));
    assert_eq!(bic(&["poles", "--n", "3", "--d", "2", "--gamma", "0.01", "--eps-min", "1.1", "--eps-max", "1.2", "--sheet", "I"]).status.code(), Some(2));
}

#[test]
fn critical_n4() {
    let v = json(&bic(&["critical", "--n", "4", "--gamma", "0.01"]));
    let dc = v["results"]["d_c"].as_f64().unwrap();
    assert!((dc - 0.052).abs() <= 0.005, "{dc}");
}

#[test]
fn csv_is_deterministic_with_units_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let args = |name: &str| {
        let p = dir.path().join(name);
        vec!["lines", "--n", "3", "--gamma", "0.01", "--dmin", "2", "--dmax", "4", "--emax", "1.5", "--steps", "20", "--out"]
            .into_iter()
            .map(String::from)
            .chain([p.to_string_lossy().into_owned()])
            .collect::<Vec<_>>()
    };
    for name in ["a.csv", "b.csv"] {
        let a = args(name);
        let out = bic(&a.iter().map(|s| s.as_str()).collect::<Vec<_>>());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    let b = std::fs::read(dir.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(!text.contains('\r'));
    let header = text.lines().next().unwrap();
    assert!(header.starts_with("d [1/m],E [m],sector,nu"));
    assert!(text.lines().count() > 1);
    let side: Value = serde_json::from_slice(&std::fs::read(dir.path().join("a.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(side["command"], "lines");
    let side_b = std::fs::read(dir.path().join("b.csv.manifest.json")).unwrap();
    assert_eq!(std::fs::read(dir.path().join("a.csv.manifest.json")).unwrap(), side_b);
}

#[test]
fn field_of_found_state() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("find.json");
    let out = bic(&["find", "--n", "3", "--d", "7", "--gamma", "0.01", "--sector", "a", "--emin", "1.0", "--emax", "1.3", "--out", state.to_str().unwrap()]);
    assert!(out.status.success());
    let out = bic(&["field", "--state", state.to_str().unwrap(), "--xmin", "-3", "--xmax", "17", "--points", "11"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x [1/m],Re xi [m^(1/2)],Im xi [m^(1/2)],|xi|^2 [m]");
    assert_eq!(lines.count(), 11);
}

#[test]
fn prob_and_resonant_eps_documents() {
    let v = json(&bic(&["prob", "--n", "3", "--class", "n3-a", "--nu", "1", "--d", "7", "--gamma", "0.01"]));
    let r = &v["results"];
    assert!((r["p_exact"].as_f64().unwrap() - r["p_approx"].as_f64().unwrap()).abs() < 2.5e-2);
    let v = json(&bic(&["resonant-eps", "--n", "3", "--nu", "1", "--d", "7", "--gamma", "0.01"]));
    assert!(v["results"].as_array().is_some_and(|a| !a.is_empty()));
    assert_eq!(bic(&["prob", "--n", "4", "--class", "n3-a", "--nu", "1", "--d", "7", "--gamma", "0.01"]).status.code(), Some(2));
}

#[test]
fn poles_and_oracle_run() {
    let out = bic(&["poles", "--n", "3", "--d", "15", "--gamma", "0.000628", "--eps-min", "1.1", "--eps-max", "1.2", "--sheet", "II", "--steps", "10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("epsilon [m],Re z [m],Im z [m],sector,branch\n"));
    // 3 branches × 11 values
    assert_eq!(text.lines().count(), 1 + 33);
    let v = json(&bic(&["oracle", "--n", "3", "--d", "2", "--gamma", "0.05", "--epsilon", "1.2", "--L", "40", "--modes", "160", "--emax", "1.3"]));
    assert!(v["results"].is_array());
}
