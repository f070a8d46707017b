use std::path::{Path, PathBuf};
use std::process::Command;

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_exeuler"))
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn read_csv(path: &Path) -> Vec<Vec<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines().skip(1).map(|l| l.split(',').map(|v| if v.is_empty() { f64::NAN } else { v.parse().unwrap() }).collect()).collect()
}

#[test]
fn quiescent_body_rows_are_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("q");
    let st = exe()
        .args(["run", "--scenario"])
        .arg(scenarios().join("quiescent.json"))
        .arg("--out")
        .arg(&out)
        .args(["--T", "1"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let rows = read_csv(&out.join("body.csv"));
    assert_eq!(rows.len(), 11);
    for r in rows {
        assert!(r[1..].iter().all(|&v| v == 0.0), "{r:?}");
    }
    let nd = std::fs::read_to_string(out.join("diagnostics.ndjson")).unwrap();
    assert_eq!(nd.lines().count(), 11);
    let rec: serde_json::Value = serde_json::from_str(nd.lines().next().unwrap()).unwrap();
    assert_eq!(rec["E0_grid"], 0.0);
    assert_eq!(rec["circulation_total"], 0.0);
}

#[test]
fn vortex_orbit_radius_drift() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("orbit");
    let st = exe()
        .args(["run", "--scenario"])
        .arg(scenarios().join("vortex_orbit.json"))
        .arg("--out")
        .arg(&out)
        .args(["--threads", "2"])
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    let header = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    let col = header.lines().next().unwrap().split(',').position(|c| c == "radius_drift").unwrap();
    let rows = read_csv(&out.join("diagnostics.csv"));
    assert_eq!(rows.len(), 101);
    let worst = rows.iter().map(|r| r[col]).fold(0.0, f64::max);
    assert!(worst < 1e-6, "{worst}");
    let particles = read_csv(&out.join("particles.csv"));
    assert_eq!(particles.len(), 101);
}

#[test]
fn malformed_json_is_input_error_without_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"shape\": {\"kind\": \"disk\", ").unwrap();
    let out = dir.path().join("out");
    let o = exe().args(["run", "--scenario"]).arg(&bad).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    assert!(!out.exists());
}

#[test]
fn nonuniform_blob_is_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("s.json");
    std::fs::write(
        &sc,
        r#"{"shape": {"kind": "disk", "radius": 1.0}, "m": 1, "J": 1, "dt": 0.01, "T": 1, "dump_every": 1,
            "vortices": [{"pos": [2, 0], "gamma": 1, "blob_delta": 0.1}, {"pos": [-2, 0], "gamma": 1, "blob_delta": 0.2}]}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let st = exe().args(["run", "--scenario"]).arg(&sc).arg("--out").arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(1));
    assert!(!out.exists());
}

#[test]
fn breakdown_exits_2_with_partial_output() {
    // body driven into a vortex with a step far too large for the approach
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("s.json");
    std::fs::write(
        &sc,
        r#"{"shape": {"kind": "disk", "radius": 1.0}, "m": 1, "J": 1, "ell0": [2, 0], "fixed": true,
            "vortices": [{"pos": [2.5, 0], "gamma": 0.1}], "dt": 1.0, "T": 10, "dump_every": 1}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = exe().args(["run", "--scenario"]).arg(&sc).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let nd = std::fs::read_to_string(out.join("diagnostics.ndjson")).unwrap();
    assert!(nd.lines().count() >= 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("boundary"));
}

#[test]
fn field_dumps_have_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let sc = dir.path().join("s.json");
    std::fs::write(
        &sc,
        r#"{"shape": {"kind": "ellipse", "semi_axes": [2, 1]}, "m": 1, "J": 1, "ell0": [0.5, 0],
            "vortices": [{"pos": [0, 2.5], "gamma": 1, "blob_delta": 0.1}], "dt": 0.01, "T": 0.05, "dump_every": 5,
            "grid": {"r_outer": 4, "n_r": 16, "n_t": 32}}"#,
    )
    .unwrap();
    let out = dir.path().join("out");
    assert_eq!(exe().args(["run", "--scenario"]).arg(&sc).arg("--out").arg(&out).status().unwrap().code(), Some(0));
    let head: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("fields_00000005.json")).unwrap()).unwrap();
    assert_eq!(head["endianness"], "little");
    assert_eq!(head["dtype"], "f64");
    assert_eq!(head["fields"].as_array().unwrap().len(), 4);
    let bin = std::fs::read(out.join("fields_00000005.bin")).unwrap();
    assert_eq!(bin.len(), 4 * 17 * 32 * 8);
    // first node: inner ring, angle 0, i.e. the body boundary point (2, 0)
    let x = f64::from_le_bytes(bin[0..8].try_into().unwrap());
    assert!((x - 2.0).abs() < 1e-12, "{x}");
}

#[test]
fn measure_emits_ndjson() {
    let o = exe().args(["measure", "poisson1"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<serde_json::Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(rows.len(), 4);
    for r in &rows[..3] {
        assert_eq!(r["estimate_id"], "poisson1");
        assert!(r["ratio"].as_f64().unwrap().is_finite());
    }
    assert!(rows[3]["ratio"].as_f64().unwrap() < 1e-10);
    let o = exe().args(["measure", "bkm"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 4);
}

#[test]
fn validate_exit_codes() {
    let o = exe().args(["validate", "conformal"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("Cauchy-Riemann"));
    assert_eq!(exe().args(["validate", "nonsense"]).output().unwrap().status.code(), Some(1));
}

#[test]
fn threads_from_environment() {
    let o = exe().env("EXEULER_THREADS", "1").args(["validate", "added_mass"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
}
