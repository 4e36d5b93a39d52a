use std::path::Path;
use std::process::{Command, Output};

fn dnlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dnlab"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn out_dir(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn malformed_config_is_line_anchored() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "bad.json",
        "{\n  \"seed\": 1,\n  \"sweep\": {\"draws\": 2,}\n}\n",
    );
    let out = dnlab(&[
        "coercivity",
        "--config",
        &cfg,
        "--out",
        &out_dir(tmp.path(), "o"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.json:3:"), "{err}");

    let cfg = write(
        tmp.path(),
        "unknown.json",
        "{\"resolution\": {\"nx\": 32, \"ny\": 4}}",
    );
    let out = dnlab(&[
        "sharp",
        "--config",
        &cfg,
        "--out",
        &out_dir(tmp.path(), "o"),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown field `ny`"));
}

#[test]
fn sweeps_require_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let out = dnlab(&["lp", "--out", &out_dir(tmp.path(), "o")]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--seed"));
}

#[test]
fn zero_time_writes_header_only() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "t0.json", r#"{"muskat": {"t_end": 0}}"#);
    let dir = out_dir(tmp.path(), "o");
    let out = dnlab(&["muskat", "--config", &cfg, "--out", &dir]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(Path::new(&dir).join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1);
    assert!(csv.starts_with("t,l2,hhalf,linf,lipschitz,"));
    assert!(Path::new(&dir).join("manifest.json").exists());
}

#[test]
fn stability_violation_exits_three() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "rk4.json",
        r#"{"resolution": {"nx": 32, "nz": 32},
            "muskat": {"initial": {"preset": "multi-mode", "modes": [[1, 0.3], [12, 0.05]]},
                       "t_end": 5, "floor": null,
                       "stepper": {"scheme": "rk4", "dt_max": 1.0, "cfl": 100.0,
                                   "sample_interval": 1.0, "auto_depth": false}}}"#,
    );
    let out = dnlab(&[
        "muskat",
        "--config",
        &cfg,
        "--out",
        &out_dir(tmp.path(), "o"),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("step"));
}

#[test]
fn missed_tolerance_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "tight.json",
        r#"{"flat_check": {"tol": 1e-12}}"#,
    );
    let out = dnlab(&[
        "flat-check",
        "--config",
        &cfg,
        "--out",
        &out_dir(tmp.path(), "o"),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn flat_strip_sharp_constant() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "s.json",
        r#"{"sharp": {"geometries": [{"kind": "flat-strip", "depth": 1.0}]}}"#,
    );
    let dir = out_dir(tmp.path(), "o");
    let out = dnlab(&["sharp", "--config", &cfg, "--nx", "32", "--out", &dir]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(Path::new(&dir).join("sharp.json")).unwrap())
            .unwrap();
    let value = v[0]["result"]["value"].as_f64().unwrap();
    assert!((value - 1f64.tanh()).abs() < 1e-3);
}

#[test]
fn repeated_sweeps_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        r#"{"sweep": {"draws": 10}, "resolution": {"nx": 64, "nz": 32}}"#,
    );
    let (a, b) = (out_dir(tmp.path(), "a"), out_dir(tmp.path(), "b"));
    for dir in [&a, &b] {
        let out = dnlab(&[
            "convex",
            "--config",
            &cfg,
            "--seed",
            "7",
            "--threads",
            "1",
            "--out",
            dir,
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
    for f in ["convex.json", "convex.csv", "manifest.json"] {
        let x = std::fs::read(Path::new(&a).join(f)).unwrap();
        let y = std::fs::read(Path::new(&b).join(f)).unwrap();
        assert_eq!(x, y, "{f}");
    }
}

#[test]
fn manifest_command_must_match() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "s.json",
        r#"{"sharp": {"geometries": [{"kind": "flat-half-space"}]}}"#,
    );
    let dir = out_dir(tmp.path(), "o");
    assert_eq!(
        dnlab(&["sharp", "--config", &cfg, "--nx", "16", "--out", &dir])
            .status
            .code(),
        Some(0)
    );
    let manifest = format!("{dir}/manifest.json");
    let out = dnlab(&[
        "muskat",
        "--config",
        &manifest,
        "--out",
        &out_dir(tmp.path(), "p"),
    ]);
    assert_eq!(out.status.code(), Some(1));
}
