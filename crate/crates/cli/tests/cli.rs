//! End-to-end runs of the `mfv` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use manifold_fv_cli::output::{read_csv, sha256_hex, RunManifest, Status};
use serde_json::{json, Value};

fn mfv(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_mfv"))
        .args(args)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn write_config(dir: &Path, name: &str, cfg: &Value) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    path
}

fn circle_burgers(n: usize, mean: f64) -> Value {
    json!({
        "schema_version": 1,
        "geometry": {"kind": "circle", "n": n},
        "flux": {"id": "burgers-circle"},
        "initial": {"profile": "sine", "mean": mean, "amplitude": 1.0},
        "scheme": {"numerical_flux": "godunov", "speed_range": [-1.5, 1.5]},
        "t_final": 0.5,
        "snapshot_times": [0.1, 0.2, 0.3, 0.4],
        "seed": 5
    })
}

fn run(cmd: &str, cfg: &Path, out: &Path) -> i32 {
    mfv(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

#[test]
fn run_writes_everything_the_manifest_lists() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &circle_burgers(64, 0.0));
    let out = tmp.path().join("run");
    assert_eq!(run("run", &cfg, &out), 0);
    let m = RunManifest::read(&out).unwrap();
    assert_eq!(m.exit_code, 0);
    assert_eq!(m.seed, Some(5));
    assert_eq!(m.snapshots.len(), 6);
    assert_eq!(m.mesh.as_ref().unwrap().cells, 64);
    assert!(m.errors.is_empty());
    assert_eq!(m.config["flux"]["id"], "burgers-circle");
    for f in &m.files {
        let bytes = fs::read(out.join(&f.path)).unwrap();
        assert_eq!(sha256_hex(&bytes), f.sha256, "{}", f.path);
        assert_eq!(bytes.len(), f.bytes);
    }
    for s in &m.snapshots {
        assert!(m.files.iter().any(|f| f.path == s.csv));
        assert!(m.files.iter().any(|f| f.path == s.vtk));
    }
    let first = fs::read_to_string(out.join(&m.snapshots[0].csv)).unwrap();
    assert!(first.starts_with("# seed = 5\ncell,x,y,z,measure,u\n"));
    let (header, rows) = read_csv(&out.join("diagnostics.csv")).unwrap();
    assert_eq!(header[0], "step");
    assert!(rows.len() > 6);
    let pass = |c: &str| m.verdicts.iter().any(|v| v.check == c && v.status == Status::Pass);
    assert!(pass("conservation") && pass("max-principle") && pass("oracle-error"));
}

#[test]
fn malformed_config_leaves_only_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = circle_burgers(32, 0.0);
    cfg["t_final"] = json!(-1.0);
    let path = write_config(tmp.path(), "bad.json", &cfg);
    let out = tmp.path().join("bad");
    assert_eq!(run("run", &path, &out), 2);
    let m = RunManifest::read(&out).unwrap();
    assert_eq!(m.exit_code, 2);
    assert!(m.errors.iter().any(|e| e.contains("t_final")), "{:?}", m.errors);
    let names: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec![std::ffi::OsString::from("manifest.json")]);
}

#[test]
fn unknown_fields_and_missing_files_are_usage_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = circle_burgers(32, 0.0);
    cfg["colour"] = json!("blue");
    let path = write_config(tmp.path(), "extra.json", &cfg);
    assert_eq!(run("run", &path, &tmp.path().join("a")), 2);
    assert_eq!(run("run", &tmp.path().join("absent.json"), &tmp.path().join("b")), 2);
    assert_eq!(mfv(&["frobnicate"]), 2);
}

#[test]
fn converge_needs_three_levels() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &circle_burgers(32, 0.0));
    let out = tmp.path().join("conv");
    let code = mfv(&[
        "converge",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--levels",
        "1",
    ]);
    assert_eq!(code, 2);
    assert!(!RunManifest::read(&out).unwrap().errors.is_empty());
}

#[test]
fn converge_reports_a_rate() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = circle_burgers(50, 0.0);
    cfg["t_final"] = json!(0.1);
    cfg["snapshot_times"] = json!([]);
    let path = write_config(tmp.path(), "c.json", &cfg);
    let out = tmp.path().join("conv");
    assert_eq!(run("converge", &path, &out), 0);
    let (_, rows) = read_csv(&out.join("convergence.csv")).unwrap();
    assert_eq!(rows.len(), 3);
    let errs: Vec<f64> = rows.iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(errs[1] < errs[0] && errs[2] < errs[1]);
}

#[test]
fn verify_passes_on_a_monotone_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &circle_burgers(50, 0.5));
    let out = tmp.path().join("verify");
    assert_eq!(run("verify", &cfg, &out), 0);
    let m = RunManifest::read(&out).unwrap();
    for check in ["conservation", "max-principle", "entropy", "contraction"] {
        let v = m
            .verdicts
            .iter()
            .find(|v| v.check == check)
            .unwrap_or_else(|| panic!("{check} missing"));
        assert_eq!(v.status, Status::Pass, "{check}: {}", v.detail);
    }
    assert!(out.join("entropy.csv").exists() && out.join("contraction.csv").exists());
}

#[test]
fn verify_does_not_claim_contraction_for_incompatible_fluxes() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("verify");
    assert_eq!(run("verify", &configs.join("torus_incompatible.json"), &out), 0);
    let m = RunManifest::read(&out).unwrap();
    let v = m.verdicts.iter().find(|v| v.check == "contraction").unwrap();
    assert_eq!(v.status, Status::NotClaimed);
}

#[test]
fn compare_identical_runs_gives_zero_distance() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "c.json", &circle_burgers(40, 0.0));
    let (a, b, d) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("d"));
    assert_eq!(run("run", &cfg, &a), 0);
    assert_eq!(run("run", &cfg, &b), 0);
    assert_eq!(
        mfv(&[
            "compare",
            a.to_str().unwrap(),
            b.to_str().unwrap(),
            "--out",
            d.to_str().unwrap()
        ]),
        0
    );
    let (_, rows) = read_csv(&d.join("distances.csv")).unwrap();
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r[2].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn compare_two_data_sets_contracts() {
    let tmp = tempfile::tempdir().unwrap();
    let ca = write_config(tmp.path(), "a.json", &circle_burgers(80, 0.0));
    let cb = write_config(tmp.path(), "b.json", &circle_burgers(80, 0.3));
    let (a, b, d) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("d"));
    assert_eq!(run("run", &ca, &a), 0);
    assert_eq!(run("run", &cb, &b), 0);
    assert_eq!(
        mfv(&[
            "compare",
            a.to_str().unwrap(),
            b.to_str().unwrap(),
            "--out",
            d.to_str().unwrap()
        ]),
        0
    );
    let m = RunManifest::read(&d).unwrap();
    assert!(m.verdicts.iter().all(|v| v.status == Status::Pass));
}

#[test]
fn compare_rejects_different_meshes() {
    let tmp = tempfile::tempdir().unwrap();
    let ca = write_config(tmp.path(), "a.json", &circle_burgers(40, 0.0));
    let cb = write_config(tmp.path(), "b.json", &circle_burgers(50, 0.0));
    let (a, b, d) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("d"));
    assert_eq!(run("run", &ca, &a), 0);
    assert_eq!(run("run", &cb, &b), 0);
    assert_eq!(
        mfv(&[
            "compare",
            a.to_str().unwrap(),
            b.to_str().unwrap(),
            "--out",
            d.to_str().unwrap()
        ]),
        2
    );
    assert!(!RunManifest::read(&d).unwrap().errors.is_empty());
}

#[test]
fn seed_override_changes_random_data() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = json!({
        "schema_version": 1,
        "geometry": {"kind": "torus", "nx": 6, "ny": 6},
        "flux": {"id": "torus-weighted-advection"},
        "initial": {"profile": "random", "low": -1.0, "high": 1.0},
        "scheme": {},
        "t_final": 0.1,
        "seed": 1
    });
    let path = write_config(tmp.path(), "r.json", &cfg);
    let p = path.to_str().unwrap();
    let dirs: Vec<PathBuf> = ["s1", "s1b", "s2"].iter().map(|d| tmp.path().join(d)).collect();
    for (d, seed) in dirs.iter().zip(["1", "1", "2"]) {
        assert_eq!(
            mfv(&["run", "--config", p, "--out", d.to_str().unwrap(), "--seed", seed]),
            0
        );
    }
    let snap = |d: &Path| fs::read(d.join("snapshot_0000.csv")).unwrap();
    assert_eq!(snap(&dirs[0]), snap(&dirs[1]));
    assert_ne!(snap(&dirs[0]), snap(&dirs[2]));
    assert_eq!(RunManifest::read(&dirs[2]).unwrap().seed, Some(2));
}

#[test]
fn strip_verify_checks_boundary_membership() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("strip");
    assert_eq!(run("verify", &configs.join("burgers_half_line.json"), &out), 0);
    let m = RunManifest::read(&out).unwrap();
    let membership = m.verdicts.iter().find(|v| v.check == "boundary-membership").unwrap();
    assert_eq!(membership.status, Status::Pass, "{}", membership.detail);
    let (header, rows) = read_csv(&out.join("membership.csv")).unwrap();
    assert_eq!(
        header,
        [
            "t",
            "face",
            "side",
            "trace",
            "u_b",
            "admissible",
            "worst_k",
            "violation"
        ]
    );
    assert!(!rows.is_empty());
}
