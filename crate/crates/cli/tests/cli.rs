use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn tori(sub: &str, out: &Path, sets: &[&str]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tori"));
    cmd.arg(sub).arg("--out").arg(out).env("TORI_WORKERS", "2");
    for s in sets {
        cmd.arg("--set").arg(s);
    }
    cmd.output().expect("binary runs")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(path).expect("file exists")).expect("valid json")
}

const SMALL_SIM: &[&str] = &["grid_n=32", "k_alias=8", "dt=0.01", "n_realizations=2", "sample_interval=0.05"];

fn with<'a>(base: &[&'a str], extra: &[&'a str]) -> Vec<&'a str> {
    base.iter().chain(extra).copied().collect()
}

#[test]
fn precision_audit_fixture_passes_and_square_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = tori("precision-audit", dir.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&dir.path().join("audit.json"));
    assert_eq!(report["passes"], true);
    assert!(dir.path().join("manifest.json").exists());

    let dir = tempfile::tempdir().unwrap();
    let o = tori("precision-audit", dir.path(), &["audit.omega_sq=1", "audit.k_max=2"]);
    assert!(o.status.success());
    assert_eq!(read_json(&dir.path().join("audit.json"))["passes"], false);
}

#[test]
fn simulate_at_zero_time_writes_one_record() {
    let dir = tempfile::tempdir().unwrap();
    let o = tori("simulate", dir.path(), &with(SMALL_SIM, &["t_end=0", "torus=\"square\""]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("series_r0.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["experiment"], "simulate");
    assert_eq!(manifest["config"]["torus"]["kind"], "rational");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    for f in manifest["files"].as_array().unwrap() {
        assert!(dir.path().join(f.as_str().unwrap()).exists(), "{f}");
    }
}

#[test]
fn reruns_are_byte_identical() {
    let sets = with(SMALL_SIM, &["t_end=0.2", "seed=7"]);
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert!(tori("simulate", a.path(), &sets).status.success());
    assert!(tori("simulate", b.path(), &sets).status.success());
    for name in ["series_r0.csv", "series_r1.csv", "spectrum_r1_final.csv"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let ha = read_json(&a.path().join("manifest.json"))["config_hash"].clone();
    assert_eq!(ha, read_json(&b.path().join("manifest.json"))["config_hash"]);
}

#[test]
fn resume_matches_uninterrupted_run() {
    let full = tempfile::tempdir().unwrap();
    let first = tempfile::tempdir().unwrap();
    let rest = tempfile::tempdir().unwrap();
    let common = with(SMALL_SIM, &["sample_interval=0.1"]);
    assert!(tori("simulate", full.path(), &with(&common, &["t_end=0.4"])).status.success());
    let o = tori("simulate", first.path(), &with(&common, &["t_end=0.2", "checkpoint_interval=0.2"]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(first.path().join("checkpoint_r0.chk").exists());
    let resume = format!("resume_from=\"{}\"", first.path().display());
    let o = tori("simulate", rest.path(), &with(&common, &["t_end=0.4", &resume]));
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let x = std::fs::read(full.path().join("spectrum_r1_final.csv")).unwrap();
    let y = std::fs::read(rest.path().join("spectrum_r1_final.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn unknown_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = tori("simulate", dir.path(), &["no_such_key=1"]);
    assert_eq!(o.status.code(), Some(2));
    let err = read_json(&dir.path().join("error.json"));
    assert_eq!(err["exit_code"], 2);
    let stderr: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).lines().last().unwrap()).unwrap();
    assert_eq!(stderr, err);
}

#[test]
fn bad_parameter_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = tori("simulate", dir.path(), &with(SMALL_SIM, &["dt=-1"]));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn work_budget_exhaustion_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let o = tori("truncated", dir.path(), &["work_budget=10"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("error.json").exists());
}

#[test]
fn kinematic_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let o = tori("kinematic", dir.path(), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let runs = read_json(&dir.path().join("kinematic.json"));
    let runs = runs.as_array().expect("list of runs");
    let levels = |w: f64, lambda: f64| {
        runs.iter()
            .find(|r| (r["omega_sq"].as_f64().unwrap() - w).abs() < 1e-12 && r["lambda"].as_f64() == Some(lambda))
            .map(|r| r["levels"].as_u64().unwrap())
    };
    let w = 2f64.sqrt();
    assert_eq!((levels(w, 10.0), levels(w, 20.0)), (Some(1), Some(4)));
    assert!(levels(w, 30.0).unwrap() >= 6);
    for lambda in [10.0, 20.0, 30.0] {
        assert!(levels(1.0, lambda).unwrap() >= 6);
    }
}

#[test]
fn single_mode_convergence_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = tori("convergence", dir.path(), &["convergence.case=\"single-mode\""]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("convergence.csv").exists());
}

#[test]
fn small_truncated_run_conserves_mass() {
    let dir = tempfile::tempdir().unwrap();
    let sets = [
        "truncated.support_box=3",
        "truncated.data_radius=3",
        "truncated.t_end=0.5",
        "truncated.cutoffs=[1,5]",
    ];
    let o = tori("truncated", dir.path(), &sets);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&dir.path().join("truncated.json"));
    // RK4 at the default step, not exact conservation.
    assert!(report["relative_mass_drift"].as_f64().unwrap() < 1e-8, "{report}");
    assert_eq!(report["cutoffs"][1]["relative_drift"], 0.0);
    assert!(dir.path().join("quartet_table.csv").exists());
}

#[test]
fn tiny_threshold_study() {
    let dir = tempfile::tempdir().unwrap();
    let sets = with(
        SMALL_SIM,
        &["n_realizations=1", "t_end=0.1", "r_list=[1.0,2.0]", "epsilon_list=[0.05,0.1,0.2]"],
    );
    let o = tori("threshold-study", dir.path(), &sets);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("thresholds.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2 * 3 * 2);
    for row in rows {
        let c: Vec<&str> = row.split(',').collect();
        assert_eq!(c[5], c[6]);
        assert_eq!(c[6], c[7]);
        assert_eq!(c[7], c[8]);
    }
}
