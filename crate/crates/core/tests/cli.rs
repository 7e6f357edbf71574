use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use manta_sim::harness::io::TrialSummary;

fn bin(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_manta-sim"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn sorted_files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    v.sort();
    v
}

fn assert_single_error_line(o: &Output, code: i32) {
    assert_eq!(o.status.code(), Some(code), "stderr: {}", stderr(o));
    let err = stderr(o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(
        err.starts_with(&format!("error[code={code}][kind=")),
        "{err}"
    );
}

#[test]
fn zero_frequency_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "[gait]\nfrequency_hz = 0.0\n").unwrap();
    let o = bin(&["run", "--config", "bad.toml"], dir.path());
    assert_single_error_line(&o, 2);
    assert!(stderr(&o).contains("gait.frequency_hz"));
}

#[test]
fn malformed_toml_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.toml"), "seed = [\n").unwrap();
    let o = bin(&["run", "--config", "bad.toml"], dir.path());
    assert_single_error_line(&o, 2);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["run", "--bogus"], dir.path());
    assert_single_error_line(&o, 2);
}

#[test]
fn three_replicates_write_three_records_and_one_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(
        &["run", "--replicates", "3", "--seed", "7", "--out", "out"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let out = dir.path().join("out");
    let names: Vec<String> = sorted_files(&out)
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names.iter().filter(|n| n.ends_with(".jsonl")).count(), 3);
    assert_eq!(
        names
            .iter()
            .filter(|n| n.ends_with(".summary.json"))
            .count(),
        3
    );
    assert!(names.contains(&"run-surface_straight-seed9.jsonl".to_string()));
    let csv = fs::read_to_string(out.join("run-surface_straight-summary.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "metric,trial_1,trial_2,trial_3");
    assert!(csv.lines().skip(1).all(|l| l.split(',').count() == 4));
}

#[test]
fn same_manifest_and_seed_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("m.toml"),
        "scenario = \"depth_hold\"\nseed = 11\nreplicates = 2\n",
    )
    .unwrap();
    for out in ["a", "b"] {
        let o = bin(
            &["run", "--config", "m.toml", "--out", out, "--parallel", "2"],
            dir.path(),
        );
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = sorted_files(&dir.path().join("a"));
    let b = sorted_files(&dir.path().join("b"));
    assert_eq!(a.len(), b.len());
    for (p, q) in a.iter().zip(&b) {
        assert_eq!(p.file_name(), q.file_name());
        assert_eq!(
            fs::read(p).unwrap(),
            fs::read(q).unwrap(),
            "{}",
            p.display()
        );
    }
}

#[test]
fn existing_outputs_are_not_overwritten() {
    let dir = tempfile::tempdir().unwrap();
    for _ in 0..2 {
        let o = bin(&["run", "--out", "out"], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let out = dir.path().join("out");
    assert!(out.join("run-surface_straight-seed0.jsonl").exists());
    assert!(out.join("run-surface_straight-seed0-1.jsonl").exists());
    assert!(out.join("run-surface_straight-summary-1.csv").exists());
}

#[test]
fn calibrate_persists_and_reuses() {
    let dir = tempfile::tempdir().unwrap();
    let first = bin(&["calibrate", "--out", "cal"], dir.path());
    assert!(first.status.success(), "{}", stderr(&first));
    assert!(
        stdout(&first).contains("steady speed 20.0"),
        "{}",
        stdout(&first)
    );
    let path = dir.path().join("cal/hydro.toml");
    let bytes = fs::read(&path).unwrap();

    let second = bin(&["calibrate", "--out", "cal"], dir.path());
    assert!(second.status.success());
    assert!(stdout(&second).contains("reusing"), "{}", stdout(&second));
    assert_eq!(fs::read(&path).unwrap(), bytes);

    // a changed target invalidates the cache
    fs::write(
        dir.path().join("c.toml"),
        "[calibration]\ntarget_speed_cm_s = 22.0\n",
    )
    .unwrap();
    let third = bin(
        &["calibrate", "--config", "c.toml", "--out", "cal"],
        dir.path(),
    );
    assert!(third.status.success(), "{}", stderr(&third));
    assert!(!stdout(&third).contains("reusing"));
    assert!(
        stdout(&third).contains("steady speed 22.0"),
        "{}",
        stdout(&third)
    );
}

#[test]
fn persisted_calibration_feeds_run() {
    let dir = tempfile::tempdir().unwrap();
    assert!(bin(&["calibrate", "--out", "cal"], dir.path())
        .status
        .success());
    fs::write(
        dir.path().join("m.toml"),
        "hydro_file = \"cal/hydro.toml\"\n",
    )
    .unwrap();
    let o = bin(&["run", "--config", "m.toml", "--out", "out"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(!stdout(&o).contains("calibrated c_thrust"));
}

#[test]
fn zero_target_speed_rejected() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.toml"),
        "[calibration]\ntarget_speed_cm_s = 0.0\n",
    )
    .unwrap();
    let o = bin(&["calibrate", "--config", "c.toml"], dir.path());
    assert_single_error_line(&o, 2);
    assert!(stderr(&o).contains("target_speed_cm_s"));
}

#[test]
fn bracket_failure_suggests_drag() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("c.toml"),
        "[calibration]\ntarget_speed_cm_s = 20.0\nthrust_hi = 0.001\n",
    )
    .unwrap();
    let o = bin(&["calibrate", "--config", "c.toml"], dir.path());
    assert_single_error_line(&o, 2);
    assert!(stderr(&o).contains("c_drag"), "{}", stderr(&o));
}

#[test]
fn unstable_run_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("m.toml"),
        "auto_calibrate = false\n[hydro]\nc_thrust = 1e308\n",
    )
    .unwrap();
    let o = bin(&["run", "--config", "m.toml", "--out", "out"], dir.path());
    assert_single_error_line(&o, 3);
}

#[test]
fn unwritable_output_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("blocker"), "").unwrap();
    let o = bin(&["run", "--out", "blocker/sub"], dir.path());
    assert_single_error_line(&o, 4);
}

#[test]
fn campaign_writes_both_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(
        &["campaign", "--replicates", "5", "--out", "camp"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    for label in ["with_control", "no_control"] {
        let csv = fs::read_to_string(
            dir.path()
                .join(format!("camp/campaign-surface_straight-{label}.csv")),
        )
        .unwrap();
        assert!(csv.starts_with("metric,trial_1,trial_2,trial_3,trial_4,trial_5\n"));
    }
    assert!(
        stdout(&o).contains("smaller mean error in 5 of 5 pairs"),
        "{}",
        stdout(&o)
    );
}

#[test]
fn replay_reproduces_recorded_metrics() {
    let dir = tempfile::tempdir().unwrap();
    assert!(bin(&["run", "--seed", "3", "--out", "out"], dir.path())
        .status
        .success());
    let summary: TrialSummary = serde_json::from_str(
        &fs::read_to_string(
            dir.path()
                .join("out/run-surface_straight-seed3.summary.json"),
        )
        .unwrap(),
    )
    .unwrap();
    for ext in ["jsonl", "csv"] {
        let record = format!("out/run-surface_straight-seed3.{ext}");
        let o = bin(&["replay", "--record", &record], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        let report: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        let mean = report["metrics"]["mean_error"].as_f64().unwrap();
        assert_eq!(mean, summary.metrics.mean_error, "{ext}");
        assert_eq!(
            report["samples"].as_u64().unwrap() as usize,
            summary.samples
        );
    }
}

#[test]
fn replay_of_missing_file_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(&["replay", "--record", "missing.jsonl"], dir.path());
    assert_single_error_line(&o, 4);
}
