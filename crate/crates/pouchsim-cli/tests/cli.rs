//! End-to-end checks of the `pouchsim` binary: subcommands, exit codes,
//! file outputs, and determinism.

use std::path::Path;
use std::process::{Command, Output};

fn pouchsim(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pouchsim"));
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_small_config(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("config.toml");
    std::fs::write(&path, "[battery]\ntrials_per_condition = 2\nmaster_seed = 11\n").unwrap();
    path
}

#[test]
fn screen_asserts_reference_selection() {
    let dir = tempfile::tempdir().unwrap();
    let out = pouchsim(
        &[
            "screen",
            "--assert-selection",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("screen.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21); // header + 20 designs
    assert!(dir.path().join("screen.txt").exists());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("selection assertion passed"));
}

#[test]
fn screen_higher_target_shrinks_feasible_set() {
    let dir = tempfile::tempdir().unwrap();
    let base = pouchsim(&["screen", "--out", dir.path().to_str().unwrap()], &[]);
    assert!(base.status.success());
    let count_feasible = |csv: &str| csv.lines().filter(|l| l.contains(",true,")).count();
    let n_default = count_feasible(&std::fs::read_to_string(dir.path().join("screen.csv")).unwrap());

    let out = pouchsim(
        &[
            "screen",
            "--theta-target",
            "60",
            "--out",
            dir.path().to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success());
    let n_60 = count_feasible(&std::fs::read_to_string(dir.path().join("screen.csv")).unwrap());
    assert!(n_60 < n_default, "{n_60} !< {n_default}");
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "this is { not toml").unwrap();
    let out = pouchsim(&["screen", "--config", bad.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn battery_writes_records_and_report_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small_config(dir.path());
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out_dir in [&out_a, &out_b] {
        let out = pouchsim(
            &[
                "battery",
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out_dir.to_str().unwrap(),
                "--jobs",
                "2",
            ],
            &[],
        );
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let rec_a = std::fs::read(out_a.join("records.jsonl")).unwrap();
    let rec_b = std::fs::read(out_b.join("records.jsonl")).unwrap();
    assert_eq!(rec_a, rec_b);
    let lines = String::from_utf8(rec_a).unwrap().lines().count();
    assert_eq!(lines, 12); // 2 designs x 3 duties x 2 trials
    for file in [
        "report.md",
        "angle_summary.csv",
        "force_summary.csv",
        "anova.csv",
        "tukey.csv",
        "records_manifest.csv",
        "force_vs_duty.svg",
        "path_length_distribution.csv",
    ] {
        assert!(out_a.join(file).exists(), "missing {file}");
    }
    let md_a = std::fs::read(out_a.join("report.md")).unwrap();
    let md_b = std::fs::read(out_b.join("report.md")).unwrap();
    assert_eq!(md_a, md_b);
}

#[test]
fn env_overrides_trials() {
    let dir = tempfile::tempdir().unwrap();
    let out = pouchsim(
        &["battery", "--out", dir.path().to_str().unwrap()],
        &[("POUCHSIM_TRIALS", "1"), ("POUCHSIM_SEED", "3")],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let recs = std::fs::read_to_string(dir.path().join("records.jsonl")).unwrap();
    assert_eq!(recs.lines().count(), 6);
}

#[test]
fn report_rebuilds_from_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_small_config(dir.path());
    let out_dir = dir.path().join("out");
    let run = pouchsim(
        &[
            "battery",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert!(run.status.success());
    let before = std::fs::read(out_dir.join("report.md")).unwrap();
    std::fs::remove_file(out_dir.join("report.md")).unwrap();
    let rep = pouchsim(
        &[
            "report",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
        ],
        &[],
    );
    assert!(rep.status.success(), "{}", String::from_utf8_lossy(&rep.stderr));
    let after = std::fs::read(out_dir.join("report.md")).unwrap();
    assert_eq!(before, after);
}

#[test]
fn report_without_records_fails_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = pouchsim(&["report", "--out", dir.path().to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_marker_and_imu_files() {
    let dir = tempfile::tempdir().unwrap();
    // synthetic arc: theta ramps 0 -> 0.6 rad over 2 s at 60 Hz
    let arm = 0.165;
    let mut marker = String::from("t,x,y\n");
    let mut imu = String::from("t,gx,gy,gz,ax,ay,az\n");
    for i in 0..120 {
        let t = i as f64 / 60.0;
        let theta = 0.3 * t;
        marker.push_str(&format!("{},{},{}\n", t, arm * theta.sin(), arm * (1.0 - theta.cos())));
        imu.push_str(&format!("{},0,0,{},0,0,0\n", t, 0.3 + 0.05 * (20.0 * t).sin()));
    }
    let marker_path = dir.path().join("m.csv");
    let imu_path = dir.path().join("i.csv");
    std::fs::write(&marker_path, marker).unwrap();
    std::fs::write(&imu_path, imu).unwrap();

    let out = pouchsim(
        &[
            "analyze",
            "--marker",
            marker_path.to_str().unwrap(),
            "--imu",
            imu_path.to_str().unwrap(),
        ],
        &[],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("marker kinematics"));
    assert!(stdout.contains("imu smoothness"));

    // empty file is a schema error -> exit 2
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    let out = pouchsim(&["analyze", "--marker", empty.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_requires_input() {
    let out = pouchsim(&["analyze"], &[]);
    assert_eq!(out.status.code(), Some(2));
}
