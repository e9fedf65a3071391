use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use phaseloc::commands::{evaluate, simulate_to_dir};
use phaseloc::config::default_config_json;
use phaseloc::recording::{load_recording, read_recording, write_recording};
use phaseloc::report::{load_json, GeometryReport};
use phaseloc_core::experiment::{run_monte_carlo, ExperimentConfig};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_phaseloc"))
}

fn write_config(dir: &Path, seed: u64, trials: u64, edit: impl FnOnce(&mut Value)) -> PathBuf {
    let mut doc: Value = serde_json::from_str(&default_config_json(seed, trials)).unwrap();
    edit(&mut doc);
    let path = dir.join("config.json");
    fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    path
}

fn status(cmd: &mut Command) -> i32 {
    let out = cmd.output().unwrap();
    out.status.code().unwrap()
}

fn simulate(dir: &Path, config: &Path) -> Vec<PathBuf> {
    let out = dir.join("rec");
    assert_eq!(
        status(
            bin()
                .arg("simulate")
                .arg("--config")
                .arg(config)
                .arg("--out")
                .arg(&out)
        ),
        0
    );
    ["x", "y", "z"]
        .iter()
        .map(|a| out.join(format!("sweep_{a}.jsonl")))
        .collect()
}

#[test]
fn recording_round_trips_exactly() {
    let cfg = ExperimentConfig::calibration(9, 1);
    for rec in cfg.simulate_trial(&cfg.base_point(), 0).unwrap() {
        let mut buf = Vec::new();
        write_recording(&rec, &mut buf).unwrap();
        let back = read_recording(buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(back, rec);
    }
}

#[test]
fn parallel_evaluation_matches_sequential() {
    let mut cfg = ExperimentConfig::calibration(21, 12);
    cfg.grid.phase_sigma = vec![0.2, 0.6];
    let seq = run_monte_carlo(&cfg).unwrap();
    assert_eq!(evaluate(&cfg, Some(3)).unwrap(), seq);
    assert_eq!(evaluate(&cfg, Some(1)).unwrap(), seq);
}

#[test]
fn simulate_then_locate_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 4, 1, |d| {
        d["noise"]["phase_sigma"] = 0.0.into();
        d["noise"]["read_drop_prob"] = 0.0.into();
    });
    let mut recs = simulate(dir.path(), &config);
    recs.reverse();
    let out = dir.path().join("geo.json");
    assert_eq!(
        status(bin().arg("locate").args(&recs).arg("--out").arg(&out)),
        0
    );
    let report: GeometryReport = load_json(&out).unwrap();
    assert!(!report.partial);
    assert_eq!(report.ranks.len(), 5);
    assert_eq!(report.ranks["drone-4"].x, 0);
}

#[test]
fn silent_tag_gives_partial_exit() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 4, 1, |_| {});
    let recs = simulate(dir.path(), &config);
    let text = fs::read_to_string(&recs[0]).unwrap();
    let kept: Vec<&str> = text
        .lines()
        .filter(|l| !l.contains("\"tag\":\"tag-2\""))
        .collect();
    assert!(kept.len() < text.lines().count());
    fs::write(&recs[0], kept.join("\n") + "\n").unwrap();
    assert!(load_recording(&recs[0]).unwrap().traces["tag-2"].is_empty());

    let out = dir.path().join("geo.json");
    let o = bin()
        .arg("locate")
        .args(&recs)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("drone-2"));
    let report: GeometryReport = load_json(&out).unwrap();
    assert!(report.partial);
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 4, 1, |_| {});
    let recs = simulate(dir.path(), &config);
    let out = dir.path().join("geo.json");

    let missing = dir.path().join("nope.jsonl");
    assert_eq!(
        status(
            bin()
                .arg("locate")
                .arg(&missing)
                .args(&recs[1..])
                .arg("--out")
                .arg(&out)
        ),
        3
    );
    assert_eq!(
        status(
            bin()
                .arg("locate")
                .arg(&recs[0])
                .args(&recs[..2])
                .arg("--out")
                .arg(&out)
        ),
        2
    );

    let zero = write_config(dir.path(), 4, 0, |_| {});
    assert_eq!(
        status(
            bin()
                .args(["evaluate", "--config"])
                .arg(&zero)
                .arg("--out")
                .arg(dir.path())
        ),
        2
    );

    let unseeded = write_config(dir.path(), 4, 1, |d| {
        d.as_object_mut().unwrap().remove("master_seed");
    });
    assert_eq!(
        status(
            bin()
                .args(["simulate", "--config"])
                .arg(&unseeded)
                .arg("--out")
                .arg(dir.path())
        ),
        2
    );
    assert_eq!(
        status(
            bin()
                .args(["simulate", "--seed", "3", "--config"])
                .arg(&unseeded)
                .arg("--out")
                .arg(dir.path())
        ),
        0
    );

    fs::write(dir.path().join("garbage.json"), "{ not json").unwrap();
    assert_eq!(
        status(
            bin()
                .args(["evaluate", "--config"])
                .arg(dir.path().join("garbage.json"))
                .arg("--out")
                .arg(dir.path())
        ),
        2
    );
}

#[test]
fn smoke_evaluation_is_fast() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), 8, 10, |_| {});
    let start = Instant::now();
    assert_eq!(
        status(
            bin()
                .args(["evaluate", "--config"])
                .arg(&config)
                .arg("--out")
                .arg(dir.path())
        ),
        0
    );
    assert!(start.elapsed().as_secs_f64() < 5.0);
    let csv = fs::read_to_string(dir.path().join("aggregate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn in_process_simulation_writes_listed_axes_only() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = ExperimentConfig::calibration(2, 1);
    cfg.sweep.axes = vec![phaseloc_core::Axis::Z];
    let written = simulate_to_dir(&cfg, dir.path()).unwrap();
    assert_eq!(written, vec![dir.path().join("sweep_z.jsonl")]);
}
