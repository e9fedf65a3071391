//! Batch commands. Each is deterministic given its inputs.

use std::fs;
use std::path::{Path, PathBuf};

use phaseloc_core::experiment::{aggregate, run_trial, AggregateReport, ExperimentConfig};
use phaseloc_core::locate::{locate_swarm, PipelineConfig};
use phaseloc_core::sim::SweepRecording;
use phaseloc_core::Axis;
use rayon::prelude::*;

use crate::config::load_config;
use crate::error::{CliError, Outcome};
use crate::recording::{load_recording, save_recording};
use crate::report::{aggregate_csv, save_json, GeometryReport};

/// File name of the recording for `axis` inside an output directory.
pub fn recording_file_name(axis: Axis) -> String {
    format!("sweep_{axis}.jsonl")
}

pub const AGGREGATE_JSON: &str = "aggregate.json";
pub const AGGREGATE_CSV: &str = "aggregate.csv";

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn pick_out(
    flag: Option<&Path>,
    configured: Option<&PathBuf>,
    what: &str,
) -> Result<PathBuf, CliError> {
    flag.map(Path::to_path_buf)
        .or_else(|| configured.cloned())
        .ok_or_else(|| {
            CliError::Config(format!(
                "no output {what} given (use --out or the config's output section)"
            ))
        })
}

/// Simulates trial 0 of the base grid point and writes one recording per
/// configured axis. Returns the written paths.
pub fn cmd_simulate(
    config: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
) -> Result<Vec<PathBuf>, CliError> {
    let file = load_config(config, seed)?;
    let dir = pick_out(out, file.output.recordings.as_ref(), "directory")?;
    simulate_to_dir(&file.experiment, &dir)
}

pub fn simulate_to_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let recordings = cfg.simulate_trial(&cfg.base_point(), 0)?;
    ensure_dir(dir)?;
    let mut written = Vec::new();
    for rec in recordings
        .iter()
        .filter(|r| cfg.sweep.axes.contains(&r.axis))
    {
        let path = dir.join(recording_file_name(rec.axis));
        save_recording(rec, &path)?;
        written.push(path);
    }
    Ok(written)
}

/// Loads three recordings (any order, one per axis) and returns them as x, y, z.
pub fn load_axis_recordings(paths: &[PathBuf]) -> Result<[SweepRecording; 3], CliError> {
    if paths.len() != 3 {
        return Err(CliError::Config(format!(
            "locate needs three recordings, got {}",
            paths.len()
        )));
    }
    let mut slots: [Option<SweepRecording>; 3] = [None, None, None];
    for path in paths {
        let rec = load_recording(path)?;
        let slot = &mut slots[rec.axis.index()];
        if slot.is_some() {
            return Err(CliError::Input {
                path: path.clone(),
                message: format!("a second {} sweep was given", rec.axis),
            });
        }
        *slot = Some(rec);
    }
    let [x, y, z] = slots;
    match (x, y, z) {
        (Some(x), Some(y), Some(z)) => Ok([x, y, z]),
        _ => unreachable!("three distinct axes fill three slots"),
    }
}

/// Locates the swarm from three recordings and writes the geometry report.
pub fn cmd_locate(
    recordings: &[PathBuf],
    config: Option<&Path>,
    out: &Path,
) -> Result<(GeometryReport, Outcome), CliError> {
    let pipeline = match config {
        Some(p) => crate::config::load_pipeline(p)?,
        None => PipelineConfig::default(),
    };
    let [x, y, z] = load_axis_recordings(recordings)?;
    let located = locate_swarm(&x, &y, &z, &pipeline).map_err(|e| CliError::Input {
        path: recordings[0].clone(),
        message: e.to_string(),
    })?;
    let report = GeometryReport::from(&located);
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    save_json(&report, out)?;
    let outcome = if report.partial {
        Outcome::Partial
    } else {
        Outcome::Complete
    };
    Ok((report, outcome))
}

/// Monte-Carlo evaluation with trials spread over `jobs` worker threads
/// (all cores when `None`). Output is identical to the sequential
/// [`phaseloc_core::experiment::run_monte_carlo`].
pub fn evaluate(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<AggregateReport, CliError> {
    cfg.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let points = pool.install(|| {
        cfg.grid_points()
            .into_iter()
            .map(|point| {
                let reports = (0..cfg.trials)
                    .into_par_iter()
                    .map(|i| run_trial(cfg, &point, i))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(aggregate(point, &reports))
            })
            .collect::<Result<Vec<_>, phaseloc_core::Error>>()
    })?;
    Ok(AggregateReport {
        master_seed: cfg.master_seed,
        trials: cfg.trials,
        points,
    })
}

/// Runs the evaluation and writes `aggregate.json` and `aggregate.csv` into
/// the output directory.
pub fn cmd_evaluate(
    config: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
    jobs: Option<usize>,
) -> Result<(AggregateReport, [PathBuf; 2]), CliError> {
    let file = load_config(config, seed)?;
    let dir = pick_out(out, file.output.evaluation.as_ref(), "directory")?;
    let report = evaluate(&file.experiment, jobs)?;
    ensure_dir(&dir)?;
    let json = dir.join(AGGREGATE_JSON);
    let csv = dir.join(AGGREGATE_CSV);
    save_json(&report, &json)?;
    fs::write(&csv, aggregate_csv(&report)).map_err(|e| CliError::io(&csv, e))?;
    Ok((report, [json, csv]))
}
