//! Sweep recordings as line-delimited JSON.
//!
//! The first line is a header object with the sweep axis, reader settings,
//! sweep speed and duration, and the ground truth. Every following line is one
//! sample: `{"round":12,"t":3.0000000000000000e-1,"tag":"tag-0","phase":...}`.
//! Floats are written with 17 significant digits so a load/save cycle is
//! bit-exact.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use phaseloc_core::sim::{DroneTruth, ReaderConfig, SweepRecording};
use phaseloc_core::trace::{PhaseSample, TagTrace};
use phaseloc_core::{Axis, Point3};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::CliError;

pub const FORMAT_TAG: &str = "phaseloc-recording/1";

/// An `f64` that serializes with 17 significant digits.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(transparent)]
pub struct F17(pub f64);

pub fn format_f17(x: f64) -> String {
    format!("{x:.16e}")
}

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(serde::ser::Error::custom("non-finite float"));
        }
        let raw = RawValue::from_string(format_f17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

fn p17(p: Point3) -> [F17; 3] {
    [F17(p.x), F17(p.y), F17(p.z)]
}

fn unp17(p: [F17; 3]) -> Point3 {
    Point3::new(p[0].0, p[1].0, p[2].0)
}

#[derive(Debug, Serialize, Deserialize)]
struct ReaderDto {
    position: [F17; 3],
    frequency_hz: F17,
    rounds_per_second: F17,
    allow_out_of_band: bool,
    /// Informational; recomputed from the frequency on load.
    wavelength: F17,
}

#[derive(Debug, Serialize, Deserialize)]
struct TruthDto {
    drone_id: String,
    tag_id: String,
    start: [F17; 3],
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    axis: Axis,
    reader: ReaderDto,
    speed: F17,
    duration: F17,
    ground_truth: Vec<TruthDto>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleLine {
    round: u64,
    t: F17,
    tag: String,
    phase: F17,
}

fn json_err(e: serde_json::Error) -> std::io::Error {
    std::io::Error::new(std::io::ErrorKind::InvalidData, e)
}

/// Writes `rec`; samples are ordered by round, then tag id.
pub fn write_recording<W: Write>(rec: &SweepRecording, mut w: W) -> std::io::Result<()> {
    let header = Header {
        format: FORMAT_TAG.into(),
        axis: rec.axis,
        reader: ReaderDto {
            position: p17(rec.reader.position),
            frequency_hz: F17(rec.reader.frequency_hz),
            rounds_per_second: F17(rec.reader.rounds_per_second),
            allow_out_of_band: rec.reader.allow_out_of_band,
            wavelength: F17(rec.reader.wavelength()),
        },
        speed: F17(rec.speed),
        duration: F17(rec.duration),
        ground_truth: rec
            .ground_truth
            .iter()
            .map(|(d, t)| TruthDto {
                drone_id: d.clone(),
                tag_id: t.tag_id.clone(),
                start: p17(t.start),
            })
            .collect(),
    };
    serde_json::to_writer(&mut w, &header).map_err(json_err)?;
    w.write_all(b"\n")?;

    let mut lines: Vec<(u64, &str, &PhaseSample)> = rec
        .traces
        .iter()
        .flat_map(|(tag, tr)| tr.samples.iter().map(move |s| (s.round, tag.as_str(), s)))
        .collect();
    lines.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(b.1)));
    for (_, tag, s) in lines {
        let line = SampleLine {
            round: s.round,
            t: F17(s.t),
            tag: tag.to_string(),
            phase: F17(s.phase),
        };
        serde_json::to_writer(&mut w, &line).map_err(json_err)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Parses a recording. `source` names the input in error messages.
pub fn read_recording<R: BufRead>(r: R, source: &Path) -> Result<SweepRecording, CliError> {
    let bad = |line: usize, message: String| CliError::Input {
        path: source.to_path_buf(),
        message: format!("line {line}: {message}"),
    };
    let mut lines = r.lines().enumerate();
    let header_line = match lines.next() {
        Some((_, l)) => l.map_err(|e| CliError::io(source, e))?,
        None => return Err(bad(1, "empty recording".into())),
    };
    let header: Header = serde_json::from_str(&header_line).map_err(|e| bad(1, e.to_string()))?;
    if header.format != FORMAT_TAG {
        return Err(bad(1, format!("unsupported format {:?}", header.format)));
    }
    let reader = ReaderConfig {
        position: unp17(header.reader.position),
        frequency_hz: header.reader.frequency_hz.0,
        rounds_per_second: header.reader.rounds_per_second.0,
        allow_out_of_band: header.reader.allow_out_of_band,
    };
    let mut ground_truth = BTreeMap::new();
    let mut traces = BTreeMap::new();
    for t in header.ground_truth {
        traces.insert(t.tag_id.clone(), TagTrace::new(t.tag_id.clone()));
        let dup = ground_truth
            .insert(
                t.drone_id.clone(),
                DroneTruth {
                    tag_id: t.tag_id,
                    start: unp17(t.start),
                },
            )
            .is_some();
        if dup {
            return Err(bad(1, format!("drone {} listed twice", t.drone_id)));
        }
    }
    for (i, line) in lines {
        let line = line.map_err(|e| CliError::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let s: SampleLine = serde_json::from_str(&line).map_err(|e| bad(i + 1, e.to_string()))?;
        let trace = traces
            .get_mut(&s.tag)
            .ok_or_else(|| bad(i + 1, format!("tag {} is not in the header", s.tag)))?;
        trace.samples.push(PhaseSample {
            round: s.round,
            t: s.t.0,
            phase: s.phase.0,
        });
    }
    let rec = SweepRecording {
        axis: header.axis,
        reader,
        speed: header.speed.0,
        duration: header.duration.0,
        traces,
        ground_truth,
    };
    rec.reader
        .validate()
        .and_then(|_| rec.validate())
        .map_err(|e| CliError::Input {
            path: source.to_path_buf(),
            message: e.to_string(),
        })?;
    Ok(rec)
}

pub fn save_recording(rec: &SweepRecording, path: &Path) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_recording(rec, BufWriter::new(file)).map_err(|e| CliError::io(path, e))
}

pub fn load_recording(path: &Path) -> Result<SweepRecording, CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_recording(BufReader::new(file), path)
}
