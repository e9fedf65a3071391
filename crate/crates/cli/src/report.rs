//! Geometry reports and Monte-Carlo aggregates.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use phaseloc_core::experiment::AggregateReport;
use phaseloc_core::locate::{ConfidenceFlags, RankSense, RankTriple, SwarmLocation, TagFailure};
use phaseloc_core::Axis;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TroughSummary {
    pub tag_id: String,
    pub index: usize,
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneDiagnostics {
    pub rank: usize,
    pub trough: Option<TroughSummary>,
    pub flags: ConfidenceFlags,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisDiagnostics {
    pub axis: Axis,
    pub sense: RankSense,
    pub ranking: Vec<String>,
    pub drones: BTreeMap<String, DroneDiagnostics>,
    pub failures: Vec<TagFailure>,
}

/// Output of `locate`: rank triples plus per-axis trough diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    /// True when at least one tag could not be located on some axis.
    pub partial: bool,
    pub ranks: BTreeMap<String, RankTriple>,
    pub axes: Vec<AxisDiagnostics>,
}

impl From<&SwarmLocation> for GeometryReport {
    fn from(loc: &SwarmLocation) -> Self {
        let axes = loc
            .axes
            .iter()
            .map(|order| AxisDiagnostics {
                axis: order.axis,
                sense: order.sense,
                ranking: order.ranking.clone(),
                drones: order
                    .ranking
                    .iter()
                    .enumerate()
                    .map(|(rank, d)| {
                        let trough = order.trough_points.get(d).map(|p| TroughSummary {
                            tag_id: p.tag_id.clone(),
                            index: p.index,
                            t: p.t,
                            value: p.value,
                        });
                        let flags = order.flags.get(d).copied().unwrap_or_default();
                        (
                            d.clone(),
                            DroneDiagnostics {
                                rank,
                                trough,
                                flags,
                            },
                        )
                    })
                    .collect(),
                failures: order.failures.clone(),
            })
            .collect();
        GeometryReport {
            partial: loc.is_partial(),
            ranks: loc.geometry.ranks.clone(),
            axes,
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize");
    s.push('\n');
    s
}

pub fn save_json<T: Serialize>(value: &T, path: &Path) -> Result<(), CliError> {
    fs::write(path, to_json(value)).map_err(|e| CliError::io(path, e))
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub const CSV_HEADER: &str =
    "point,phase_sigma,read_drop_prob,speed,reader_distance,spacing_scale,trials,metric,mean,std,min,max";

/// One row per grid point and metric.
pub fn aggregate_csv(report: &AggregateReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for (i, p) in report.points.iter().enumerate() {
        let g = &p.point;
        for m in &p.metrics {
            writeln!(
                out,
                "{i},{},{},{},{},{},{},{},{},{},{},{}",
                g.phase_sigma,
                g.read_drop_prob,
                g.speed,
                g.reader_distance,
                g.spacing_scale,
                p.trials,
                m.name,
                m.mean,
                m.std,
                m.min,
                m.max
            )
            .expect("writing to a String");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use phaseloc_core::experiment::{aggregate, GridPoint};
    use phaseloc_core::metrics::TrialReport;

    #[test]
    fn csv_has_one_row_per_metric() {
        let point = GridPoint {
            phase_sigma: 0.5,
            read_drop_prob: 0.1,
            speed: 0.15,
            reader_distance: 1.5,
            spacing_scale: 1.0,
        };
        let trial = TrialReport {
            trial: 0,
            per_axis_accuracy: [(Axis::X, 1.0), (Axis::Y, 0.9), (Axis::Z, 0.8)].into(),
            geometry_accuracy: 0.6,
            failures: vec![],
        };
        let report = AggregateReport {
            master_seed: 3,
            trials: 1,
            points: vec![aggregate(point, &[trial])],
        };
        let csv = aggregate_csv(&report);
        let rows: Vec<&str> = csv.lines().collect();
        assert_eq!(rows[0], CSV_HEADER);
        assert_eq!(rows.len(), 6);
        assert_eq!(rows[2], "0,0.5,0.1,0.15,1.5,1,1,accuracy_y,0.9,0,0.9,0.9");
    }
}
