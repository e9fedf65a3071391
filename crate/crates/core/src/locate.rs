//! Relative ordering of the swarm from trough timing.
//!
//! Rank 0 on an axis is the drone whose trough lowest point comes first, i.e.
//! the drone that passes the antenna first. For a sweep toward +axis that is
//! the drone with the largest coordinate on that axis.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::filter::{FilterConfig, SavitzkyGolay};
use crate::geometry::Axis;
use crate::rotation::{detect_rotation_events, DEFAULT_STEP_THRESHOLD, DEFAULT_SUSTAIN};
use crate::sim::SweepRecording;
use crate::trace::TagTrace;
use crate::trough::{find_trough_lowest, splice, TroughPoint, DEFAULT_GUARD};

/// Parameters of the per-tag splice → filter → trough chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub filter: FilterConfig,
    pub guard: usize,
    pub rotation_threshold: f64,
    pub rotation_sustain: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            filter: FilterConfig::default(),
            guard: DEFAULT_GUARD,
            rotation_threshold: DEFAULT_STEP_THRESHOLD,
            rotation_sustain: DEFAULT_SUSTAIN,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.filter.validate()?;
        if !(self.rotation_threshold.is_finite() && self.rotation_threshold > 0.0) {
            return Err(invalid("rotation_threshold must be finite and positive"));
        }
        Ok(())
    }

    /// Shortest trace the chain accepts.
    pub fn min_trace_len(&self) -> usize {
        self.filter.window.max(2 * self.guard + 1)
    }
}

/// Which end of the coordinate range rank 0 refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankSense {
    /// Rank 0 has the largest coordinate.
    Descending,
    /// Rank 0 has the smallest coordinate.
    Ascending,
}

impl RankSense {
    /// Ordering of two coordinates in rank order.
    pub fn compare(self, a: f64, b: f64) -> Ordering {
        match self {
            RankSense::Descending => b.total_cmp(&a),
            RankSense::Ascending => a.total_cmp(&b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfidenceFlags {
    /// Trough minimum lies within `guard` samples of a trace end.
    pub boundary: bool,
    /// Another sample within `guard` ties the minimum.
    pub flat: bool,
    /// A flagged rotation step overlaps the trough neighbourhood.
    pub rotation_overlap: bool,
    /// Tied with a neighbour in the ranking key; order fixed by the tie-break.
    pub tie: bool,
    /// The tag produced no usable trough; ranked after every located drone.
    pub unlocated: bool,
    /// Depth ordering whose result may be confounded by the third coordinate.
    pub depth_confound: bool,
}

impl ConfidenceFlags {
    pub fn any(&self) -> bool {
        self.boundary
            || self.flat
            || self.rotation_overlap
            || self.tie
            || self.unlocated
            || self.depth_confound
    }
}

/// A tag that could not be located.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagFailure {
    pub drone_id: String,
    pub tag_id: String,
    pub reason: String,
}

/// Ordering of every drone in one recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisOrder {
    pub axis: Axis,
    pub sense: RankSense,
    /// Drone ids, rank 0 first. A permutation of all drones in the recording.
    pub ranking: Vec<String>,
    pub trough_points: BTreeMap<String, TroughPoint>,
    pub flags: BTreeMap<String, ConfidenceFlags>,
    pub failures: Vec<TagFailure>,
}

impl AxisOrder {
    pub fn rank_of(&self, drone_id: &str) -> Option<usize> {
        self.ranking.iter().position(|d| d == drone_id)
    }

    pub fn is_partial(&self) -> bool {
        !self.failures.is_empty()
    }
}

/// Per-axis ranks of one drone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankTriple {
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl RankTriple {
    pub fn get(&self, axis: Axis) -> usize {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    fn set(&mut self, axis: Axis, rank: usize) {
        match axis {
            Axis::X => self.x = rank,
            Axis::Y => self.y = rank,
            Axis::Z => self.z = rank,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SwarmGeometry {
    pub ranks: BTreeMap<String, RankTriple>,
}

/// Geometry plus the per-axis orders it was assembled from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwarmLocation {
    pub geometry: SwarmGeometry,
    pub axes: Vec<AxisOrder>,
}

impl SwarmLocation {
    pub fn failures(&self) -> impl Iterator<Item = (Axis, &TagFailure)> {
        self.axes
            .iter()
            .flat_map(|o| o.failures.iter().map(move |f| (o.axis, f)))
    }

    pub fn is_partial(&self) -> bool {
        self.axes.iter().any(AxisOrder::is_partial)
    }
}

struct Profiled {
    drone_id: String,
    trough: TroughPoint,
    /// Filtered profile value at the first sample.
    start_value: f64,
    rotation_overlap: bool,
}

fn profile_tag(
    trace: &TagTrace,
    filter: &SavitzkyGolay,
    cfg: &PipelineConfig,
) -> Result<(TroughPoint, f64, bool)> {
    if trace.is_empty() {
        return Err(Error::EmptyTrace {
            tag_id: trace.tag_id.clone(),
        });
    }
    let needed = cfg.min_trace_len();
    if trace.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: trace.len(),
        });
    }
    let spliced = splice(trace);
    let smoothed = spliced.with_phases(&filter.apply(&spliced.phases())?);
    let trough = find_trough_lowest(&smoothed, cfg.guard)?;
    let half = cfg.filter.window / 2;
    let lo = trough.index.saturating_sub(half);
    let hi = trough.index + half + 1;
    let rotation_overlap =
        detect_rotation_events(&spliced, cfg.rotation_threshold, cfg.rotation_sustain)
            .iter()
            .any(|r| r.start < hi && lo < r.end);
    Ok((trough, smoothed.samples[0].phase, rotation_overlap))
}

fn profile_recording(
    rec: &SweepRecording,
    cfg: &PipelineConfig,
) -> Result<(Vec<Profiled>, Vec<TagFailure>)> {
    cfg.validate()?;
    rec.validate()?;
    let filter = SavitzkyGolay::new(cfg.filter)?;
    let mut ok = Vec::new();
    let mut failures = Vec::new();
    for (drone_id, truth) in &rec.ground_truth {
        let empty = TagTrace::new(truth.tag_id.clone());
        let trace = rec.traces.get(&truth.tag_id).unwrap_or(&empty);
        match profile_tag(trace, &filter, cfg) {
            Ok((trough, start_value, rotation_overlap)) => ok.push(Profiled {
                drone_id: drone_id.clone(),
                trough,
                start_value,
                rotation_overlap,
            }),
            Err(e) => failures.push(TagFailure {
                drone_id: drone_id.clone(),
                tag_id: truth.tag_id.clone(),
                reason: e.to_string(),
            }),
        }
    }
    Ok((ok, failures))
}

fn assemble_order(
    axis: Axis,
    sense: RankSense,
    mut located: Vec<Profiled>,
    failures: Vec<TagFailure>,
    key: impl Fn(&Profiled) -> (f64, f64),
) -> AxisOrder {
    located.sort_by(|a, b| {
        let (ka, kb) = (key(a), key(b));
        ka.0.total_cmp(&kb.0)
            .then(ka.1.total_cmp(&kb.1))
            .then_with(|| a.drone_id.cmp(&b.drone_id))
    });
    let mut flags: BTreeMap<String, ConfidenceFlags> = BTreeMap::new();
    for p in &located {
        flags.insert(
            p.drone_id.clone(),
            ConfidenceFlags {
                boundary: p.trough.boundary,
                flat: p.trough.flat,
                rotation_overlap: p.rotation_overlap,
                ..ConfidenceFlags::default()
            },
        );
    }
    for w in located.windows(2) {
        if key(&w[0]).0 == key(&w[1]).0 {
            for p in w {
                flags.get_mut(&p.drone_id).expect("inserted above").tie = true;
            }
        }
    }
    let mut ranking: Vec<String> = located.iter().map(|p| p.drone_id.clone()).collect();
    for f in &failures {
        ranking.push(f.drone_id.clone());
        flags.insert(
            f.drone_id.clone(),
            ConfidenceFlags {
                unlocated: true,
                ..ConfidenceFlags::default()
            },
        );
    }
    AxisOrder {
        axis,
        sense,
        ranking,
        trough_points: located
            .into_iter()
            .map(|p| (p.drone_id, p.trough))
            .collect(),
        flags,
        failures,
    }
}

/// Orders the drones of one sweep by the time of their trough lowest point.
///
/// Ties on the trough round are broken by the lower trough value, then by
/// drone id. Tags without a usable trough are reported in `failures` and
/// ranked last in drone-id order.
pub fn order_axis(rec: &SweepRecording, cfg: &PipelineConfig) -> Result<AxisOrder> {
    let (located, failures) = profile_recording(rec, cfg)?;
    Ok(assemble_order(
        rec.axis,
        RankSense::Descending,
        located,
        failures,
        |p| (p.trough.t, p.trough.value),
    ))
}

/// Orders the drones by how deep their trough goes, deepest (nearest the
/// antenna) first.
///
/// Depth is the drop from the start of the filtered profile to its lowest
/// point, which cancels the per-tag phase offset. It tracks total range to the
/// antenna, so it only ranks the boresight (y) coordinate when every drone
/// shares the remaining coordinate; drones are flagged with `depth_confound`
/// unless the recording's ground truth shows that they do. Only meaningful for
/// drones that share the sweep-axis coordinate.
pub fn order_by_trough_depth(rec: &SweepRecording, cfg: &PipelineConfig) -> Result<AxisOrder> {
    let confound_axis = match rec.axis {
        Axis::X => Axis::Z,
        Axis::Z => Axis::X,
        Axis::Y => return Err(invalid("depth ordering ranks y and needs an x or z sweep")),
    };
    let (located, failures) = profile_recording(rec, cfg)?;
    let mut order = assemble_order(Axis::Y, RankSense::Ascending, located, failures, |p| {
        (p.trough.value - p.start_value, p.trough.t)
    });
    let heights: BTreeSet<u64> = rec
        .ground_truth
        .values()
        .map(|t| t.start.get(confound_axis).to_bits())
        .collect();
    if heights.len() != 1 {
        for f in order.flags.values_mut() {
            f.depth_confound = true;
        }
    }
    Ok(order)
}

/// Runs the ordering on three sweeps and assembles per-drone rank triples.
pub fn locate_swarm(
    rec_x: &SweepRecording,
    rec_y: &SweepRecording,
    rec_z: &SweepRecording,
    cfg: &PipelineConfig,
) -> Result<SwarmLocation> {
    let recs = [rec_x, rec_y, rec_z];
    for (rec, axis) in recs.iter().zip(Axis::ALL) {
        if rec.axis != axis {
            return Err(Error::InconsistentRecordings(format!(
                "expected a {axis} sweep, got a {} sweep",
                rec.axis
            )));
        }
    }
    let swarm: BTreeMap<&String, &String> = rec_x
        .ground_truth
        .iter()
        .map(|(d, t)| (d, &t.tag_id))
        .collect();
    for rec in &recs[1..] {
        let other: BTreeMap<&String, &String> = rec
            .ground_truth
            .iter()
            .map(|(d, t)| (d, &t.tag_id))
            .collect();
        if other != swarm {
            return Err(Error::InconsistentRecordings(format!(
                "the {} sweep carries a different drone/tag set than the x sweep",
                rec.axis
            )));
        }
    }

    let mut axes = Vec::with_capacity(3);
    let mut ranks: BTreeMap<String, RankTriple> = BTreeMap::new();
    for rec in recs {
        let order = order_axis(rec, cfg)?;
        for (rank, drone) in order.ranking.iter().enumerate() {
            ranks
                .entry(drone.clone())
                .or_insert(RankTriple { x: 0, y: 0, z: 0 })
                .set(order.axis, rank);
        }
        axes.push(order);
    }
    Ok(SwarmLocation {
        geometry: SwarmGeometry { ranks },
        axes,
    })
}
