//! Seeded Monte-Carlo evaluation of the localization pipeline.
//!
//! A trial draws per-tag phase offsets, flies the formation through an x, a y
//! and a z sweep, locates the swarm and scores the ranks against the
//! formation. Trial `i` draws from ChaCha stream `i` of the master seed, so the
//! same trial sees the same randomness at every grid point and trials can run
//! in any order or in parallel.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Axis, Point3};
use crate::locate::{locate_swarm, PipelineConfig};
use crate::math;
use crate::metrics::{
    geometry_accuracy, pairwise_accuracy, truth_geometry, TrialFailure, TrialReport,
};
use crate::sim::{
    make_axis_sweep, simulate_recording, DroneSpec, DroneTrajectory, NoiseModel, ReaderConfig,
    RotationEvent, SweepRecording,
};
use crate::TAU;

/// Phase noise of the documented calibration point, radians.
pub const CALIBRATION_PHASE_SIGMA: f64 = 0.6;
/// Read-drop probability of the documented calibration point.
pub const CALIBRATION_READ_DROP: f64 = 0.1;
/// Axis spacing of the default formation, m (just above half a wavelength at 915 MHz).
pub const DEFAULT_FORMATION_SPACING: f64 = 0.17;

/// Flight speed modes of the drones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedMode {
    Low,
    Medium,
    High,
}

impl SpeedMode {
    pub fn meters_per_second(self) -> f64 {
        match self {
            SpeedMode::Low => 0.15,
            SpeedMode::Medium => 1.0,
            SpeedMode::High => 2.0,
        }
    }
}

/// A preset name (`"low"`, `"medium"`, `"high"`) or a speed in m/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepSpeed {
    Preset(SpeedMode),
    Custom(f64),
}

impl SweepSpeed {
    pub fn meters_per_second(self) -> f64 {
        match self {
            SweepSpeed::Preset(m) => m.meters_per_second(),
            SweepSpeed::Custom(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormationMember {
    pub drone_id: String,
    pub tag_id: String,
    /// Position relative to the formation origin, m.
    pub offset: Point3,
}

/// How each sweep is flown past the reader.
///
/// The formation passes at `reader_distance` from the antenna: along +y for
/// the x and z sweeps, along +x for the y sweep. The lead drone starts
/// `margin` before the antenna on the sweep axis and the last drone ends
/// `margin` past it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    pub speed: SweepSpeed,
    #[serde(default = "default_reader_distance")]
    pub reader_distance: f64,
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Overrides the duration derived from formation extent and margin.
    #[serde(default)]
    pub duration: Option<f64>,
    /// Sweeps written by a single simulation run. Evaluation always flies all three.
    #[serde(default = "all_axes")]
    pub axes: Vec<Axis>,
}

fn all_axes() -> Vec<Axis> {
    Axis::ALL.to_vec()
}

fn default_reader_distance() -> f64 {
    1.5
}

fn default_margin() -> f64 {
    0.5
}

impl Default for SweepSettings {
    fn default() -> Self {
        Self {
            speed: SweepSpeed::Preset(SpeedMode::Low),
            reader_distance: default_reader_distance(),
            margin: default_margin(),
            duration: None,
            axes: all_axes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSettings {
    #[serde(default)]
    pub phase_sigma: f64,
    #[serde(default)]
    pub read_drop_prob: f64,
    /// Applied to every sweep of every trial.
    #[serde(default)]
    pub rotation_events: Vec<RotationEvent>,
}

/// Parameter values to sweep. An empty list keeps the base value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub phase_sigma: Vec<f64>,
    pub read_drop_prob: Vec<f64>,
    pub speed: Vec<SweepSpeed>,
    pub reader_distance: Vec<f64>,
    /// Multiplies every formation offset.
    pub spacing_scale: Vec<f64>,
}

/// One combination of grid parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub phase_sigma: f64,
    pub read_drop_prob: f64,
    pub speed: f64,
    pub reader_distance: f64,
    pub spacing_scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub formation: Vec<FormationMember>,
    #[serde(default)]
    pub reader: ReaderConfig,
    #[serde(default)]
    pub sweep: SweepSettings,
    #[serde(default)]
    pub noise: NoiseSettings,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default = "default_trials")]
    pub trials: u64,
    /// Mandatory: every run is reproducible from it.
    pub master_seed: u64,
    #[serde(default)]
    pub grid: Grid,
}

fn default_trials() -> u64 {
    1
}

/// Five drones staggered in 3D: every axis holds five distinct coordinates
/// `spacing` apart, in a different drone order on each axis.
pub fn staggered_formation(spacing: f64) -> Vec<FormationMember> {
    const SLOTS: [[f64; 3]; 5] = [
        [0.0, 2.0, 1.0],
        [1.0, 0.0, 3.0],
        [2.0, 4.0, 0.0],
        [3.0, 1.0, 4.0],
        [4.0, 3.0, 2.0],
    ];
    SLOTS
        .iter()
        .enumerate()
        .map(|(i, s)| FormationMember {
            drone_id: format!("drone-{i}"),
            tag_id: format!("tag-{i}"),
            offset: Point3::new(s[0], s[1], s[2]) * spacing,
        })
        .collect()
}

impl ExperimentConfig {
    /// The default five-drone formation at low speed with the calibration
    /// noise point.
    pub fn calibration(master_seed: u64, trials: u64) -> Self {
        Self {
            formation: staggered_formation(DEFAULT_FORMATION_SPACING),
            reader: ReaderConfig::default(),
            sweep: SweepSettings::default(),
            noise: NoiseSettings {
                phase_sigma: CALIBRATION_PHASE_SIGMA,
                read_drop_prob: CALIBRATION_READ_DROP,
                rotation_events: Vec::new(),
            },
            pipeline: PipelineConfig::default(),
            trials,
            master_seed,
            grid: Grid::default(),
        }
    }

    pub fn base_point(&self) -> GridPoint {
        GridPoint {
            phase_sigma: self.noise.phase_sigma,
            read_drop_prob: self.noise.read_drop_prob,
            speed: self.sweep.speed.meters_per_second(),
            reader_distance: self.sweep.reader_distance,
            spacing_scale: 1.0,
        }
    }

    /// Cartesian product of the grid, in a fixed nesting order.
    pub fn grid_points(&self) -> Vec<GridPoint> {
        let base = self.base_point();
        let or_base = |v: &Vec<f64>, b: f64| if v.is_empty() { vec![b] } else { v.clone() };
        let sigmas = or_base(&self.grid.phase_sigma, base.phase_sigma);
        let drops = or_base(&self.grid.read_drop_prob, base.read_drop_prob);
        let speeds: Vec<f64> = if self.grid.speed.is_empty() {
            vec![base.speed]
        } else {
            self.grid
                .speed
                .iter()
                .map(|s| s.meters_per_second())
                .collect()
        };
        let distances = or_base(&self.grid.reader_distance, base.reader_distance);
        let scales = or_base(&self.grid.spacing_scale, 1.0);
        let mut points = Vec::new();
        for &phase_sigma in &sigmas {
            for &read_drop_prob in &drops {
                for &speed in &speeds {
                    for &reader_distance in &distances {
                        for &spacing_scale in &scales {
                            points.push(GridPoint {
                                phase_sigma,
                                read_drop_prob,
                                speed,
                                reader_distance,
                                spacing_scale,
                            });
                        }
                    }
                }
            }
        }
        points
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        if self.trials == 0 {
            return cfg_err("trials must be at least 1".into());
        }
        if self.formation.len() < 2 {
            return cfg_err("the formation needs at least two drones".into());
        }
        let mut ids = BTreeMap::new();
        let mut tags = BTreeMap::new();
        for m in &self.formation {
            if ids.insert(m.drone_id.as_str(), ()).is_some() {
                return cfg_err(format!("duplicate drone id {}", m.drone_id));
            }
            if tags.insert(m.tag_id.as_str(), ()).is_some() {
                return cfg_err(format!("duplicate tag id {}", m.tag_id));
            }
            if !m.offset.is_finite() {
                return cfg_err(format!("drone {} has a non-finite offset", m.drone_id));
            }
        }
        for axis in Axis::ALL {
            let first = self.formation[0].offset.get(axis);
            if self.formation.iter().all(|m| m.offset.get(axis) == first) {
                return cfg_err(format!("all drones share the same {axis} coordinate"));
            }
        }
        self.reader
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        self.pipeline
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        if !(self.sweep.margin.is_finite() && self.sweep.margin >= 0.0) {
            return cfg_err("sweep margin must be non-negative".into());
        }
        if self.sweep.axes.is_empty() {
            return cfg_err("sweep.axes must list at least one axis".into());
        }
        for (i, a) in self.sweep.axes.iter().enumerate() {
            if self.sweep.axes[..i].contains(a) {
                return cfg_err(format!("axis {a} listed twice in sweep.axes"));
            }
        }
        if let Some(d) = self.sweep.duration {
            if !(d.is_finite() && d > 0.0) {
                return cfg_err("sweep duration must be positive".into());
            }
        }
        for p in self.grid_points() {
            if !(p.speed.is_finite() && p.speed > 0.0) {
                return cfg_err(format!("sweep speed {} must be positive", p.speed));
            }
            if !(p.reader_distance.is_finite() && p.reader_distance > 0.0) {
                return cfg_err(format!(
                    "reader distance {} must be positive",
                    p.reader_distance
                ));
            }
            if !(p.spacing_scale.is_finite() && p.spacing_scale > 0.0) {
                return cfg_err(format!(
                    "spacing scale {} must be positive",
                    p.spacing_scale
                ));
            }
            self.noise_model(&p, 0)
                .validate()
                .map_err(|e| Error::Config(e.to_string()))?;
            // Formation spacing is checked by building the sweeps once.
            let offsets = vec![0.0; self.formation.len()];
            for axis in Axis::ALL {
                self.trajectories(&p, axis, &offsets)
                    .map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Formation positions used as ground truth at a grid point.
    pub fn truth_positions(&self, point: &GridPoint) -> BTreeMap<String, Point3> {
        self.formation
            .iter()
            .map(|m| (m.drone_id.clone(), m.offset * point.spacing_scale))
            .collect()
    }

    pub fn sweep_duration(&self, point: &GridPoint, axis: Axis) -> f64 {
        if let Some(d) = self.sweep.duration {
            return d;
        }
        let coords: Vec<f64> = self
            .formation
            .iter()
            .map(|m| m.offset.get(axis) * point.spacing_scale)
            .collect();
        let extent = coords.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            - coords.iter().copied().fold(f64::INFINITY, f64::min);
        (extent + 2.0 * self.sweep.margin) / point.speed
    }

    /// Trajectories of the sweep along `axis`; `phase_offsets` follows
    /// formation order.
    pub fn trajectories(
        &self,
        point: &GridPoint,
        axis: Axis,
        phase_offsets: &[f64],
    ) -> Result<Vec<DroneTrajectory>> {
        let standoff_axis = match axis {
            Axis::X | Axis::Z => Axis::Y,
            Axis::Y => Axis::X,
        };
        let scaled: Vec<Point3> = self
            .formation
            .iter()
            .map(|m| m.offset * point.spacing_scale)
            .collect();
        let lead = scaled
            .iter()
            .map(|p| p.get(axis))
            .fold(f64::NEG_INFINITY, f64::max);
        let base = self.reader.position + standoff_axis.unit() * point.reader_distance;
        let specs: Vec<DroneSpec> = self
            .formation
            .iter()
            .zip(&scaled)
            .zip(phase_offsets)
            .map(|((m, off), &mu)| {
                let mut start = base + *off;
                start.set(
                    axis,
                    self.reader.position.get(axis) - self.sweep.margin - lead + off.get(axis),
                );
                DroneSpec {
                    drone_id: m.drone_id.clone(),
                    tag_id: m.tag_id.clone(),
                    start,
                    phase_offset: mu,
                }
            })
            .collect();
        make_axis_sweep(
            &specs,
            axis,
            point.speed,
            self.sweep_duration(point, axis),
            self.reader.wavelength(),
        )
    }

    fn noise_model(&self, point: &GridPoint, seed: u64) -> NoiseModel {
        NoiseModel {
            phase_sigma: point.phase_sigma,
            read_drop_prob: point.read_drop_prob,
            rotation_events: self.noise.rotation_events.clone(),
            seed,
        }
    }

    /// RNG of trial `trial`: ChaCha stream `trial` under the master seed.
    pub fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(trial);
        rng
    }

    /// Simulates the three sweeps of one trial.
    pub fn simulate_trial(&self, point: &GridPoint, trial: u64) -> Result<[SweepRecording; 3]> {
        let mut rng = self.trial_rng(trial);
        let offsets: Vec<f64> = self
            .formation
            .iter()
            .map(|_| rng.random_range(0.0..TAU))
            .collect();
        let mut simulate = |axis: Axis| -> Result<SweepRecording> {
            let seed = rng.next_u64();
            let trajs = self.trajectories(point, axis, &offsets)?;
            simulate_recording(&trajs, &self.reader, &self.noise_model(point, seed))
        };
        Ok([simulate(Axis::X)?, simulate(Axis::Y)?, simulate(Axis::Z)?])
    }
}

/// Runs trial `trial` at `point`: simulate, locate, score.
pub fn run_trial(cfg: &ExperimentConfig, point: &GridPoint, trial: u64) -> Result<TrialReport> {
    let [rx, ry, rz] = cfg.simulate_trial(point, trial)?;
    let located = locate_swarm(&rx, &ry, &rz, &cfg.pipeline)?;
    let truth = cfg.truth_positions(point);
    let mut per_axis_accuracy = BTreeMap::new();
    let mut failures = Vec::new();
    for order in &located.axes {
        per_axis_accuracy.insert(order.axis, pairwise_accuracy(order, &truth)?);
        failures.extend(order.failures.iter().map(|f| TrialFailure {
            axis: order.axis,
            drone_id: f.drone_id.clone(),
            tag_id: f.tag_id.clone(),
            reason: f.reason.clone(),
        }));
    }
    Ok(TrialReport {
        trial,
        per_axis_accuracy,
        geometry_accuracy: geometry_accuracy(&located.geometry, &truth_geometry(&truth))?,
        failures,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub name: String,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl MetricSummary {
    fn of(name: &str, values: &[f64]) -> Self {
        Self {
            name: name.into(),
            mean: math::mean(values),
            std: math::std_dev(values),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub point: GridPoint,
    pub trials: u64,
    pub metrics: Vec<MetricSummary>,
    /// Number of (trial, axis, tag) combinations without a usable trough.
    pub failed_tags: u64,
}

impl PointReport {
    pub fn metric(&self, name: &str) -> Option<&MetricSummary> {
        self.metrics.iter().find(|m| m.name == name)
    }
}

pub const METRIC_NAMES: [&str; 5] = [
    "accuracy_x",
    "accuracy_y",
    "accuracy_z",
    "accuracy_axis_mean",
    "geometry",
];

/// Summarizes the trials of one grid point. Reports are sorted by trial index
/// first, so the result does not depend on completion order.
pub fn aggregate(point: GridPoint, reports: &[TrialReport]) -> PointReport {
    let mut sorted: Vec<&TrialReport> = reports.iter().collect();
    sorted.sort_by_key(|r| r.trial);
    let axis_values = |a: Axis| -> Vec<f64> {
        sorted
            .iter()
            .map(|r| r.per_axis_accuracy.get(&a).copied().unwrap_or(0.0))
            .collect()
    };
    let mean_axis: Vec<f64> = sorted.iter().map(|r| r.mean_axis_accuracy()).collect();
    let geometry: Vec<f64> = sorted.iter().map(|r| r.geometry_accuracy).collect();
    let metrics = vec![
        MetricSummary::of(METRIC_NAMES[0], &axis_values(Axis::X)),
        MetricSummary::of(METRIC_NAMES[1], &axis_values(Axis::Y)),
        MetricSummary::of(METRIC_NAMES[2], &axis_values(Axis::Z)),
        MetricSummary::of(METRIC_NAMES[3], &mean_axis),
        MetricSummary::of(METRIC_NAMES[4], &geometry),
    ];
    PointReport {
        point,
        trials: sorted.len() as u64,
        metrics,
        failed_tags: sorted.iter().map(|r| r.failures.len() as u64).sum(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub master_seed: u64,
    pub trials: u64,
    pub points: Vec<PointReport>,
}

/// Runs every grid point sequentially.
pub fn run_monte_carlo(cfg: &ExperimentConfig) -> Result<AggregateReport> {
    cfg.validate()?;
    let mut points = Vec::new();
    for point in cfg.grid_points() {
        let reports = (0..cfg.trials)
            .map(|i| run_trial(cfg, &point, i))
            .collect::<Result<Vec<_>>>()?;
        points.push(aggregate(point, &reports));
    }
    Ok(AggregateReport {
        master_seed: cfg.master_seed,
        trials: cfg.trials,
        points,
    })
}
