//! Ground-truth sweeps and synthetic backscatter phase recordings.
//!
//! The reader measures the round-trip carrier phase of each tag,
//! `θ = (4π·d/λ + μ) mod 2π`, once per inventory round. A recording holds one
//! phase stream per tag for a single axis-aligned sweep of the swarm.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Axis, Point3};
use crate::math;
use crate::trace::{PhaseSample, TagTrace};
use crate::{SPEED_OF_LIGHT, TAU};

/// Lower edge of the UHF RFID band, Hz.
pub const BAND_MIN_HZ: f64 = 902.0e6;
/// Upper edge of the UHF RFID band, Hz.
pub const BAND_MAX_HZ: f64 = 928.0e6;
/// Default carrier: middle of the band.
pub const DEFAULT_FREQUENCY_HZ: f64 = 915.0e6;
/// Default inventory-round rate.
pub const DEFAULT_ROUNDS_PER_SECOND: f64 = 40.0;

/// Reader antenna placement and carrier settings.
///
/// The wavelength is always derived from the carrier frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReaderConfig {
    pub position: Point3,
    pub frequency_hz: f64,
    pub rounds_per_second: f64,
    /// Permit a carrier outside 902–928 MHz.
    #[serde(default)]
    pub allow_out_of_band: bool,
}

impl Default for ReaderConfig {
    fn default() -> Self {
        Self {
            position: Point3::ORIGIN,
            frequency_hz: DEFAULT_FREQUENCY_HZ,
            rounds_per_second: DEFAULT_ROUNDS_PER_SECOND,
            allow_out_of_band: false,
        }
    }
}

impl ReaderConfig {
    pub fn new(position: Point3, frequency_hz: f64, rounds_per_second: f64) -> Result<Self> {
        let cfg = Self {
            position,
            frequency_hz,
            rounds_per_second,
            allow_out_of_band: false,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn validate(&self) -> Result<()> {
        if !self.position.is_finite() {
            return Err(invalid("reader position must be finite"));
        }
        if !(self.frequency_hz.is_finite() && self.frequency_hz > 0.0) {
            return Err(invalid("carrier frequency must be finite and positive"));
        }
        if !self.allow_out_of_band && !(BAND_MIN_HZ..=BAND_MAX_HZ).contains(&self.frequency_hz) {
            return Err(invalid(format!(
                "carrier {} Hz outside the 902-928 MHz band",
                self.frequency_hz
            )));
        }
        if !(self.rounds_per_second.is_finite() && self.rounds_per_second > 0.0) {
            return Err(invalid("rounds_per_second must be finite and positive"));
        }
        Ok(())
    }
}

/// A drone's place in the formation at the start of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct DroneSpec {
    pub drone_id: String,
    pub tag_id: String,
    pub start: Point3,
    /// Per-tag phase offset μ in `[0, 2π)`.
    pub phase_offset: f64,
}

/// Straight constant-velocity path of one tagged drone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneTrajectory {
    pub drone_id: String,
    pub tag_id: String,
    pub start: Point3,
    pub velocity: Point3,
    pub duration: f64,
    pub phase_offset: f64,
}

impl DroneTrajectory {
    pub fn position_at(&self, t: f64) -> Point3 {
        self.start + self.velocity * t
    }

    /// The single axis with non-zero velocity, if exactly one exists.
    pub fn sweep_axis(&self) -> Option<Axis> {
        let moving: Vec<Axis> = Axis::ALL
            .into_iter()
            .filter(|a| self.velocity.get(*a) != 0.0)
            .collect();
        match moving.as_slice() {
            [a] => Some(*a),
            _ => None,
        }
    }

    fn validate(&self) -> Result<Axis> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(invalid(format!(
                "drone {}: duration must be positive",
                self.drone_id
            )));
        }
        if !(0.0..TAU).contains(&self.phase_offset) {
            return Err(invalid(format!(
                "drone {}: phase offset must lie in [0, 2π)",
                self.drone_id
            )));
        }
        if !self.start.is_finite() || !self.velocity.is_finite() {
            return Err(invalid(format!(
                "drone {}: non-finite start or velocity",
                self.drone_id
            )));
        }
        self.sweep_axis().ok_or_else(|| {
            invalid(format!(
                "drone {}: velocity must have exactly one non-zero component",
                self.drone_id
            ))
        })
    }
}

/// A step change of a tag's phase caused by the drone rotating.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RotationEvent {
    pub tag_id: String,
    /// Seconds from the start of the sweep.
    pub time: f64,
    /// Phase step in radians, applied to every sample at or after `time`.
    pub phase_step: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Standard deviation of additive Gaussian phase noise, radians.
    #[serde(default)]
    pub phase_sigma: f64,
    /// Probability that a tag is missed in an inventory round.
    #[serde(default)]
    pub read_drop_prob: f64,
    #[serde(default)]
    pub rotation_events: Vec<RotationEvent>,
    #[serde(default)]
    pub seed: u64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phase_sigma.is_finite() && self.phase_sigma >= 0.0) {
            return Err(invalid("phase_sigma must be finite and non-negative"));
        }
        if !(0.0..1.0).contains(&self.read_drop_prob) {
            return Err(invalid("read_drop_prob must lie in [0, 1)"));
        }
        for ev in &self.rotation_events {
            if !ev.time.is_finite() || !ev.phase_step.is_finite() {
                return Err(invalid("rotation events need finite time and step"));
            }
        }
        Ok(())
    }
}

/// Ground truth for one drone in a recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DroneTruth {
    pub tag_id: String,
    /// Position at the start of the sweep.
    pub start: Point3,
}

/// Everything captured during one axis-aligned sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecording {
    pub axis: Axis,
    pub reader: ReaderConfig,
    /// Sweep speed along `axis`, m/s (positive: drones move toward +axis).
    pub speed: f64,
    pub duration: f64,
    /// Keyed by tag id. Tags that were never read have an empty trace.
    pub traces: BTreeMap<String, TagTrace>,
    /// Keyed by drone id.
    pub ground_truth: BTreeMap<String, DroneTruth>,
}

impl SweepRecording {
    /// Drone carrying `tag_id`.
    pub fn drone_for_tag(&self, tag_id: &str) -> Option<&str> {
        self.ground_truth
            .iter()
            .find(|(_, t)| t.tag_id == tag_id)
            .map(|(d, _)| d.as_str())
    }

    /// `(drone_id, trace)` pairs in drone-id order.
    pub fn drone_traces(&self) -> impl Iterator<Item = (&str, Option<&TagTrace>)> {
        self.ground_truth
            .iter()
            .map(move |(d, truth)| (d.as_str(), self.traces.get(&truth.tag_id)))
    }

    /// Checks the tag/drone mapping and per-trace ordering.
    pub fn validate(&self) -> Result<()> {
        let mut seen = BTreeMap::new();
        for (drone, truth) in &self.ground_truth {
            if let Some(other) = seen.insert(truth.tag_id.as_str(), drone.as_str()) {
                return Err(Error::InconsistentRecordings(format!(
                    "tag {} is carried by both {other} and {drone}",
                    truth.tag_id
                )));
            }
        }
        for (tag, trace) in &self.traces {
            if !seen.contains_key(tag.as_str()) {
                return Err(Error::InconsistentRecordings(format!(
                    "tag {tag} has no drone in the ground truth"
                )));
            }
            trace.validate()?;
        }
        Ok(())
    }
}

/// Backscatter phase of a tag at `distance` from the reader.
///
/// A distance that is a whole number of half wavelengths (up to float
/// rounding of the ratio) contributes exactly zero phase.
pub fn ideal_phase(distance: f64, wavelength: f64, offset: f64) -> Result<f64> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(invalid("wavelength must be finite and positive"));
    }
    if !(distance.is_finite() && distance >= 0.0) {
        return Err(invalid("distance must be finite and non-negative"));
    }
    if !offset.is_finite() {
        return Err(invalid("phase offset must be finite"));
    }
    Ok(ideal_phase_unchecked(distance, wavelength, offset))
}

pub(crate) fn ideal_phase_unchecked(distance: f64, wavelength: f64, offset: f64) -> f64 {
    let cycles = 2.0 * distance / wavelength;
    let whole = libm::round(cycles);
    let frac = if (cycles - whole).abs() <= 4.0 * f64::EPSILON * whole.abs() {
        0.0
    } else {
        cycles - math::floor(cycles)
    };
    math::wrap_phase(TAU * frac + offset)
}

/// Time derivative of the unwrapped phase for a tag moving along x at speed
/// `v`, starting from `(x0, y0)` relative to the reader.
pub fn analytic_phase_rate(x0: f64, y0: f64, v: f64, t: f64, wavelength: f64) -> Result<f64> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(invalid("wavelength must be finite and positive"));
    }
    let x = x0 + v * t;
    let denom = math::sqrt(x * x + y0 * y0);
    if denom == 0.0 {
        return Err(Error::Singularity);
    }
    Ok(4.0 * core::f64::consts::PI / wavelength * (v * v * t + v * x0) / denom)
}

/// Builds constant-velocity trajectories for a sweep along `axis`.
///
/// Every pair of drones must start at least `wavelength / 2` apart.
pub fn make_axis_sweep(
    drones: &[DroneSpec],
    axis: Axis,
    speed: f64,
    duration: f64,
    wavelength: f64,
) -> Result<Vec<DroneTrajectory>> {
    if !(speed.is_finite() && speed > 0.0) {
        return Err(invalid("sweep speed must be finite and positive"));
    }
    if !(duration.is_finite() && duration > 0.0) {
        return Err(invalid("sweep duration must be finite and positive"));
    }
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(invalid("wavelength must be finite and positive"));
    }
    let minimum = wavelength / 2.0;
    for (i, a) in drones.iter().enumerate() {
        for b in &drones[i + 1..] {
            let spacing = a.start.distance(&b.start);
            if spacing < minimum {
                return Err(Error::Formation {
                    first: a.drone_id.clone(),
                    second: b.drone_id.clone(),
                    spacing,
                    minimum,
                });
            }
        }
    }
    let velocity = axis.unit() * speed;
    drones
        .iter()
        .map(|d| {
            let traj = DroneTrajectory {
                drone_id: d.drone_id.clone(),
                tag_id: d.tag_id.clone(),
                start: d.start,
                velocity,
                duration,
                phase_offset: d.phase_offset,
            };
            traj.validate()?;
            Ok(traj)
        })
        .collect()
}

/// Synthesizes the phase streams a reader would capture for `trajectories`.
///
/// Round `r` happens at `t = r / rounds_per_second` for `r = 0..=⌊duration·rate⌋`.
/// In each round every tag is read independently with probability
/// `1 − read_drop_prob`. Output is a pure function of the inputs and
/// `noise.seed`.
pub fn simulate_recording(
    trajectories: &[DroneTrajectory],
    reader: &ReaderConfig,
    noise: &NoiseModel,
) -> Result<SweepRecording> {
    reader.validate()?;
    noise.validate()?;
    let first = trajectories
        .first()
        .ok_or_else(|| invalid("at least one trajectory is required"))?;
    let axis = first.validate()?;
    let speed = first.velocity.get(axis);
    let duration = first.duration;

    let mut ground_truth = BTreeMap::new();
    let mut traces = BTreeMap::new();
    for traj in trajectories {
        if traj.validate()? != axis || traj.velocity != first.velocity || traj.duration != duration
        {
            return Err(invalid(
                "all trajectories of a sweep must share velocity and duration",
            ));
        }
        if ground_truth
            .insert(
                traj.drone_id.clone(),
                DroneTruth {
                    tag_id: traj.tag_id.clone(),
                    start: traj.start,
                },
            )
            .is_some()
        {
            return Err(invalid(format!("duplicate drone id {}", traj.drone_id)));
        }
        if traces
            .insert(traj.tag_id.clone(), TagTrace::new(traj.tag_id.clone()))
            .is_some()
        {
            return Err(invalid(format!("duplicate tag id {}", traj.tag_id)));
        }
    }

    let wavelength = reader.wavelength();
    let rate = reader.rounds_per_second;
    let last_round = math::floor(duration * rate) as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);

    for round in 0..=last_round {
        let t = round as f64 / rate;
        for traj in trajectories {
            // Both draws happen for every (round, tag) so the random stream
            // does not depend on which reads were dropped.
            let coin: f64 = rng.random();
            let gauss: f64 = rng.sample(StandardNormal);
            if coin < noise.read_drop_prob {
                continue;
            }
            let distance = traj.position_at(t).distance(&reader.position);
            let step: f64 = noise
                .rotation_events
                .iter()
                .filter(|ev| ev.tag_id == traj.tag_id && ev.time <= t)
                .map(|ev| ev.phase_step)
                .sum();
            let clean = ideal_phase_unchecked(distance, wavelength, traj.phase_offset);
            let phase = math::wrap_phase(clean + noise.phase_sigma * gauss + step);
            traces
                .get_mut(&traj.tag_id)
                .expect("trace created above")
                .samples
                .push(PhaseSample { round, t, phase });
        }
    }

    Ok(SweepRecording {
        axis,
        reader: reader.clone(),
        speed,
        duration,
        traces,
        ground_truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;
    use core::f64::consts::PI;

    const LAMBDA: f64 = 0.3275;

    fn spec(id: &str, start: Point3) -> DroneSpec {
        DroneSpec {
            drone_id: id.to_string(),
            tag_id: format!("tag-{id}"),
            start,
            phase_offset: 0.0,
        }
    }

    #[test]
    fn ideal_phase_trivial_values() {
        assert_eq!(ideal_phase(0.0, LAMBDA, 0.0).unwrap(), 0.0);
        assert_eq!(ideal_phase(LAMBDA / 2.0, LAMBDA, 0.0).unwrap(), 0.0);
        assert_eq!(ideal_phase(0.5 / 2.0, 0.5, 0.0).unwrap(), 0.0);
        let quarter = ideal_phase(LAMBDA / 8.0, LAMBDA, 0.0).unwrap();
        assert!((quarter - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn ideal_phase_regression_constant() {
        // 4π·1.5/0.3275 + 0.7 = 58.2558959...; minus 9·2π = 1.7072281790...
        // Evaluated by hand with the same formula reduced mod 2π.
        let got = ideal_phase(1.5, LAMBDA, 0.7).unwrap();
        let raw = 4.0 * PI * 1.5 / LAMBDA + 0.7;
        let expected = raw - 9.0 * TAU;
        assert!((0.0..TAU).contains(&expected));
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
        assert!((got - 1.707_228_179_013_519).abs() < 1e-12, "{got}");
    }

    #[test]
    fn ideal_phase_rejects_bad_wavelength() {
        assert!(matches!(
            ideal_phase(1.0, 0.0, 0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            ideal_phase(1.0, -1.0, 0.0),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            ideal_phase(1.0, f64::NAN, 0.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn phase_rate_zero_at_closest_approach_and_when_stationary() {
        let (x0, v) = (-1.0, 0.15);
        assert_eq!(
            analytic_phase_rate(x0, 0.5, v, -x0 / v, LAMBDA).unwrap(),
            0.0
        );
        for t in [0.0, 1.0, 7.5] {
            assert_eq!(analytic_phase_rate(x0, 0.5, 0.0, t, LAMBDA).unwrap(), 0.0);
        }
        assert_eq!(
            analytic_phase_rate(0.0, 0.0, 0.0, 0.0, LAMBDA),
            Err(Error::Singularity)
        );
    }

    #[test]
    fn axis_sweep_sets_velocity_and_keeps_formation() {
        let drones = vec![
            spec("a", Point3::new(0.0, 1.5, 0.0)),
            spec("b", Point3::new(0.2, 1.5, 0.0)),
        ];
        let trajs = make_axis_sweep(&drones, Axis::X, 0.15, 10.0, LAMBDA).unwrap();
        assert_eq!(trajs.len(), 2);
        for (t, d) in trajs.iter().zip(&drones) {
            assert_eq!(t.velocity, Point3::new(0.15, 0.0, 0.0));
            assert_eq!(t.start, d.start);
        }
        assert!(make_axis_sweep(&[], Axis::Y, 1.0, 1.0, LAMBDA)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn axis_sweep_rejects_tight_spacing() {
        let lambda = SPEED_OF_LIGHT / DEFAULT_FREQUENCY_HZ;
        let drones = vec![
            spec("a", Point3::ORIGIN),
            spec("b", Point3::new(0.1, 0.0, 0.0)),
        ];
        match make_axis_sweep(&drones, Axis::X, 0.15, 10.0, lambda) {
            Err(Error::Formation {
                first,
                second,
                minimum,
                ..
            }) => {
                assert_eq!((first.as_str(), second.as_str()), ("a", "b"));
                assert!((minimum - 0.1638).abs() < 1e-3);
            }
            other => panic!("expected formation error, got {other:?}"),
        }
    }

    #[test]
    fn reader_band_check() {
        assert!(ReaderConfig::new(Point3::ORIGIN, 900e6, 40.0).is_err());
        assert!(ReaderConfig::new(Point3::ORIGIN, 915e6, 0.0).is_err());
        let r = ReaderConfig {
            frequency_hz: 2.4e9,
            allow_out_of_band: true,
            ..ReaderConfig::default()
        };
        assert!(r.validate().is_ok());
        assert!((ReaderConfig::default().wavelength() - 0.32764).abs() < 1e-4);
    }

    fn single_pass(noise: &NoiseModel) -> SweepRecording {
        let drones = vec![spec("a", Point3::new(-1.0, 1.5, 0.0))];
        let trajs = make_axis_sweep(&drones, Axis::X, 0.15, 13.0, LAMBDA).unwrap();
        simulate_recording(&trajs, &ReaderConfig::default(), noise).unwrap()
    }

    #[test]
    fn sparse_trace_remains_sorted() {
        let noise = NoiseModel {
            read_drop_prob: 0.98,
            seed: 11,
            ..NoiseModel::default()
        };
        let rec = single_pass(&noise);
        let trace = &rec.traces["tag-a"];
        assert!(trace.samples.len() < 60);
        trace.validate().unwrap();
        assert!(trace.samples.windows(2).all(|w| w[0].t < w[1].t));
    }

    #[test]
    fn rotation_step_shows_in_raw_trace() {
        let noise = NoiseModel {
            rotation_events: vec![RotationEvent {
                tag_id: "tag-a".into(),
                time: 2.0,
                phase_step: PI,
            }],
            ..NoiseModel::default()
        };
        let rec = single_pass(&noise);
        let s = &rec.traces["tag-a"].samples;
        let k = s.iter().position(|p| p.t >= 2.0).unwrap();
        let jump = (s[k].phase - s[k - 1].phase).rem_euclid(TAU);
        let circ = jump.min(TAU - jump);
        assert!(circ > 2.5, "step not visible: {circ}");
        for w in s.windows(2).filter(|w| w[1].t != s[k].t) {
            let d = (w[1].phase - w[0].phase).rem_euclid(TAU);
            assert!(d.min(TAU - d) < 0.5);
        }
    }

    #[test]
    fn identical_seed_identical_recording() {
        let noise = NoiseModel {
            phase_sigma: 0.2,
            read_drop_prob: 0.2,
            seed: 99,
            ..NoiseModel::default()
        };
        assert_eq!(single_pass(&noise), single_pass(&noise));
        let other = NoiseModel {
            seed: 100,
            ..noise.clone()
        };
        assert_ne!(single_pass(&noise), single_pass(&other));
    }
}
