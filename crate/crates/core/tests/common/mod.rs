#![allow(dead_code)]

use phaseloc_core::sim::{
    make_axis_sweep, simulate_recording, DroneSpec, NoiseModel, ReaderConfig, RotationEvent,
    SweepRecording,
};
use phaseloc_core::{Axis, Point3};

pub const SPEED: f64 = 0.15;
pub const STANDOFF: f64 = 1.5;
pub const MARGIN: f64 = 0.5;

pub fn reader() -> ReaderConfig {
    ReaderConfig::default()
}

/// One tag passing the reader along +x at `standoff` on y, from -MARGIN to +MARGIN.
pub fn single_pass(standoff: f64, mu: f64, noise: &NoiseModel) -> SweepRecording {
    let spec = DroneSpec {
        drone_id: "d".into(),
        tag_id: "t".into(),
        start: Point3::new(-MARGIN, standoff, 0.0),
        phase_offset: mu,
    };
    let r = reader();
    let trajs = make_axis_sweep(
        &[spec],
        Axis::X,
        SPEED,
        2.0 * MARGIN / SPEED,
        r.wavelength(),
    )
    .unwrap();
    simulate_recording(&trajs, &r, noise).unwrap()
}

pub fn noise(sigma: f64, drop: f64, seed: u64) -> NoiseModel {
    NoiseModel {
        phase_sigma: sigma,
        read_drop_prob: drop,
        rotation_events: Vec::new(),
        seed,
    }
}

pub fn step(tag: &str, time: f64, phase_step: f64) -> RotationEvent {
    RotationEvent {
        tag_id: tag.into(),
        time,
        phase_step,
    }
}

/// Two drones at equal x: a is lower in y but higher in z, so it is farther
/// from the reader in total range.
pub fn confound_positions() -> [(&'static str, Point3); 2] {
    [
        ("a", Point3::new(0.0, 1.5, 1.0)),
        ("b", Point3::new(0.0, 1.7, 0.0)),
    ]
}

/// Sweeps `positions` along `axis` past a reader at the origin. The x and z
/// sweeps keep the formation's own y distance; the y sweep adds a standoff
/// along x.
pub fn sweep_formation(
    positions: &[(&str, Point3)],
    axis: Axis,
    noise: &NoiseModel,
) -> SweepRecording {
    let r = reader();
    let coords: Vec<f64> = positions.iter().map(|(_, p)| p.get(axis)).collect();
    let lead = coords.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let trail = coords.iter().copied().fold(f64::INFINITY, f64::min);
    let specs: Vec<DroneSpec> = positions
        .iter()
        .enumerate()
        .map(|(i, (id, p))| {
            let mut start = *p;
            if axis == Axis::Y {
                start.set(Axis::X, p.get(Axis::X) + STANDOFF);
            }
            start.set(axis, p.get(axis) - lead - MARGIN);
            DroneSpec {
                drone_id: (*id).into(),
                tag_id: format!("tag-{id}"),
                start,
                phase_offset: 0.3 * i as f64,
            }
        })
        .collect();
    let duration = (lead - trail + 2.0 * MARGIN) / SPEED;
    let trajs = make_axis_sweep(&specs, axis, SPEED, duration, r.wavelength()).unwrap();
    simulate_recording(&trajs, &r, noise).unwrap()
}
