//! Relative localization of an RFID-tagged drone swarm from backscatter phase.
//!
//! Each drone carries one passive tag. While the swarm flies a straight sweep
//! along one world axis, every tag's phase profile dips into a trough as it
//! passes the reader antenna; the order in which the trough minima occur is the
//! order of the drones along that axis. Three sweeps (x, y, z) give a rank
//! triple per drone.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure
//! computation:
//!
//! - [`sim`]: ground-truth sweeps and synthetic phase recordings.
//! - [`trace`], [`filter`], [`rotation`]: trace assembly, Savitzky-Golay
//!   smoothing and rotation-step flagging.
//! - [`trough`]: phase splicing and single-pass trough minimum extraction.
//! - [`locate`]: per-axis ordering and swarm geometry assembly.
//! - [`metrics`], [`experiment`]: ground-truth scoring and the seeded
//!   Monte-Carlo harness.
//!
//! File formats, reports and the command-line driver live in the `phaseloc`
//! crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod error;
pub mod experiment;
pub mod filter;
pub mod geometry;
pub mod locate;
mod math;
pub mod metrics;
pub mod rotation;
pub mod sim;
pub mod trace;
pub mod trough;

pub use error::{Error, Result};
pub use geometry::{Axis, Point3};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// 2π.
pub const TAU: f64 = core::f64::consts::TAU;
