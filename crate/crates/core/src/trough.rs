//! Phase splicing and trough lowest-point extraction.
//!
//! Raw phase wraps every half wavelength of reader-tag distance. Splicing
//! stitches the wrapped segments into one continuous profile, in which a tag
//! passing the antenna draws a single trough whose global minimum marks its
//! closest approach.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::trace::TagTrace;
use crate::TAU;

/// Default half-width, in samples, of the neighbourhood a trough minimum is
/// checked against.
pub const DEFAULT_GUARD: usize = 5;

/// Lowest point of a tag's trough.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TroughPoint {
    pub tag_id: String,
    /// Sample index into the trace the point was found in.
    pub index: usize,
    /// Timestamp of that sample, seconds.
    pub t: f64,
    /// Spliced (and possibly filtered) phase at `index`.
    pub value: f64,
    /// The `±guard` neighbourhood runs past either end of the trace, so the
    /// trough may be truncated by the recording window.
    pub boundary: bool,
    /// A later sample within `guard` ties the minimum value.
    pub flat: bool,
}

/// Removes 2π discontinuities in one left-to-right pass.
///
/// Each sample is compared with its already-corrected predecessor. A jump
/// above π is pulled down by `⌈jump / 2π⌉·2π`, a jump below −π is pushed up by
/// `⌈|jump| / 2π⌉·2π`, and the correction carries over to every later sample.
pub fn splice_phases(raw: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    let mut offset = 0.0;
    for (i, &theta) in raw.iter().enumerate() {
        if i == 0 {
            out.push(theta);
            continue;
        }
        let prev = out[i - 1];
        let diff = theta + offset - prev;
        if diff > PI {
            offset -= math::ceil(diff / TAU) * TAU;
        } else if diff < -PI {
            offset += math::ceil(-diff / TAU) * TAU;
        }
        out.push(theta + offset);
    }
    out
}

pub fn splice(trace: &TagTrace) -> TagTrace {
    trace.with_phases(&splice_phases(&trace.phases()))
}

/// Single-pass search for the trough lowest point.
///
/// A running minimum is kept over one scan of the profile, so the returned
/// index is the earliest global minimum. The `±guard` neighbourhood of that
/// index is then inspected to set the `boundary` and `flat` flags. With
/// `guard = 1` this is the plain three-point rule `θ[t] < θ[t−1]`,
/// `θ[t] < θ[t+1]` evaluated at the global minimum.
pub fn find_trough_lowest(spliced: &TagTrace, guard: usize) -> Result<TroughPoint> {
    find_trough_lowest_counted(spliced, guard).map(|(p, _)| p)
}

/// [`find_trough_lowest`] that also reports how many value comparisons it made.
pub fn find_trough_lowest_counted(
    spliced: &TagTrace,
    guard: usize,
) -> Result<(TroughPoint, usize)> {
    let n = spliced.len();
    let needed = 2 * guard + 1;
    if n < needed || n == 0 {
        return Err(Error::InsufficientData {
            needed: needed.max(1),
            got: n,
        });
    }
    let s = &spliced.samples;
    let mut comparisons = 0usize;
    let mut best = 0usize;
    for i in 1..n {
        comparisons += 1;
        if s[i].phase < s[best].phase {
            best = i;
        }
    }
    // Every sample before `best` is strictly higher by construction; only the
    // right-hand neighbourhood can tie.
    let mut flat = false;
    for j in best + 1..n.min(best + guard + 1) {
        comparisons += 1;
        if s[j].phase == s[best].phase {
            flat = true;
            break;
        }
    }
    let point = TroughPoint {
        tag_id: spliced.tag_id.clone(),
        index: best,
        t: s[best].t,
        value: s[best].phase,
        boundary: best < guard || best + guard >= n,
        flat,
    };
    Ok((point, comparisons))
}

/// Full-scan argmin, ties to the smallest index. Reference for
/// [`find_trough_lowest`].
pub fn brute_force_min(spliced: &TagTrace) -> Option<usize> {
    let s = &spliced.samples;
    if s.is_empty() {
        return None;
    }
    let lowest = s.iter().map(|v| v.phase).fold(f64::INFINITY, f64::min);
    s.iter().position(|v| v.phase == lowest)
}
