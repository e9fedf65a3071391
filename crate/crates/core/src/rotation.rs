//! Flagging of step-like phase changes caused by a drone rotating in flight.

use alloc::vec::Vec;
use core::ops::Range;

use crate::math::median_in_place;
use crate::trace::TagTrace;

/// Default step threshold, radians.
pub const DEFAULT_STEP_THRESHOLD: f64 = 1.0;
/// Default number of samples on each side of a candidate step.
pub const DEFAULT_SUSTAIN: usize = 9;

/// Finds index ranges where the phase level shifts abruptly.
///
/// Index `i` is flagged when the median of the `sustain` samples before it and
/// the median of the `sustain` samples starting at it differ by more than
/// `step_threshold`. Consecutive flagged indices are merged into maximal
/// ranges. The trace must already be spliced. Nothing is removed; callers
/// decide what to do with the ranges.
pub fn detect_rotation_events(
    trace: &TagTrace,
    step_threshold: f64,
    sustain: usize,
) -> Vec<Range<usize>> {
    let phases = trace.phases();
    let n = phases.len();
    let mut ranges: Vec<Range<usize>> = Vec::new();
    if sustain == 0 || n < 2 * sustain {
        return ranges;
    }
    let mut before = Vec::with_capacity(sustain);
    let mut after = Vec::with_capacity(sustain);
    for i in sustain..=n - sustain {
        before.clear();
        before.extend_from_slice(&phases[i - sustain..i]);
        after.clear();
        after.extend_from_slice(&phases[i..i + sustain]);
        let shift = median_in_place(&mut after) - median_in_place(&mut before);
        if shift.abs() > step_threshold {
            match ranges.last_mut() {
                Some(r) if r.end == i => r.end = i + 1,
                _ => ranges.push(i..i + 1),
            }
        }
    }
    ranges
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::PhaseSample;
    use alloc::vec;
    use core::f64::consts::PI;

    fn trace(phases: &[f64]) -> TagTrace {
        TagTrace {
            tag_id: "t".into(),
            samples: phases
                .iter()
                .enumerate()
                .map(|(i, &phase)| PhaseSample {
                    round: i as u64,
                    t: i as f64 / 40.0,
                    phase,
                })
                .collect(),
        }
    }

    #[test]
    fn single_step_gives_one_range() {
        let mut p: Vec<f64> = (0..200)
            .map(|i| 0.001 * (i as f64 - 100.0).powi(2) / 10.0)
            .collect();
        for v in &mut p[120..] {
            *v += PI;
        }
        let flags = detect_rotation_events(&trace(&p), 1.0, 9);
        assert_eq!(flags.len(), 1);
        assert!(flags[0].contains(&120), "{flags:?}");
    }

    #[test]
    fn smooth_or_constant_traces_are_clean() {
        let trough: Vec<f64> = (0..300)
            .map(|i| 40.0 + ((i as f64 - 150.0) * 0.01).powi(2))
            .collect();
        assert!(detect_rotation_events(&trace(&trough), 1.0, 9).is_empty());
        assert!(detect_rotation_events(&trace(&vec![3.0; 100]), 1.0, 9).is_empty());
    }

    #[test]
    fn short_trace_is_not_flagged() {
        assert!(detect_rotation_events(&trace(&[0.0, 5.0, 5.0]), 1.0, 9).is_empty());
    }
}
