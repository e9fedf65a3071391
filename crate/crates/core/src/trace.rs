//! Per-tag phase streams.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One phase reading of one tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSample {
    /// Inventory round index.
    pub round: u64,
    /// Seconds since the start of the sweep.
    pub t: f64,
    /// Radians. In `[0, 2π)` for raw traces; unbounded once spliced.
    pub phase: f64,
}

/// A reading of a specific tag, as it arrives from the reader.
#[derive(Debug, Clone, PartialEq)]
pub struct TaggedSample {
    pub tag_id: String,
    pub sample: PhaseSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagTrace {
    pub tag_id: String,
    pub samples: Vec<PhaseSample>,
}

impl TagTrace {
    pub fn new(tag_id: impl Into<String>) -> Self {
        Self {
            tag_id: tag_id.into(),
            samples: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn phases(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.phase).collect()
    }

    /// Same rounds and timestamps, new phase values.
    pub fn with_phases(&self, phases: &[f64]) -> TagTrace {
        debug_assert_eq!(phases.len(), self.samples.len());
        TagTrace {
            tag_id: self.tag_id.clone(),
            samples: self
                .samples
                .iter()
                .zip(phases)
                .map(|(s, &phase)| PhaseSample { phase, ..*s })
                .collect(),
        }
    }

    /// Rounds and times must be strictly increasing.
    pub fn validate(&self) -> Result<()> {
        for w in self.samples.windows(2) {
            if w[1].round <= w[0].round || w[1].t <= w[0].t {
                return Err(Error::InvalidParameter(format!(
                    "trace {} is not strictly increasing at round {}",
                    self.tag_id, w[1].round
                )));
            }
        }
        Ok(())
    }
}

/// Collects the readings of `tag_id` from an unordered stream into a trace.
///
/// Samples are sorted by round; when a round repeats, the first occurrence in
/// input order is kept.
pub fn assemble_trace<'a, I>(samples: I, tag_id: &str) -> Result<TagTrace>
where
    I: IntoIterator<Item = &'a TaggedSample>,
{
    let mut picked: Vec<PhaseSample> = samples
        .into_iter()
        .filter(|s| s.tag_id == tag_id)
        .map(|s| s.sample)
        .collect();
    if picked.is_empty() {
        return Err(Error::EmptyTrace {
            tag_id: tag_id.into(),
        });
    }
    // Stable sort keeps input order among equal rounds.
    picked.sort_by_key(|s| s.round);
    let mut seen = BTreeSet::new();
    picked.retain(|s| seen.insert(s.round));
    Ok(TagTrace {
        tag_id: tag_id.into(),
        samples: picked,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn tagged(tag: &str, round: u64, phase: f64) -> TaggedSample {
        TaggedSample {
            tag_id: tag.into(),
            sample: PhaseSample {
                round,
                t: round as f64 / 40.0,
                phase,
            },
        }
    }

    #[test]
    fn sorts_by_round() {
        let input = vec![
            tagged("a", 3, 0.3),
            tagged("a", 1, 0.1),
            tagged("b", 0, 9.0),
            tagged("a", 2, 0.2),
        ];
        let trace = assemble_trace(&input, "a").unwrap();
        let rounds: Vec<u64> = trace.samples.iter().map(|s| s.round).collect();
        assert_eq!(rounds, vec![1, 2, 3]);
        trace.validate().unwrap();
    }

    #[test]
    fn duplicate_round_keeps_first() {
        let input = vec![
            tagged("a", 5, 1.0),
            tagged("a", 4, 0.5),
            tagged("a", 5, 2.0),
        ];
        let trace = assemble_trace(&input, "a").unwrap();
        assert_eq!(trace.len(), 2);
        assert_eq!(trace.samples[1].phase, 1.0);
    }

    #[test]
    fn missing_tag_is_an_error() {
        let input = vec![tagged("a", 1, 0.0)];
        assert_eq!(
            assemble_trace(&input, "zz"),
            Err(Error::EmptyTrace {
                tag_id: "zz".into()
            })
        );
    }
}
