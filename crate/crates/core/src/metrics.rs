//! Scoring predicted orders against simulator ground truth.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Axis, Point3};
use crate::locate::{AxisOrder, RankSense, RankTriple, SwarmGeometry};

/// Drone ids in true rank order along `axis`; equal coordinates fall back to
/// drone-id order.
pub fn truth_ranking(
    positions: &BTreeMap<String, Point3>,
    axis: Axis,
    sense: RankSense,
) -> Vec<String> {
    let mut ids: Vec<(&String, f64)> = positions.iter().map(|(d, p)| (d, p.get(axis))).collect();
    ids.sort_by(|a, b| sense.compare(a.1, b.1).then_with(|| a.0.cmp(b.0)));
    ids.into_iter().map(|(d, _)| d.clone()).collect()
}

/// Rank triples implied by true positions, under the sweep convention (rank 0
/// = largest coordinate on each axis).
pub fn truth_geometry(positions: &BTreeMap<String, Point3>) -> SwarmGeometry {
    let mut ranks: BTreeMap<String, RankTriple> = positions
        .keys()
        .map(|d| (d.clone(), RankTriple { x: 0, y: 0, z: 0 }))
        .collect();
    for axis in Axis::ALL {
        for (rank, d) in truth_ranking(positions, axis, RankSense::Descending)
            .iter()
            .enumerate()
        {
            let r = ranks.get_mut(d).expect("same key set");
            match axis {
                Axis::X => r.x = rank,
                Axis::Y => r.y = rank,
                Axis::Z => r.z = rank,
            }
        }
    }
    SwarmGeometry { ranks }
}

fn same_drones<'a>(
    a: impl Iterator<Item = &'a String>,
    b: impl Iterator<Item = &'a String>,
) -> Result<()> {
    let a: BTreeSet<&String> = a.collect();
    let b: BTreeSet<&String> = b.collect();
    if a != b {
        return Err(Error::InconsistentRecordings(
            "prediction and ground truth cover different drones".into(),
        ));
    }
    Ok(())
}

/// Fraction of drone pairs whose predicted order agrees with the true order
/// along the prediction's axis (1 − normalized Kendall distance).
///
/// Pairs with exactly equal true coordinates carry no order and are skipped.
pub fn pairwise_accuracy(predicted: &AxisOrder, truth: &BTreeMap<String, Point3>) -> Result<f64> {
    same_drones(predicted.ranking.iter(), truth.keys())?;
    if predicted.ranking.len() != truth.len() {
        return Err(Error::InconsistentRecordings(
            "ranking repeats a drone".into(),
        ));
    }
    if truth.len() < 2 {
        return Err(Error::UndefinedMetric(format!(
            "pairwise accuracy needs at least two drones, got {}",
            truth.len()
        )));
    }
    let rank: BTreeMap<&str, usize> = predicted
        .ranking
        .iter()
        .enumerate()
        .map(|(i, d)| (d.as_str(), i))
        .collect();
    let drones: Vec<(&String, f64)> = truth
        .iter()
        .map(|(d, p)| (d, p.get(predicted.axis)))
        .collect();
    let (mut pairs, mut concordant) = (0usize, 0usize);
    for (i, (a, ca)) in drones.iter().enumerate() {
        for (b, cb) in &drones[i + 1..] {
            let true_order = predicted.sense.compare(*ca, *cb);
            if true_order == Ordering::Equal {
                continue;
            }
            pairs += 1;
            if rank[a.as_str()].cmp(&rank[b.as_str()]) == true_order {
                concordant += 1;
            }
        }
    }
    if pairs == 0 {
        return Err(Error::UndefinedMetric(format!(
            "all drones share the same {} coordinate",
            predicted.axis
        )));
    }
    Ok(concordant as f64 / pairs as f64)
}

/// Fraction of drones whose full rank triple is correct.
pub fn geometry_accuracy(predicted: &SwarmGeometry, truth: &SwarmGeometry) -> Result<f64> {
    same_drones(predicted.ranks.keys(), truth.ranks.keys())?;
    if truth.ranks.is_empty() {
        return Err(Error::UndefinedMetric("empty swarm".into()));
    }
    let exact = truth
        .ranks
        .iter()
        .filter(|(d, t)| predicted.ranks.get(*d) == Some(t))
        .count();
    Ok(exact as f64 / truth.ranks.len() as f64)
}

/// A tag that failed during a trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFailure {
    pub axis: Axis,
    pub drone_id: String,
    pub tag_id: String,
    pub reason: String,
}

/// Scores of one simulate → locate → score trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    /// Trial index; together with the master seed it fixes the random stream.
    pub trial: u64,
    pub per_axis_accuracy: BTreeMap<Axis, f64>,
    pub geometry_accuracy: f64,
    pub failures: Vec<TrialFailure>,
}

impl TrialReport {
    pub fn mean_axis_accuracy(&self) -> f64 {
        crate::math::mean(&self.per_axis_accuracy.values().copied().collect::<Vec<_>>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn positions(xs: &[f64]) -> BTreeMap<String, Point3> {
        xs.iter()
            .enumerate()
            .map(|(i, &x)| (format!("d{i}"), Point3::new(x, 0.0, 0.0)))
            .collect()
    }

    fn order(ranking: &[&str]) -> AxisOrder {
        AxisOrder {
            axis: Axis::X,
            sense: RankSense::Descending,
            ranking: ranking.iter().map(|s| s.to_string()).collect(),
            trough_points: BTreeMap::new(),
            flags: BTreeMap::new(),
            failures: vec![],
        }
    }

    #[test]
    fn perfect_reversed_and_one_swap() {
        // d4 has the largest x, so it leads.
        let truth = positions(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let perfect = order(&["d4", "d3", "d2", "d1", "d0"]);
        assert_eq!(pairwise_accuracy(&perfect, &truth).unwrap(), 1.0);
        let reversed = order(&["d0", "d1", "d2", "d3", "d4"]);
        assert_eq!(pairwise_accuracy(&reversed, &truth).unwrap(), 0.0);
        let swapped = order(&["d4", "d2", "d3", "d1", "d0"]);
        assert_eq!(pairwise_accuracy(&swapped, &truth).unwrap(), 0.9);
    }

    #[test]
    fn equal_coordinates_are_skipped() {
        let truth = positions(&[0.0, 0.0, 1.0]);
        assert_eq!(
            pairwise_accuracy(&order(&["d2", "d1", "d0"]), &truth).unwrap(),
            1.0
        );
        assert_eq!(
            pairwise_accuracy(&order(&["d2", "d0", "d1"]), &truth).unwrap(),
            1.0
        );
        let flat = positions(&[1.0, 1.0]);
        assert!(matches!(
            pairwise_accuracy(&order(&["d0", "d1"]), &flat),
            Err(Error::UndefinedMetric(_))
        ));
    }

    #[test]
    fn undefined_for_tiny_swarms() {
        assert!(matches!(
            pairwise_accuracy(&order(&["d0"]), &positions(&[0.0])),
            Err(Error::UndefinedMetric(_))
        ));
        assert!(pairwise_accuracy(&order(&["d0", "zz"]), &positions(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn geometry_counts_exact_triples() {
        let pos: BTreeMap<String, Point3> = (0..5)
            .map(|i| {
                (
                    format!("d{i}"),
                    Point3::new(i as f64, (i * 3 % 5) as f64, (i * 2 % 5) as f64),
                )
            })
            .collect();
        let truth = truth_geometry(&pos);
        assert_eq!(geometry_accuracy(&truth, &truth).unwrap(), 1.0);
        let mut wrong = truth.clone();
        wrong.ranks.get_mut("d3").unwrap().y = 99;
        assert_eq!(geometry_accuracy(&wrong, &truth).unwrap(), 0.8);

        let single: BTreeMap<String, Point3> =
            [("solo".to_string(), Point3::new(1.0, 2.0, 3.0))].into();
        let g = truth_geometry(&single);
        assert_eq!(g.ranks["solo"], RankTriple { x: 0, y: 0, z: 0 });
        assert_eq!(geometry_accuracy(&g, &g).unwrap(), 1.0);
    }

    #[test]
    fn truth_ranking_directions() {
        let pos = positions(&[0.3, 0.1, 0.2]);
        assert_eq!(
            truth_ranking(&pos, Axis::X, RankSense::Descending),
            vec!["d0", "d2", "d1"]
        );
        assert_eq!(
            truth_ranking(&pos, Axis::X, RankSense::Ascending),
            vec!["d1", "d2", "d0"]
        );
    }
}
