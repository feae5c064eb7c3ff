//! Multi-objective machinery: Pareto dominance, weighted aggregation, and a
//! non-dominated archive of solutions.
//!
//! Dominance is componentwise: `a` dominates `b` when it is no worse in
//! every criterion and strictly better in at least one. The archive keeps
//! mutually non-dominated entries; candidates equal to an existing vector
//! are rejected (first in wins), and an optional capacity bound evicts the
//! most crowded entry when exceeded.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::evaluation::{format_routes, ObjectiveVector, Solution};

/// Non-negative weights for the three criteria; at least one positive.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Weights {
    pub vehicles: f64,
    pub tardiness: f64,
    pub cost: f64,
}

impl Weights {
    pub const UNIT: Weights = Weights {
        vehicles: 1.0,
        tardiness: 1.0,
        cost: 1.0,
    };

    /// Components in (λ1, λ2, λ3) order.
    pub fn as_array(&self) -> [f64; 3] {
        [self.vehicles, self.tardiness, self.cost]
    }

    /// Checks non-negativity, finiteness, and that some weight is positive.
    pub fn check(&self) -> Result<(), WeightsError> {
        for w in self.as_array() {
            if !w.is_finite() {
                return Err(WeightsError::NonFinite);
            }
            if w < 0.0 {
                return Err(WeightsError::Negative);
            }
        }
        if self.as_array().iter().all(|&w| w == 0.0) {
            return Err(WeightsError::AllZero);
        }
        Ok(())
    }
}

impl Default for Weights {
    fn default() -> Weights {
        Weights::UNIT
    }
}

/// Invalid weight vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightsError {
    Negative,
    AllZero,
    NonFinite,
}

impl fmt::Display for WeightsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightsError::Negative => write!(f, "weights must be non-negative"),
            WeightsError::AllZero => write!(f, "at least one weight must be positive"),
            WeightsError::NonFinite => write!(f, "weights must be finite"),
        }
    }
}

impl core::error::Error for WeightsError {}

/// True iff `a` is no worse than `b` in every criterion and strictly better
/// in at least one. Equal vectors never dominate.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    let a = a.as_array();
    let b = b.as_array();
    let mut strict = false;
    for i in 0..3 {
        if a[i] > b[i] {
            return false;
        }
        if a[i] < b[i] {
            strict = true;
        }
    }
    strict
}

/// Weighted sum λ1·f1 + λ2·f2 + λ3·f3.
pub fn aggregate(w: &Weights, v: &ObjectiveVector) -> f64 {
    w.vehicles * v.vehicles_used + w.tardiness * v.total_tardiness + w.cost * v.transport_cost
}

/// A solution together with its objective vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchiveEntry {
    pub solution: Solution,
    pub vector: ObjectiveVector,
}

/// Set of mutually non-dominated entries.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
    capacity: Option<usize>,
}

impl ParetoArchive {
    /// Unbounded archive.
    pub fn new() -> ParetoArchive {
        ParetoArchive::default()
    }

    /// Archive holding at most `capacity` entries (≥ 1); the most crowded
    /// entry is evicted when the bound is exceeded.
    pub fn bounded(capacity: usize) -> ParetoArchive {
        assert!(capacity >= 1, "archive capacity must be at least 1");
        ParetoArchive {
            entries: Vec::new(),
            capacity: Some(capacity),
        }
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Whether a candidate with this vector would be accepted — lets hot
    /// loops skip cloning a solution that would only be rejected.
    pub fn would_accept(&self, vector: &ObjectiveVector) -> bool {
        !self
            .entries
            .iter()
            .any(|entry| entry.vector == *vector || dominates(&entry.vector, vector))
    }

    /// Offers a candidate. Rejected when an entry dominates it or carries an
    /// equal vector; on acceptance every entry it dominates is removed.
    pub fn insert(&mut self, solution: Solution, vector: ObjectiveVector) -> bool {
        if !self.would_accept(&vector) {
            return false;
        }
        self.entries.retain(|entry| !dominates(&vector, &entry.vector));
        self.entries.push(ArchiveEntry { solution, vector });
        if let Some(bound) = self.capacity {
            while self.entries.len() > bound {
                let evict = self.most_crowded();
                self.entries.remove(evict);
            }
        }
        true
    }

    /// Index of the entry closest to its nearest neighbor in the normalized
    /// objective space; ties fall on the later entry.
    fn most_crowded(&self) -> usize {
        let n = self.entries.len();
        debug_assert!(n >= 2);
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for entry in &self.entries {
            let v = entry.vector.as_array();
            for i in 0..3 {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        let span: Vec<f64> = (0..3).map(|i| (hi[i] - lo[i]).max(1e-12)).collect();
        let mut best = 0;
        let mut best_gap = f64::INFINITY;
        for (i, a) in self.entries.iter().enumerate() {
            let va = a.vector.as_array();
            let mut nearest = f64::INFINITY;
            for (j, b) in self.entries.iter().enumerate() {
                if i == j {
                    continue;
                }
                let vb = b.vector.as_array();
                let d2: f64 = (0..3)
                    .map(|k| {
                        let d = (va[k] - vb[k]) / span[k];
                        d * d
                    })
                    .sum();
                nearest = nearest.min(d2);
            }
            if nearest <= best_gap {
                best_gap = nearest;
                best = i;
            }
        }
        best
    }

    /// One line per entry, `F1 F2 F3 AGG : <routes>`, sorted by aggregate
    /// ascending. Multi-route solutions join their route clauses with ` | `;
    /// an all-idle solution prints `-`.
    pub fn export(&self, weights: &Weights) -> String {
        let mut rows: Vec<(f64, String)> = self
            .entries
            .iter()
            .map(|entry| {
                let agg = aggregate(weights, &entry.vector);
                let routes = format_routes(&entry.solution);
                let inline = if routes.is_empty() {
                    String::from("-")
                } else {
                    routes.lines().collect::<Vec<&str>>().join(" | ")
                };
                let v = entry.vector;
                let line = format!(
                    "{} {} {} {agg} : {inline}",
                    v.vehicles_used, v.total_tardiness, v.transport_cost
                );
                (agg, line)
            })
            .collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        let mut out = String::new();
        for (_, line) in rows {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn v(f1: f64, f2: f64, f3: f64) -> ObjectiveVector {
        ObjectiveVector {
            vehicles_used: f1,
            total_tardiness: f2,
            transport_cost: f3,
        }
    }

    fn sol() -> Solution {
        Solution { routes: vec![] }
    }

    #[test]
    fn dominance_examples() {
        assert!(dominates(&v(1.0, 2.0, 3.0), &v(2.0, 2.0, 3.0)));
        assert!(!dominates(&v(1.0, 2.0, 3.0), &v(1.0, 2.0, 3.0)));
        assert!(!dominates(&v(1.0, 5.0, 0.0), &v(2.0, 1.0, 0.0)));
        assert!(!dominates(&v(2.0, 1.0, 0.0), &v(1.0, 5.0, 0.0)));
    }

    #[test]
    fn aggregation_examples() {
        let unit = Weights::UNIT;
        assert_eq!(aggregate(&unit, &v(1.0, 0.0, 20.0)), 21.0);
        let cost_only = Weights {
            vehicles: 0.0,
            tardiness: 0.0,
            cost: 1.0,
        };
        assert_eq!(aggregate(&cost_only, &v(5.0, 9.0, 20.0)), 20.0);
        let mixed = Weights {
            vehicles: 2.0,
            tardiness: 1.0,
            cost: 0.5,
        };
        assert_eq!(aggregate(&mixed, &v(1.0, 10.0, 100.0)), 62.0);
    }

    #[test]
    fn weights_validation() {
        assert_eq!(Weights::UNIT.check(), Ok(()));
        let bad = Weights {
            vehicles: -1.0,
            ..Weights::UNIT
        };
        assert_eq!(bad.check(), Err(WeightsError::Negative));
        let zero = Weights {
            vehicles: 0.0,
            tardiness: 0.0,
            cost: 0.0,
        };
        assert_eq!(zero.check(), Err(WeightsError::AllZero));
    }

    #[test]
    fn archive_keeps_incomparable_entries() {
        let mut archive = ParetoArchive::new();
        assert!(archive.insert(sol(), v(1.0, 5.0, 0.0)));
        assert!(archive.insert(sol(), v(2.0, 1.0, 0.0)));
        assert_eq!(archive.len(), 2);
    }

    #[test]
    fn archive_rejects_dominated_and_equal() {
        let mut archive = ParetoArchive::new();
        assert!(archive.insert(sol(), v(1.0, 2.0, 3.0)));
        assert!(!archive.insert(sol(), v(2.0, 2.0, 3.0)), "dominated");
        assert!(!archive.insert(sol(), v(1.0, 2.0, 3.0)), "equal vector");
        assert_eq!(archive.len(), 1);
    }

    #[test]
    fn accepted_candidate_sweeps_out_dominated_entries() {
        let mut archive = ParetoArchive::new();
        archive.insert(sol(), v(2.0, 2.0, 3.0));
        archive.insert(sol(), v(5.0, 0.0, 9.0));
        assert!(archive.insert(sol(), v(1.0, 2.0, 3.0)));
        let vectors: Vec<[f64; 3]> = archive.entries().iter().map(|e| e.vector.as_array()).collect();
        assert_eq!(vectors, vec![[5.0, 0.0, 9.0], [1.0, 2.0, 3.0]]);
    }

    #[test]
    fn bounded_archive_evicts_the_most_crowded() {
        let mut archive = ParetoArchive::bounded(2);
        archive.insert(sol(), v(0.0, 10.0, 0.0));
        archive.insert(sol(), v(10.0, 0.0, 0.0));
        // Near-duplicate of the first entry: the crowded pair loses a member.
        archive.insert(sol(), v(0.1, 9.9, 0.0));
        assert_eq!(archive.len(), 2);
        let vectors: Vec<[f64; 3]> = archive.entries().iter().map(|e| e.vector.as_array()).collect();
        assert!(vectors.contains(&[10.0, 0.0, 0.0]), "isolated entry survives");
    }

    #[test]
    fn export_sorts_by_aggregate() {
        let mut archive = ParetoArchive::new();
        archive.insert(sol(), v(2.0, 0.0, 10.0));
        archive.insert(sol(), v(1.0, 0.0, 20.0));
        let text = archive.export(&Weights::UNIT);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines, vec!["2 0 10 12 : -", "1 0 20 21 : -"]);
    }
}
