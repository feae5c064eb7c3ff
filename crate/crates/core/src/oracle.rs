//! Exhaustive ground truth for desk-size instances: depth-first enumeration
//! of every serving-visit ordering across the fleet, reporting the best
//! weighted aggregate and the full Pareto front of feasible plans.
//!
//! The search gives each node `ceil(|q| / max capacity)` visit slots and
//! builds routes vehicle by vehicle, skipping appends that would transfer
//! nothing or traverse an absent arc. Skipping zero transfers is exact on
//! plain Euclidean instances; distance overrides that break the triangle
//! inequality could hide an optimum that detours through such a visit.
//! Instances beyond the configured limits are refused rather than searched,
//! and a deterministic node budget bounds the enumeration itself.

use alloc::vec::Vec;
use core::fmt;

use crate::evaluation::{outstanding_quantities, ObjectiveVector, Scorer, Solution};
use crate::model::{Instance, ModelError, NodeId, PrecedencePair};
use crate::moo::{aggregate, dominates, Weights, WeightsError};

/// Hard bounds on what the exhaustive search will attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    /// Maximum total serving-visit slots across all nodes.
    pub max_serving_visits: usize,
    /// Maximum fleet size.
    pub max_vehicles: usize,
    /// Maximum route extensions to explore before giving up.
    pub node_budget: u64,
}

impl Default for OracleLimits {
    fn default() -> OracleLimits {
        OracleLimits {
            max_serving_visits: 8,
            max_vehicles: 2,
            node_budget: 2_000_000,
        }
    }
}

/// The winning plan under the weighted aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleBest {
    pub solution: Solution,
    pub vector: ObjectiveVector,
    pub aggregate: f64,
}

/// Result of a completed exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleOutcome {
    /// Best feasible plan, if any feasible plan exists.
    pub best: Option<OracleBest>,
    /// Non-dominated objective vectors over all feasible plans, sorted.
    pub front: Vec<ObjectiveVector>,
    /// Route extensions actually explored.
    pub explored: u64,
}

/// Why the search refused to run or stopped early.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// More serving-visit slots than the limit allows.
    TooManyServingVisits { visits: usize, limit: usize },
    /// More vehicles than the limit allows.
    TooManyVehicles { vehicles: usize, limit: usize },
    /// A node's quantity needs more than two visits even at max capacity.
    SplitBeyondLimit { node: NodeId },
    /// The node budget ran out before the enumeration finished.
    BudgetExhausted { budget: u64 },
    Weights(WeightsError),
    Links(ModelError),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleError::TooManyServingVisits { visits, limit } => {
                write!(f, "{visits} serving visits exceed the limit of {limit}")
            }
            OracleError::TooManyVehicles { vehicles, limit } => {
                write!(f, "{vehicles} vehicles exceed the limit of {limit}")
            }
            OracleError::SplitBeyondLimit { node } => {
                write!(f, "node {} needs more than two visits per vehicle", node.0)
            }
            OracleError::BudgetExhausted { budget } => {
                write!(f, "search budget of {budget} route extensions exhausted")
            }
            OracleError::Weights(err) => write!(f, "{err}"),
            OracleError::Links(err) => write!(f, "{err}"),
        }
    }
}

impl core::error::Error for OracleError {}

const QUANTITY_EPS: f64 = 1e-9;

struct Search<'a> {
    instance: &'a Instance,
    weights: &'a Weights,
    scorer: Scorer<'a>,
    budget: u64,
    explored: u64,
    nodes: Vec<NodeId>,
    slots: Vec<u32>,
    pool: Vec<f64>,
    routes: Vec<Vec<NodeId>>,
    vehicle: usize,
    load: f64,
    best: Option<OracleBest>,
    front: Vec<ObjectiveVector>,
}

impl Search<'_> {
    /// Adds a feasible leaf vector to the front unless dominated or equal.
    fn offer_front(&mut self, vector: ObjectiveVector) {
        let beaten = self
            .front
            .iter()
            .any(|held| *held == vector || dominates(held, &vector));
        if beaten {
            return;
        }
        self.front.retain(|held| !dominates(&vector, held));
        self.front.push(vector);
    }

    fn score_leaf(&mut self) {
        let solution = Solution {
            routes: self
                .instance
                .vehicles()
                .iter()
                .zip(&self.routes)
                .map(|(spec, seq)| (spec.id, seq.clone()))
                .collect(),
        };
        let (vector, feasible) = self.scorer.score(&solution);
        if !feasible {
            return;
        }
        self.offer_front(vector);
        let score = aggregate(self.weights, &vector);
        let better = match &self.best {
            None => true,
            Some(best) => score < best.aggregate,
        };
        if better {
            self.best = Some(OracleBest {
                solution,
                vector,
                aggregate: score,
            });
        }
    }

    fn dfs(&mut self) -> Result<(), OracleError> {
        let capacity = self.instance.vehicles()[self.vehicle].capacity;
        let end = self.routes[self.vehicle]
            .last()
            .copied()
            .unwrap_or(NodeId::DEPOT);
        for i in 0..self.nodes.len() {
            if self.slots[i] == 0 {
                continue;
            }
            let q = self.pool[i];
            let transfer = if q > 0.0 {
                q.min(capacity - self.load)
            } else {
                -((-q).min(self.load))
            };
            if transfer.abs() <= QUANTITY_EPS {
                continue;
            }
            if self.instance.distance(end, self.nodes[i]).is_none() {
                continue;
            }
            self.explored += 1;
            if self.explored > self.budget {
                return Err(OracleError::BudgetExhausted {
                    budget: self.budget,
                });
            }
            self.slots[i] -= 1;
            self.pool[i] -= transfer;
            self.load += transfer;
            self.routes[self.vehicle].push(self.nodes[i]);
            self.dfs()?;
            self.routes[self.vehicle].pop();
            self.load -= transfer;
            self.pool[i] += transfer;
            self.slots[i] += 1;
        }
        if self.vehicle + 1 < self.routes.len() {
            // Close this route and hand the pool to the next vehicle.
            self.vehicle += 1;
            let load = core::mem::replace(&mut self.load, 0.0);
            let result = self.dfs();
            self.load = load;
            self.vehicle -= 1;
            result
        } else {
            if self.pool.iter().all(|q| q.abs() <= QUANTITY_EPS) {
                self.score_leaf();
            }
            Ok(())
        }
    }
}

/// Slot count for each outstanding node, refusing splits beyond two visits.
fn visit_slots(
    instance: &Instance,
    limits: &OracleLimits,
) -> Result<(Vec<NodeId>, Vec<u32>), OracleError> {
    let max_capacity = instance
        .vehicles()
        .iter()
        .map(|v| v.capacity)
        .fold(0.0f64, f64::max);
    let mut nodes = Vec::new();
    let mut slots = Vec::new();
    for (node, q) in outstanding_quantities(instance) {
        if max_capacity <= 0.0 {
            return Err(OracleError::SplitBeyondLimit { node });
        }
        let needed = libm::ceil(q.abs() / max_capacity) as u32;
        let needed = needed.max(1);
        if needed > 2 {
            return Err(OracleError::SplitBeyondLimit { node });
        }
        nodes.push(node);
        slots.push(needed);
    }
    let total: u32 = slots.iter().sum();
    if total as usize > limits.max_serving_visits {
        return Err(OracleError::TooManyServingVisits {
            visits: total as usize,
            limit: limits.max_serving_visits,
        });
    }
    Ok((nodes, slots))
}

/// Exhaustively searches every visit ordering within the limits and returns
/// the aggregate-best feasible plan plus the feasible Pareto front.
///
/// Deterministic: candidates are tried in ascending node order before a
/// route is closed, and aggregate ties keep the first plan found.
pub fn exhaustive_best(
    instance: &Instance,
    weights: &Weights,
    limits: &OracleLimits,
) -> Result<OracleOutcome, OracleError> {
    weights.check().map_err(OracleError::Weights)?;
    let pairs: Vec<PrecedencePair> = instance
        .derive_precedence_pairs()
        .map_err(OracleError::Links)?;
    let fleet = instance.vehicles().len();
    if fleet > limits.max_vehicles {
        return Err(OracleError::TooManyVehicles {
            vehicles: fleet,
            limit: limits.max_vehicles,
        });
    }
    let (nodes, slots) = visit_slots(instance, limits)?;
    let pool: Vec<f64> = nodes
        .iter()
        .map(|id| instance.node(*id).expect("outstanding node").q)
        .collect();
    let mut search = Search {
        instance,
        weights,
        scorer: Scorer::new(instance, &pairs),
        budget: limits.node_budget,
        explored: 0,
        nodes,
        slots,
        pool,
        routes: alloc::vec![Vec::new(); fleet],
        vehicle: 0,
        load: 0.0,
        best: None,
        front: Vec::new(),
    };
    search.dfs()?;
    let mut front = search.front;
    front.sort_by(|a, b| {
        a.as_array()
            .iter()
            .zip(b.as_array())
            .map(|(x, y)| x.total_cmp(&y))
            .find(|o| o.is_ne())
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    Ok(OracleOutcome {
        best: search.best,
        front,
        explored: search.explored,
    })
}
