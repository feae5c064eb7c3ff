//! Solution replay: visit times, loads, split transfers, the objective
//! vector, and per-constraint-family verdicts.
//!
//! A [`Solution`] lists one visit sequence per vehicle; every route
//! implicitly starts and ends at the depot. Routes are replayed in listing
//! order against a shared pool of outstanding quantities, so a node's
//! remaining supply or demand is consumed across routes and repeated visits.
//! The transfer at each visit is clamped to what the node still has and the
//! vehicle can still carry: suppliers yield `min(remaining, spare capacity)`,
//! clients receive `min(remaining demand, current load)`. A visit that moves
//! nothing is a pass-through — no waiting, no service time, no window check.
//!
//! Windows are soft above: arriving before `e` forces waiting, arriving
//! after `l` accrues tardiness in the objective rather than infeasibility.
//! Feasibility is gated by the hard families: coverage, depot, flow,
//! capacity, and precedence.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::model::{Instance, NodeId, PrecedencePair, VehicleId, VehicleSpec};

/// A candidate plan: per-vehicle visit sequences, depot endpoints implicit.
///
/// Each vehicle appears at most once; vehicles without an entry stay idle.
/// Nodes may repeat within and across routes (split or pass-through visits).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Solution {
    pub routes: Vec<(VehicleId, Vec<NodeId>)>,
}

impl Solution {
    /// One empty route per fleet vehicle, in fleet order.
    pub fn empty(instance: &Instance) -> Solution {
        Solution {
            routes: instance
                .vehicles()
                .iter()
                .map(|v| (v.id, Vec::new()))
                .collect(),
        }
    }

    /// The visit sequence of `vehicle`, if the solution lists it.
    pub fn route_for(&self, vehicle: VehicleId) -> Option<&[NodeId]> {
        self.routes
            .iter()
            .find(|(id, _)| *id == vehicle)
            .map(|(_, seq)| seq.as_slice())
    }

    /// Checks the structural invariants against an instance.
    pub fn check(&self, instance: &Instance) -> Result<(), SolutionError> {
        let mut seen = alloc::collections::BTreeSet::new();
        for (vehicle, seq) in &self.routes {
            if instance.vehicle(*vehicle).is_none() {
                return Err(SolutionError::UnknownVehicle(*vehicle));
            }
            if !seen.insert(*vehicle) {
                return Err(SolutionError::DuplicateVehicle(*vehicle));
            }
            for &node in seq {
                if node == NodeId::DEPOT {
                    return Err(SolutionError::DepotInRoute(*vehicle));
                }
                if instance.node(node).is_none() {
                    return Err(SolutionError::UnknownNode {
                        vehicle: *vehicle,
                        node,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Structural violation found by [`Solution::check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolutionError {
    UnknownVehicle(VehicleId),
    DuplicateVehicle(VehicleId),
    DepotInRoute(VehicleId),
    UnknownNode { vehicle: VehicleId, node: NodeId },
}

impl fmt::Display for SolutionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolutionError::UnknownVehicle(v) => write!(f, "unknown vehicle {v}"),
            SolutionError::DuplicateVehicle(v) => {
                write!(f, "vehicle {v} listed more than once")
            }
            SolutionError::DepotInRoute(v) => {
                write!(f, "vehicle {v}: depot id inside the visit sequence")
            }
            SolutionError::UnknownNode { vehicle, node } => {
                write!(f, "vehicle {vehicle}: unknown node {node}")
            }
        }
    }
}

impl core::error::Error for SolutionError {}

/// One visited position in a replayed route.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitRecord {
    pub node: NodeId,
    pub arrival: f64,
    /// `max(arrival, e)` at serving visits; equals `arrival` at pass-throughs.
    pub service_start: f64,
    pub departure: f64,
    /// Signed quantity moved: positive pickup, negative delivery, 0 pass-through.
    pub transfer: f64,
    pub load_after: f64,
}

impl VisitRecord {
    /// Whether the visit moved any quantity.
    pub fn is_serving(&self) -> bool {
        self.transfer != 0.0
    }
}

/// Full replay of one route: per-visit records plus route totals.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteTrace {
    pub vehicle: VehicleId,
    pub visits: Vec<VisitRecord>,
    /// Length of all traversed legs, depot legs included.
    pub distance: f64,
    /// Σ max(0, service start − l) over serving visits.
    pub tardiness: f64,
    /// Σ (service start − arrival) over serving visits.
    pub waiting: f64,
    /// Arrival time back at the depot (0 for an empty route).
    pub return_time: f64,
    /// Absent arcs the route tried to traverse; non-empty ⇒ structurally unsound.
    pub missing_arcs: Vec<(NodeId, NodeId)>,
}

impl RouteTrace {
    /// Whether the route moved any quantity at all.
    pub fn is_serving(&self) -> bool {
        self.visits.iter().any(VisitRecord::is_serving)
    }
}

/// The three minimized criteria.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObjectiveVector {
    /// Count of vehicles whose route moves at least one unit.
    pub vehicles_used: f64,
    /// Total lateness over serving visits.
    pub total_tardiness: f64,
    /// Σ per vehicle: unit cost × route distance.
    pub transport_cost: f64,
}

impl ObjectiveVector {
    pub const ZERO: ObjectiveVector = ObjectiveVector {
        vehicles_used: 0.0,
        total_tardiness: 0.0,
        transport_cost: 0.0,
    };

    /// Components in (f1, f2, f3) order.
    pub fn as_array(&self) -> [f64; 3] {
        [self.vehicles_used, self.total_tardiness, self.transport_cost]
    }
}

impl fmt::Display for ObjectiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}, {})",
            self.vehicles_used, self.total_tardiness, self.transport_cost
        )
    }
}

/// Outstanding signed quantities, keyed by node: the starting pool for a
/// replay (`q` for every node, zeros omitted).
pub fn outstanding_quantities(instance: &Instance) -> BTreeMap<NodeId, f64> {
    instance
        .nodes()
        .iter()
        .filter(|n| n.q != 0.0)
        .map(|n| (n.id, n.q))
        .collect()
}

/// Replays one route for `vehicle`, drawing on and updating `remaining`.
///
/// The vehicle leaves the depot empty at time 0. Unknown node ids panic;
/// validate the solution first. An absent arc is recorded in `missing_arcs`
/// and skipped (no distance, no travel time), leaving the totals to cover
/// the defined legs only.
pub fn simulate_route(
    instance: &Instance,
    vehicle: &VehicleSpec,
    visits: &[NodeId],
    remaining: &mut BTreeMap<NodeId, f64>,
) -> RouteTrace {
    let mut trace = RouteTrace {
        vehicle: vehicle.id,
        visits: Vec::with_capacity(visits.len()),
        distance: 0.0,
        tardiness: 0.0,
        waiting: 0.0,
        return_time: 0.0,
        missing_arcs: Vec::new(),
    };
    if visits.is_empty() {
        return trace;
    }

    let mut time = 0.0;
    let mut load = 0.0;
    let mut prev = NodeId::DEPOT;
    for &id in visits {
        assert!(id != NodeId::DEPOT, "depot id inside a visit sequence");
        let node = instance.node(id).expect("unknown node id in route");
        let arrival = match instance.distance(prev, id) {
            Some(d) => {
                trace.distance += d;
                time + d / vehicle.speed
            }
            None => {
                trace.missing_arcs.push((prev, id));
                time
            }
        };

        let pool = remaining.get(&id).copied().unwrap_or(0.0);
        let transfer = if node.is_supplier() {
            pool.max(0.0).min(vehicle.capacity - load)
        } else if node.is_client() {
            -((-pool).max(0.0)).min(load)
        } else {
            0.0
        };

        let (service_start, departure) = if transfer != 0.0 {
            let start = arrival.max(node.e);
            trace.waiting += start - arrival;
            trace.tardiness += (start - node.l).max(0.0);
            load += transfer;
            *remaining.entry(id).or_insert(0.0) -= transfer;
            (start, start + node.s)
        } else {
            (arrival, arrival)
        };

        trace.visits.push(VisitRecord {
            node: id,
            arrival,
            service_start,
            departure,
            transfer,
            load_after: load,
        });
        time = departure;
        prev = id;
    }

    match instance.distance(prev, NodeId::DEPOT) {
        Some(d) => {
            trace.distance += d;
            trace.return_time = time + d / vehicle.speed;
        }
        None => {
            trace.missing_arcs.push((prev, NodeId::DEPOT));
            trace.return_time = time;
        }
    }
    trace
}

/// Replay of a whole solution: all traces plus the leftover pool.
#[derive(Debug, Clone)]
pub(crate) struct Replay {
    pub traces: Vec<RouteTrace>,
    pub leftover: BTreeMap<NodeId, f64>,
}

pub(crate) fn replay(instance: &Instance, solution: &Solution) -> Replay {
    let mut remaining = outstanding_quantities(instance);
    let traces = solution
        .routes
        .iter()
        .map(|(vehicle, seq)| {
            let spec = instance.vehicle(*vehicle).expect("unknown vehicle id");
            simulate_route(instance, spec, seq, &mut remaining)
        })
        .collect();
    Replay {
        traces,
        leftover: remaining,
    }
}

fn vector_of(instance: &Instance, traces: &[RouteTrace]) -> ObjectiveVector {
    let mut v = ObjectiveVector::ZERO;
    for trace in traces {
        if trace.is_serving() {
            v.vehicles_used += 1.0;
        }
        v.total_tardiness += trace.tardiness;
        let cost = instance
            .vehicle(trace.vehicle)
            .map(|spec| spec.unit_cost)
            .unwrap_or(0.0);
        v.transport_cost += cost * trace.distance;
    }
    v
}

/// Computes (f1, f2, f3) for a structurally valid solution.
///
/// Absent arcs contribute neither distance nor travel time; `validate`
/// reports them under the flow family.
pub fn objective_vector(instance: &Instance, solution: &Solution) -> ObjectiveVector {
    vector_of(instance, &replay(instance, solution).traces)
}

/// Verdict of one constraint family.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyReport {
    pub passed: bool,
    /// Violations, or informational notes on a pass.
    pub notes: Vec<String>,
}

impl FamilyReport {
    fn pass() -> FamilyReport {
        FamilyReport {
            passed: true,
            notes: Vec::new(),
        }
    }

    fn note(mut self, note: String) -> FamilyReport {
        self.notes.push(note);
        self
    }
}

/// Per-family verdicts of a replayed solution.
///
/// `feasible` follows the hard families only — coverage, depot, flow,
/// capacity, precedence. The windows family records lateness but is soft:
/// it is priced into the objective instead of gating feasibility.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub coverage: FamilyReport,
    pub depot: FamilyReport,
    pub flow: FamilyReport,
    pub capacity: FamilyReport,
    pub precedence: FamilyReport,
    pub windows: FamilyReport,
    pub feasible: bool,
}

impl ValidationReport {
    /// Family name/verdict pairs in report order.
    pub fn families(&self) -> [(&'static str, &FamilyReport); 6] {
        [
            ("coverage", &self.coverage),
            ("depot", &self.depot),
            ("flow", &self.flow),
            ("capacity", &self.capacity),
            ("precedence", &self.precedence),
            ("windows", &self.windows),
        ]
    }
}

const QUANTITY_EPS: f64 = 1e-9;

/// First serving departure per node across all traces (global time axis).
fn first_serving_departures(traces: &[RouteTrace]) -> BTreeMap<NodeId, f64> {
    let mut first: BTreeMap<NodeId, f64> = BTreeMap::new();
    for trace in traces {
        for visit in &trace.visits {
            if visit.is_serving() {
                first
                    .entry(visit.node)
                    .and_modify(|d| *d = d.min(visit.departure))
                    .or_insert(visit.departure);
            }
        }
    }
    first
}

/// Replays `solution` and grades every constraint family.
pub fn validate(instance: &Instance, solution: &Solution) -> ValidationReport {
    let run = replay(instance, solution);

    let mut coverage = FamilyReport::pass();
    for (&node, &left) in &run.leftover {
        if left.abs() > QUANTITY_EPS {
            coverage.passed = false;
            let what = if left > 0.0 { "supply" } else { "demand" };
            coverage
                .notes
                .push(format!("node {node}: {} {what} left unserved", left.abs()));
        }
    }

    let depot = FamilyReport::pass()
        .note("routes start and end at the depot by construction".to_string());

    let mut flow = FamilyReport::pass();
    for trace in &run.traces {
        for &(i, j) in &trace.missing_arcs {
            flow.passed = false;
            flow.notes.push(format!(
                "vehicle {}: no arc from {i} to {j}",
                trace.vehicle
            ));
        }
    }
    if flow.passed {
        flow.notes
            .push("consecutive visits form the traversed arcs by construction".to_string());
    }

    let mut capacity = FamilyReport::pass();
    for trace in &run.traces {
        let bound = instance
            .vehicle(trace.vehicle)
            .map(|spec| spec.capacity)
            .unwrap_or(0.0);
        for (i, visit) in trace.visits.iter().enumerate() {
            if visit.load_after < -QUANTITY_EPS || visit.load_after > bound + QUANTITY_EPS {
                capacity.passed = false;
                capacity.notes.push(format!(
                    "vehicle {} visit {}: load {} outside [0, {bound}]",
                    trace.vehicle,
                    i + 1,
                    visit.load_after
                ));
            }
        }
    }

    let mut precedence = FamilyReport::pass();
    match instance.derive_precedence_pairs() {
        Ok(pairs) => {
            let first = first_serving_departures(&run.traces);
            for PrecedencePair { supplier, client } in pairs {
                let s = first.get(&supplier);
                let c = first.get(&client);
                let ok = match (s, c) {
                    (None, None) => true,
                    (Some(ds), Some(dc)) => ds <= dc,
                    _ => false,
                };
                if !ok {
                    precedence.passed = false;
                    let detail = match (s, c) {
                        (Some(ds), Some(dc)) => {
                            format!("supplier departs {ds}, client departs {dc}")
                        }
                        (Some(_), None) => "client never served".to_string(),
                        (None, Some(_)) => "supplier never served".to_string(),
                        (None, None) => unreachable!(),
                    };
                    precedence
                        .notes
                        .push(format!("pair {supplier} before {client}: {detail}"));
                }
            }
        }
        Err(err) => {
            precedence.passed = false;
            precedence.notes.push(err.to_string());
        }
    }

    let mut windows = FamilyReport::pass();
    for trace in &run.traces {
        for (i, visit) in trace.visits.iter().enumerate() {
            if !visit.is_serving() {
                continue;
            }
            let close = instance.node(visit.node).map(|n| n.l).unwrap_or(f64::MAX);
            let late = visit.service_start - close;
            if late > 0.0 {
                windows.passed = false;
                windows.notes.push(format!(
                    "vehicle {} visit {} at node {}: late by {late}",
                    trace.vehicle,
                    i + 1,
                    visit.node
                ));
            }
        }
        let depot_close = instance.depot().l;
        if !trace.visits.is_empty() && trace.return_time > depot_close {
            windows.notes.push(format!(
                "vehicle {}: returns at {} after depot close {depot_close} (informational)",
                trace.vehicle, trace.return_time
            ));
        }
    }

    let feasible = coverage.passed
        && depot.passed
        && flow.passed
        && capacity.passed
        && precedence.passed;
    ValidationReport {
        coverage,
        depot,
        flow,
        capacity,
        precedence,
        windows,
        feasible,
    }
}

/// Reference scoring used to cross-check [`Scorer`]: the objective vector
/// plus whether the hard families pass, straight off a full replay.
#[cfg(test)]
pub(crate) fn score(
    instance: &Instance,
    pairs: &[PrecedencePair],
    solution: &Solution,
) -> (ObjectiveVector, bool) {
    let run = replay(instance, solution);
    let vector = vector_of(instance, &run.traces);

    let covered = run
        .leftover
        .values()
        .all(|left| left.abs() <= QUANTITY_EPS);
    let sound = run.traces.iter().all(|t| t.missing_arcs.is_empty());
    let mut ordered = true;
    if covered && sound {
        let first = first_serving_departures(&run.traces);
        ordered = pairs.iter().all(|pair| {
            match (first.get(&pair.supplier), first.get(&pair.client)) {
                (None, None) => true,
                (Some(ds), Some(dc)) => ds <= dc,
                _ => false,
            }
        });
    }
    (vector, covered && sound && ordered)
}

/// Reusable scoring engine: the objective vector plus the hard-family
/// verdict of a solution, with scratch buffers kept between calls.
///
/// Search loops score thousands of candidates; this avoids rebuilding the
/// outstanding pool and per-visit records each time. Results are identical
/// to [`objective_vector`] plus [`validate`]'s `feasible` flag. Each scorer
/// is tied to the instance (and precedence pairs) it was built from; scoring
/// is deterministic and side-effect free, so distinct scorers may run on
/// distinct threads.
pub struct Scorer<'a> {
    instance: &'a Instance,
    pairs: Vec<(usize, usize)>,
    base_pool: Vec<f64>,
    pool: Vec<f64>,
    first_departure: Vec<f64>,
}

impl<'a> Scorer<'a> {
    pub fn new(instance: &'a Instance, pairs: &[PrecedencePair]) -> Scorer<'a> {
        let n = instance.nodes().len();
        let mut base_pool = alloc::vec![0.0; n];
        for node in instance.nodes() {
            base_pool[instance.node_index(node.id).unwrap()] = node.q;
        }
        let pairs = pairs
            .iter()
            .map(|p| {
                (
                    instance.node_index(p.supplier).expect("supplier in instance"),
                    instance.node_index(p.client).expect("client in instance"),
                )
            })
            .collect();
        Scorer {
            instance,
            pairs,
            base_pool,
            pool: alloc::vec![0.0; n],
            first_departure: alloc::vec![f64::INFINITY; n],
        }
    }

    /// Scores one structurally valid solution.
    pub fn score(&mut self, solution: &Solution) -> (ObjectiveVector, bool) {
        let instance = self.instance;
        self.pool.copy_from_slice(&self.base_pool);
        self.first_departure.fill(f64::INFINITY);
        let depot_idx = instance.node_index(NodeId::DEPOT).unwrap();

        let mut vector = ObjectiveVector::ZERO;
        let mut sound = true;
        for (vehicle, seq) in &solution.routes {
            let spec = instance.vehicle(*vehicle).expect("unknown vehicle id");
            let mut route_distance = 0.0;
            let mut route_tardiness = 0.0;
            let mut served = false;
            let mut time = 0.0;
            let mut load = 0.0;
            let mut prev = depot_idx;
            if seq.is_empty() {
                continue;
            }
            for &id in seq {
                let idx = instance.node_index(id).expect("unknown node id in route");
                let node = &instance.nodes()[idx];
                let arrival = match instance.distance_by_index(prev, idx) {
                    Some(d) => {
                        route_distance += d;
                        time + d / spec.speed
                    }
                    None => {
                        sound = false;
                        time
                    }
                };
                let pool = self.pool[idx];
                let transfer = if node.is_supplier() {
                    pool.max(0.0).min(spec.capacity - load)
                } else if node.is_client() {
                    -((-pool).max(0.0)).min(load)
                } else {
                    0.0
                };
                if transfer != 0.0 {
                    let start = arrival.max(node.e);
                    route_tardiness += (start - node.l).max(0.0);
                    load += transfer;
                    self.pool[idx] -= transfer;
                    served = true;
                    let departure = start + node.s;
                    if departure < self.first_departure[idx] {
                        self.first_departure[idx] = departure;
                    }
                    time = departure;
                } else {
                    time = arrival;
                }
                prev = idx;
            }
            match instance.distance_by_index(prev, depot_idx) {
                Some(d) => route_distance += d,
                None => sound = false,
            }
            if served {
                vector.vehicles_used += 1.0;
            }
            vector.total_tardiness += route_tardiness;
            vector.transport_cost += spec.unit_cost * route_distance;
        }

        let covered = self.pool.iter().all(|left| left.abs() <= QUANTITY_EPS);
        let mut ordered = true;
        if covered && sound {
            for &(s, c) in &self.pairs {
                let fs = self.first_departure[s];
                let fc = self.first_departure[c];
                let ok = if fs.is_finite() && fc.is_finite() {
                    fs <= fc
                } else {
                    fs.is_infinite() && fc.is_infinite()
                };
                if !ok {
                    ordered = false;
                    break;
                }
            }
        }
        (vector, covered && sound && ordered)
    }
}

/// Route-file parse error, naming the offending line.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for RouteParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl core::error::Error for RouteParseError {}

/// Parses the route file format: one `R <vehicle-id> : <ids>` line per
/// route, depot 0 as the first and last id (stripped on load), `#` comments.
/// Vehicles without a line get an empty route; listed order is preserved
/// with idle vehicles appended in fleet order.
pub fn parse_routes(instance: &Instance, text: &str) -> Result<Solution, RouteParseError> {
    let mut routes: Vec<(VehicleId, Vec<NodeId>)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let tokens: Vec<&str> = stripped.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() < 5 || tokens[0] != "R" || tokens[2] != ":" {
            return Err(RouteParseError {
                line,
                message: "expected `R <vehicle-id> : 0 <node ids> 0`".to_string(),
            });
        }
        let vehicle = VehicleId(tokens[1].parse::<u32>().map_err(|_| RouteParseError {
            line,
            message: format!("invalid vehicle id `{}`", tokens[1]),
        })?);
        if instance.vehicle(vehicle).is_none() {
            return Err(RouteParseError {
                line,
                message: format!("unknown vehicle {vehicle}"),
            });
        }
        if routes.iter().any(|(id, _)| *id == vehicle) {
            return Err(RouteParseError {
                line,
                message: format!("vehicle {vehicle} listed more than once"),
            });
        }
        let ids: Result<Vec<NodeId>, RouteParseError> = tokens[3..]
            .iter()
            .map(|tok| {
                tok.parse::<u32>().map(NodeId).map_err(|_| RouteParseError {
                    line,
                    message: format!("invalid node id `{tok}`"),
                })
            })
            .collect();
        let ids = ids?;
        if ids.first() != Some(&NodeId::DEPOT) || ids.last() != Some(&NodeId::DEPOT) {
            return Err(RouteParseError {
                line,
                message: "route must start and end at depot 0".to_string(),
            });
        }
        let interior = &ids[1..ids.len() - 1];
        for &node in interior {
            if node == NodeId::DEPOT {
                return Err(RouteParseError {
                    line,
                    message: "depot 0 may only appear at the route ends".to_string(),
                });
            }
            if instance.node(node).is_none() {
                return Err(RouteParseError {
                    line,
                    message: format!("unknown node {node}"),
                });
            }
        }
        routes.push((vehicle, interior.to_vec()));
    }
    for v in instance.vehicles() {
        if !routes.iter().any(|(id, _)| *id == v.id) {
            routes.push((v.id, Vec::new()));
        }
    }
    Ok(Solution { routes })
}

/// Writes the route file form of a solution; idle vehicles are omitted.
pub fn format_routes(solution: &Solution) -> String {
    let mut out = String::new();
    for (vehicle, seq) in &solution.routes {
        if seq.is_empty() {
            continue;
        }
        out.push_str(&format!("R {vehicle} : 0"));
        for node in seq {
            out.push_str(&format!(" {node}"));
        }
        out.push_str(" 0\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::parse_instance;
    use alloc::vec;

    const TABLE: &str = include_str!("../../../data/demo17.pdptw");
    const TOUR: &str = include_str!("../../../data/demo17.route");

    fn table_instance() -> Instance {
        parse_instance(TABLE).unwrap().instance
    }

    /// Depot (0,0); supplier P = node 1 at (3,4) q=+10; client C = node 2 at
    /// (6,8) q=−10; one vehicle, capacity 10, cost 1, speed 1.
    fn pair_instance(client_close: f64) -> Instance {
        let text = format!(
            "PDPTW 1\nVEHICLES 1\nV 1 10 1 1\nNODES 3\n\
             N 0 0 0 0 0 1000 0 - -\n\
             N 1 3 4 10 0 100 0 2 -\n\
             N 2 6 8 -10 0 {client_close} 0 - 1\n"
        );
        parse_instance(&text).unwrap().instance
    }

    fn single_route(instance: &Instance, seq: Vec<NodeId>) -> Solution {
        let mut solution = Solution::empty(instance);
        solution.routes[0].1 = seq;
        solution
    }

    #[test]
    fn pickup_visit_times_and_transfer() {
        let inst = table_instance();
        let mut remaining = outstanding_quantities(&inst);
        let spec = inst.vehicle(VehicleId(1)).unwrap().clone();
        let trace = simulate_route(&inst, &spec, &[NodeId(2)], &mut remaining);
        let visit = &trace.visits[0];
        assert!((visit.arrival - 82.75868534480233).abs() < 1e-12);
        assert_eq!(visit.service_start, visit.arrival, "window opens at 34");
        assert!((visit.departure - 93.75868534480233).abs() < 1e-12);
        assert_eq!(visit.transfer, 20.0);
        assert_eq!(visit.load_after, 20.0);
        assert_eq!(trace.tardiness, 0.0);
        assert_eq!(remaining.get(&NodeId(2)), Some(&0.0));
    }

    #[test]
    fn late_arrival_accrues_tardiness() {
        let inst = table_instance();
        let mut remaining = outstanding_quantities(&inst);
        let spec = inst.vehicle(VehicleId(1)).unwrap().clone();
        let trace = simulate_route(&inst, &spec, &[NodeId(5)], &mut remaining);
        assert!((trace.tardiness - 23.00574693662483).abs() < 1e-12);
        assert_eq!(trace.waiting, 0.0);
    }

    #[test]
    fn early_arrival_waits_to_window_open() {
        let inst = table_instance();
        let mut remaining = outstanding_quantities(&inst);
        let spec = inst.vehicle(VehicleId(1)).unwrap().clone();
        let trace = simulate_route(&inst, &spec, &[NodeId(9)], &mut remaining);
        let visit = &trace.visits[0];
        assert!((visit.arrival - 41.48493702538308).abs() < 1e-12);
        assert_eq!(visit.service_start, 95.0);
        assert_eq!(visit.departure, 108.0);
        assert!((trace.waiting - (95.0 - visit.arrival)).abs() < 1e-12);
        assert_eq!(trace.tardiness, 0.0);
    }

    #[test]
    fn pair_route_objective_vector() {
        let inst = pair_instance(10.0);
        let v = objective_vector(&inst, &single_route(&inst, vec![NodeId(1), NodeId(2)]));
        assert_eq!(v.as_array(), [1.0, 0.0, 20.0]);

        let tight = pair_instance(8.0);
        let v = objective_vector(&tight, &single_route(&tight, vec![NodeId(1), NodeId(2)]));
        assert_eq!(v.as_array(), [1.0, 2.0, 20.0], "arrival 10 vs close 8");
    }

    #[test]
    fn empty_solution_scores_zero() {
        let inst = table_instance();
        let v = objective_vector(&inst, &Solution::empty(&inst));
        assert_eq!(v, ObjectiveVector::ZERO);
    }

    #[test]
    fn inverted_pair_fails_precedence_and_coverage() {
        let inst = pair_instance(10.0);
        let report = validate(&inst, &single_route(&inst, vec![NodeId(2), NodeId(1)]));
        assert!(!report.precedence.passed);
        assert!(!report.coverage.passed, "client visited while empty");
        assert!(!report.feasible);
        assert!(report.capacity.passed);
    }

    #[test]
    fn published_tour_replays_with_repeats_and_frozen_distance() {
        let inst = table_instance();
        let solution = parse_routes(&inst, TOUR).unwrap();
        let run = replay(&inst, &solution);
        let trace = &run.traces[0];
        assert!((trace.distance - 1125.8719294550688).abs() < 1e-9);
        for repeated in [1u32, 4, 11, 12] {
            let count = trace
                .visits
                .iter()
                .filter(|v| v.node == NodeId(repeated))
                .count();
            assert!(count > 1, "node {repeated} visited {count} times");
        }
        let report = validate(&inst, &solution);
        assert!(report.depot.passed);
        assert!(report.flow.passed);
        assert!(report.capacity.passed);
        assert!(
            report.coverage.notes.iter().any(|n| n.contains("node 7")),
            "demand at 7 is passed through while empty: {:?}",
            report.coverage.notes
        );
    }

    #[test]
    fn absent_arc_fails_flow_and_skips_the_leg() {
        let text = "PDPTW 1\nVEHICLES 1\nV 1 10 1 1\nNODES 3\n\
                    N 0 0 0 0 0 1000 0 - -\n\
                    N 1 3 4 10 0 100 0 2 -\n\
                    N 2 6 8 -10 0 100 0 - 1\n\
                    EDGE 1 2 INF\n";
        let inst = parse_instance(text).unwrap().instance;
        let solution = single_route(&inst, vec![NodeId(1), NodeId(2)]);
        let report = validate(&inst, &solution);
        assert!(!report.flow.passed);
        assert!(!report.feasible);
        let v = objective_vector(&inst, &solution);
        assert_eq!(v.transport_cost, 15.0, "defined legs only: 5 + 10");
    }

    #[test]
    fn second_visit_picks_up_the_remainder() {
        // Supply 15 into a capacity-10 vehicle: first visit clamps to 10,
        // a revisit after the delivery collects the other 5.
        let text = "PDPTW 1\nVEHICLES 1\nV 1 10 1 1\nNODES 3\n\
                    N 0 0 0 0 0 1000 0 - -\n\
                    N 1 3 4 15 0 1000 0 2 -\n\
                    N 2 6 8 -15 0 1000 0 - 1\n";
        let inst = parse_instance(text).unwrap().instance;
        let seq = vec![NodeId(1), NodeId(2), NodeId(1), NodeId(2)];
        let report = validate(&inst, &single_route(&inst, seq.clone()));
        assert!(report.feasible, "{report:?}");
        let run = replay(&inst, &single_route(&inst, seq));
        let transfers: Vec<f64> = run.traces[0].visits.iter().map(|v| v.transfer).collect();
        assert_eq!(transfers, vec![10.0, -10.0, 5.0, -5.0]);
    }

    #[test]
    fn tardiness_recomputes_from_the_trace() {
        let inst = table_instance();
        let solution = parse_routes(&inst, TOUR).unwrap();
        let run = replay(&inst, &solution);
        let from_trace: f64 = run
            .traces
            .iter()
            .flat_map(|t| t.visits.iter())
            .filter(|v| v.is_serving())
            .map(|v| {
                let close = inst.node(v.node).unwrap().l;
                (v.service_start - close).max(0.0)
            })
            .sum();
        let v = vector_of(&inst, &run.traces);
        assert!((v.total_tardiness - from_trace).abs() < 1e-9);
    }

    #[test]
    fn cost_reversal_and_scaling() {
        let inst = table_instance();
        let mut solution = Solution::empty(&inst);
        solution.routes[0].1 = vec![NodeId(2), NodeId(1)];
        solution.routes[1].1 = vec![NodeId(5), NodeId(6)];
        let forward = objective_vector(&inst, &solution);
        let mut reversed = solution.clone();
        reversed.routes.reverse();
        let backward = objective_vector(&inst, &reversed);
        assert_eq!(forward.transport_cost, backward.transport_cost);
    }

    #[test]
    fn route_file_round_trip_and_errors() {
        let inst = table_instance();
        let solution = parse_routes(&inst, TOUR).unwrap();
        let text = format_routes(&solution);
        assert_eq!(parse_routes(&inst, &text).unwrap(), solution);

        for (text, needle) in [
            ("R 1 : 1 2 0\n", "start and end at depot"),
            ("R 1 : 0 1 0 2 0\n", "route ends"),
            ("R 9 : 0 1 0\n", "unknown vehicle"),
            ("R 1 : 0 99 0\n", "unknown node"),
            ("R 1 : 0 1 0\nR 1 : 0 2 0\n", "more than once"),
            ("droids\n", "expected"),
        ] {
            let err = parse_routes(&inst, text).unwrap_err();
            assert!(
                err.message.contains(needle),
                "expected `{needle}` in `{}`",
                err.message
            );
        }
    }

    #[test]
    fn scorer_matches_the_trace_path() {
        let inst = table_instance();
        let pairs = inst.derive_precedence_pairs().unwrap();
        let mut scorer = Scorer::new(&inst, &pairs);
        let published = parse_routes(&inst, TOUR).unwrap();
        let mut split = Solution::empty(&inst);
        split.routes[0].1 = vec![NodeId(2), NodeId(1)];
        split.routes[2].1 = vec![NodeId(11), NodeId(10), NodeId(16)];
        for solution in [Solution::empty(&inst), published, split] {
            let (fast_v, fast_ok) = scorer.score(&solution);
            let (ref_v, ref_ok) = score(&inst, &pairs, &solution);
            assert_eq!(fast_v, ref_v);
            assert_eq!(fast_ok, ref_ok);
        }
    }

    #[test]
    fn score_matches_validate_verdict() {
        let inst = pair_instance(10.0);
        let pairs = inst.derive_precedence_pairs().unwrap();
        for seq in [vec![NodeId(1), NodeId(2)], vec![NodeId(2), NodeId(1)]] {
            let solution = single_route(&inst, seq);
            let (vector, feasible) = score(&inst, &pairs, &solution);
            let report = validate(&inst, &solution);
            assert_eq!(feasible, report.feasible);
            assert_eq!(vector, objective_vector(&inst, &solution));
        }
    }
}
