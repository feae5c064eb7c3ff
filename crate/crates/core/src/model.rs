//! Domain model: nodes, vehicles, instances, geometry, and precedence links.
//!
//! An [`Instance`] holds the node set (depot is always node 0), the vehicle
//! fleet, and optional per-arc distance overrides. Distances default to the
//! Euclidean metric; an override may replace a single directed arc with a
//! fixed length or mark it absent (no road). Travel time for a vehicle is
//! distance divided by that vehicle's speed.
//!
//! Supplier/client precedence comes from the per-node `succ`/`pred` link
//! columns. Listings are unioned from both columns of both endpoints and the
//! pair is always oriented supplier → client by the sign of `q`, which
//! tolerates instances whose link columns are not mutually reciprocal;
//! [`reciprocity_warnings`] reports every one-sided listing.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

/// Identifier of a node. Node 0 is always the depot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct NodeId(pub u32);

impl NodeId {
    /// The depot id.
    pub const DEPOT: NodeId = NodeId(0);
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier of a fleet vehicle (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct VehicleId(pub u32);

impl fmt::Display for VehicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A depot, supplier (`q > 0`), or client (`q < 0`).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Node {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    /// Quantity to handle: positive supply, negative demand, zero for the depot.
    pub q: f64,
    /// Time window open.
    pub e: f64,
    /// Time window close.
    pub l: f64,
    /// Service duration charged at every serving visit.
    pub s: f64,
    /// Listed successor links (client side of a supplier row).
    pub succ: Vec<NodeId>,
    /// Listed predecessor links (supplier side of a client row).
    pub pred: Vec<NodeId>,
}

impl Node {
    pub fn is_depot(&self) -> bool {
        self.id == NodeId::DEPOT
    }

    pub fn is_supplier(&self) -> bool {
        self.q > 0.0
    }

    pub fn is_client(&self) -> bool {
        self.q < 0.0
    }
}

/// One fleet vehicle: capacity bound, cost per length unit, speed.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct VehicleSpec {
    pub id: VehicleId,
    pub capacity: f64,
    pub unit_cost: f64,
    pub speed: f64,
}

/// A supplier → client precedence link: the supplier's first service must
/// depart no later than the client's first service departs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PrecedencePair {
    pub supplier: NodeId,
    pub client: NodeId,
}

/// Distance override for one directed arc.
///
/// `None` marks the arc as absent (no path between the endpoints).
pub type EdgeOverride = Option<f64>;

/// A parsed problem instance.
///
/// Immutable after construction; cheap to share between worker threads.
#[derive(Debug, Clone)]
pub struct Instance {
    nodes: Vec<Node>,
    vehicles: Vec<VehicleSpec>,
    overrides: BTreeMap<(NodeId, NodeId), EdgeOverride>,
    index: BTreeMap<NodeId, usize>,
    /// Dense distance matrix over node indices; NaN encodes an absent arc.
    matrix: Vec<f64>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.vehicles == other.vehicles
            && self.overrides == other.overrides
    }
}

/// Instance construction and link errors.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    NoNodes,
    MissingDepot,
    DepotNotNeutral { q: f64 },
    DepotHasLinks,
    DuplicateNode(NodeId),
    WindowInverted { node: NodeId, e: f64, l: f64 },
    NegativeService { node: NodeId, s: f64 },
    SelfLink(NodeId),
    UnknownReference { node: NodeId, referenced: NodeId },
    NonFinite { node: NodeId, field: &'static str },
    NoVehicles,
    DuplicateVehicle(VehicleId),
    VehicleIdOutOfRange { vehicle: VehicleId, fleet: usize },
    NegativeCapacity(VehicleId),
    NegativeCost(VehicleId),
    NonPositiveSpeed(VehicleId),
    UnknownEdgeNode(NodeId),
    /// A succ/pred listing joins two nodes that are not a supplier/client pair.
    InvalidLink { a: NodeId, b: NodeId },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::NoNodes => write!(f, "instance has no nodes"),
            ModelError::MissingDepot => write!(f, "missing depot node 0"),
            ModelError::DepotNotNeutral { q } => {
                write!(f, "depot must have q = 0, found {q}")
            }
            ModelError::DepotHasLinks => write!(f, "depot must have empty succ/pred lists"),
            ModelError::DuplicateNode(id) => write!(f, "duplicate node id {id}"),
            ModelError::WindowInverted { node, e, l } => {
                write!(f, "node {node}: window open {e} exceeds close {l}")
            }
            ModelError::NegativeService { node, s } => {
                write!(f, "node {node}: negative service time {s}")
            }
            ModelError::SelfLink(id) => write!(f, "node {id} lists itself as a link"),
            ModelError::UnknownReference { node, referenced } => {
                write!(f, "node {node} references unknown node {referenced}")
            }
            ModelError::NonFinite { node, field } => {
                write!(f, "node {node}: field {field} is not finite")
            }
            ModelError::NoVehicles => write!(f, "instance has no vehicles"),
            ModelError::DuplicateVehicle(id) => write!(f, "duplicate vehicle id {id}"),
            ModelError::VehicleIdOutOfRange { vehicle, fleet } => {
                write!(f, "vehicle id {vehicle} outside 1..={fleet}")
            }
            ModelError::NegativeCapacity(id) => write!(f, "vehicle {id}: negative capacity"),
            ModelError::NegativeCost(id) => write!(f, "vehicle {id}: negative unit cost"),
            ModelError::NonPositiveSpeed(id) => {
                write!(f, "vehicle {id}: speed must be positive")
            }
            ModelError::UnknownEdgeNode(id) => {
                write!(f, "edge override references unknown node {id}")
            }
            ModelError::InvalidLink { a, b } => {
                write!(
                    f,
                    "link between {a} and {b} must join a supplier (q > 0) and a client (q < 0)"
                )
            }
        }
    }
}

impl core::error::Error for ModelError {}

impl Instance {
    /// Builds an instance, checking every structural invariant.
    ///
    /// Node order is preserved as given. Overrides are directed: an entry for
    /// `(i, j)` replaces only the `i → j` arc.
    pub fn new(
        nodes: Vec<Node>,
        vehicles: Vec<VehicleSpec>,
        overrides: BTreeMap<(NodeId, NodeId), EdgeOverride>,
    ) -> Result<Instance, ModelError> {
        if nodes.is_empty() {
            return Err(ModelError::NoNodes);
        }
        let mut index = BTreeMap::new();
        for (i, node) in nodes.iter().enumerate() {
            if index.insert(node.id, i).is_some() {
                return Err(ModelError::DuplicateNode(node.id));
            }
            for (field, value) in [
                ("x", node.x),
                ("y", node.y),
                ("q", node.q),
                ("e", node.e),
                ("l", node.l),
                ("s", node.s),
            ] {
                if !value.is_finite() {
                    return Err(ModelError::NonFinite {
                        node: node.id,
                        field,
                    });
                }
            }
            if node.e > node.l {
                return Err(ModelError::WindowInverted {
                    node: node.id,
                    e: node.e,
                    l: node.l,
                });
            }
            if node.s < 0.0 {
                return Err(ModelError::NegativeService {
                    node: node.id,
                    s: node.s,
                });
            }
        }
        let depot_idx = *index.get(&NodeId::DEPOT).ok_or(ModelError::MissingDepot)?;
        let depot = &nodes[depot_idx];
        if depot.q != 0.0 {
            return Err(ModelError::DepotNotNeutral { q: depot.q });
        }
        if !depot.succ.is_empty() || !depot.pred.is_empty() {
            return Err(ModelError::DepotHasLinks);
        }
        for node in &nodes {
            for &linked in node.succ.iter().chain(node.pred.iter()) {
                if linked == node.id {
                    return Err(ModelError::SelfLink(node.id));
                }
                if !index.contains_key(&linked) {
                    return Err(ModelError::UnknownReference {
                        node: node.id,
                        referenced: linked,
                    });
                }
            }
        }

        if vehicles.is_empty() {
            return Err(ModelError::NoVehicles);
        }
        let fleet = vehicles.len();
        let mut seen = BTreeSet::new();
        for v in &vehicles {
            if !seen.insert(v.id) {
                return Err(ModelError::DuplicateVehicle(v.id));
            }
            if v.id.0 == 0 || v.id.0 as usize > fleet {
                return Err(ModelError::VehicleIdOutOfRange {
                    vehicle: v.id,
                    fleet,
                });
            }
            if !(v.capacity >= 0.0) {
                return Err(ModelError::NegativeCapacity(v.id));
            }
            if !(v.unit_cost >= 0.0) {
                return Err(ModelError::NegativeCost(v.id));
            }
            if !(v.speed > 0.0) {
                return Err(ModelError::NonPositiveSpeed(v.id));
            }
        }

        for &(i, j) in overrides.keys() {
            for id in [i, j] {
                if !index.contains_key(&id) {
                    return Err(ModelError::UnknownEdgeNode(id));
                }
            }
        }

        let n = nodes.len();
        let mut matrix = alloc::vec![0.0f64; n * n];
        for a in 0..n {
            for b in 0..n {
                let dx = nodes[a].x - nodes[b].x;
                let dy = nodes[a].y - nodes[b].y;
                matrix[a * n + b] = libm::sqrt(dx * dx + dy * dy);
            }
        }
        for (&(i, j), value) in &overrides {
            let a = index[&i];
            let b = index[&j];
            matrix[a * n + b] = value.unwrap_or(f64::NAN);
        }

        Ok(Instance {
            nodes,
            vehicles,
            overrides,
            index,
            matrix,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn vehicles(&self) -> &[VehicleSpec] {
        &self.vehicles
    }

    pub fn overrides(&self) -> &BTreeMap<(NodeId, NodeId), EdgeOverride> {
        &self.overrides
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.index.get(&id).map(|&i| &self.nodes[i])
    }

    pub fn node_index(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub fn vehicle(&self, id: VehicleId) -> Option<&VehicleSpec> {
        self.vehicles.iter().find(|v| v.id == id)
    }

    pub fn depot(&self) -> &Node {
        self.node(NodeId::DEPOT).expect("depot checked at construction")
    }

    /// Distance of the directed arc `i → j`; `None` when the arc is absent.
    ///
    /// Overrides win; otherwise the Euclidean distance between the endpoints.
    pub fn distance(&self, i: NodeId, j: NodeId) -> Option<f64> {
        let a = self.node_index(i)?;
        let b = self.node_index(j)?;
        self.distance_by_index(a, b)
    }

    /// Distance by node index (hot path for the simulators).
    pub fn distance_by_index(&self, a: usize, b: usize) -> Option<f64> {
        let d = self.matrix[a * self.nodes.len() + b];
        if d.is_nan() {
            None
        } else {
            Some(d)
        }
    }

    /// Travel time of vehicle `k` over the arc `i → j`: distance / speed.
    ///
    /// Absent arcs propagate as `None`.
    pub fn travel_time(&self, k: VehicleId, i: NodeId, j: NodeId) -> Option<f64> {
        let speed = self.vehicle(k)?.speed;
        self.distance(i, j).map(|d| d / speed)
    }

    /// Sum of all positive quantities.
    pub fn total_supply(&self) -> f64 {
        self.nodes.iter().map(|n| n.q.max(0.0)).sum()
    }

    /// Sum of all demanded quantities (as a positive number).
    pub fn total_demand(&self) -> f64 {
        self.nodes.iter().map(|n| (-n.q).max(0.0)).sum()
    }

    /// Derives the supplier → client precedence pairs from the link columns.
    ///
    /// All four listing directions are unioned and each pair is oriented by
    /// the sign of `q`, so a link recorded in the "wrong" column still yields
    /// the evident pair. A listing that joins two suppliers, two clients, or
    /// anything with the depot is an error naming both nodes.
    pub fn derive_precedence_pairs(&self) -> Result<Vec<PrecedencePair>, ModelError> {
        let mut pairs = BTreeSet::new();
        for node in &self.nodes {
            for &other in node.succ.iter().chain(node.pred.iter()) {
                let partner = self.node(other).expect("checked at construction");
                let (supplier, client) = if node.is_supplier() && partner.is_client() {
                    (node.id, partner.id)
                } else if node.is_client() && partner.is_supplier() {
                    (partner.id, node.id)
                } else {
                    return Err(ModelError::InvalidLink {
                        a: node.id,
                        b: partner.id,
                    });
                };
                pairs.insert(PrecedencePair { supplier, client });
            }
        }
        Ok(pairs.into_iter().collect())
    }
}

/// Which link column a warning refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkColumn {
    Succ,
    Pred,
}

impl fmt::Display for LinkColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LinkColumn::Succ => write!(f, "succ"),
            LinkColumn::Pred => write!(f, "pred"),
        }
    }
}

/// A one-sided link listing: `node` lists `listed`, but `listed` does not
/// mirror the entry in the opposite column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReciprocityWarning {
    pub node: NodeId,
    pub column: LinkColumn,
    pub listed: NodeId,
}

impl fmt::Display for ReciprocityWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mirror = match self.column {
            LinkColumn::Succ => LinkColumn::Pred,
            LinkColumn::Pred => LinkColumn::Succ,
        };
        write!(
            f,
            "node {} lists {} in {} but node {} does not list {} in {}",
            self.node, self.listed, self.column, self.listed, self.node, mirror
        )
    }
}

/// Reports every succ/pred listing that the partner node does not mirror.
pub fn reciprocity_warnings(instance: &Instance) -> Vec<ReciprocityWarning> {
    let mut warnings = Vec::new();
    for node in instance.nodes() {
        for &listed in &node.succ {
            let partner = instance.node(listed).expect("checked at construction");
            if !partner.pred.contains(&node.id) {
                warnings.push(ReciprocityWarning {
                    node: node.id,
                    column: LinkColumn::Succ,
                    listed,
                });
            }
        }
        for &listed in &node.pred {
            let partner = instance.node(listed).expect("checked at construction");
            if !partner.succ.contains(&node.id) {
                warnings.push(ReciprocityWarning {
                    node: node.id,
                    column: LinkColumn::Pred,
                    listed,
                });
            }
        }
    }
    warnings
}

/// Parse result: the instance plus any reciprocity warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedInstance {
    pub instance: Instance,
    pub warnings: Vec<ReciprocityWarning>,
}

/// Instance file parse error, naming the offending line.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl core::error::Error for ParseError {}

fn parse_num(token: &str, what: &str, line: usize) -> Result<f64, ParseError> {
    token.parse::<f64>().map_err(|_| ParseError {
        line,
        message: format!("invalid {what} `{token}`"),
    })
}

fn parse_id(token: &str, what: &str, line: usize) -> Result<u32, ParseError> {
    token.parse::<u32>().map_err(|_| ParseError {
        line,
        message: format!("invalid {what} `{token}`"),
    })
}

fn parse_link_list(token: &str, line: usize) -> Result<Vec<NodeId>, ParseError> {
    if token == "-" {
        return Ok(Vec::new());
    }
    token
        .split(',')
        .map(|part| parse_id(part, "link id", line).map(NodeId))
        .collect()
}

fn format_link_list(ids: &[NodeId]) -> String {
    if ids.is_empty() {
        return "-".to_string();
    }
    let parts: Vec<String> = ids.iter().map(|id| id.to_string()).collect();
    parts.join(",")
}

/// Parses the line-oriented instance format.
///
/// ```text
/// PDPTW 1
/// VEHICLES <K>
/// V <id> <capacity> <unit_cost> <speed>        (K lines)
/// NODES <n>
/// N <id> <x> <y> <q> <e> <l> <s> <succ> <pred> (n lines)
/// EDGE <i> <j> <length|INF>                    (optional, directed)
/// ```
///
/// `#` starts a comment, blank lines are skipped, `succ`/`pred` are comma
/// lists or `-` for none. An `EDGE` line overrides one directed arc; `INF`
/// marks the arc absent. Reciprocity mismatches in the link columns are
/// returned as warnings, not errors.
pub fn parse_instance(text: &str) -> Result<ParsedInstance, ParseError> {
    struct Liner<'a> {
        lines: core::iter::Enumerate<core::str::Lines<'a>>,
    }
    impl<'a> Liner<'a> {
        fn next_payload(&mut self) -> Option<(usize, Vec<&'a str>)> {
            for (idx, raw) in self.lines.by_ref() {
                let stripped = match raw.find('#') {
                    Some(pos) => &raw[..pos],
                    None => raw,
                };
                let tokens: Vec<&str> = stripped.split_whitespace().collect();
                if !tokens.is_empty() {
                    return Some((idx + 1, tokens));
                }
            }
            None
        }
    }

    let mut liner = Liner {
        lines: text.lines().enumerate(),
    };

    let (line, header) = liner.next_payload().ok_or(ParseError {
        line: 0,
        message: "empty instance file".to_string(),
    })?;
    if header.len() != 2 || header[0] != "PDPTW" || header[1] != "1" {
        return Err(ParseError {
            line,
            message: "expected header `PDPTW 1`".to_string(),
        });
    }

    let (line, veh_header) = liner.next_payload().ok_or(ParseError {
        line,
        message: "missing VEHICLES section".to_string(),
    })?;
    if veh_header.len() != 2 || veh_header[0] != "VEHICLES" {
        return Err(ParseError {
            line,
            message: "expected `VEHICLES <count>`".to_string(),
        });
    }
    let fleet = parse_id(veh_header[1], "vehicle count", line)? as usize;

    let mut vehicles = Vec::with_capacity(fleet);
    let mut seen_vehicles = BTreeSet::new();
    for _ in 0..fleet {
        let (line, tokens) = liner.next_payload().ok_or(ParseError {
            line,
            message: format!("expected {fleet} vehicle lines"),
        })?;
        if tokens.len() != 5 || tokens[0] != "V" {
            return Err(ParseError {
                line,
                message: "expected `V <id> <capacity> <unit_cost> <speed>`".to_string(),
            });
        }
        let id = VehicleId(parse_id(tokens[1], "vehicle id", line)?);
        if id.0 == 0 || id.0 as usize > fleet {
            return Err(ParseError {
                line,
                message: format!("vehicle id {id} outside 1..={fleet}"),
            });
        }
        if !seen_vehicles.insert(id) {
            return Err(ParseError {
                line,
                message: format!("duplicate vehicle id {id}"),
            });
        }
        let capacity = parse_num(tokens[2], "capacity", line)?;
        let unit_cost = parse_num(tokens[3], "unit cost", line)?;
        let speed = parse_num(tokens[4], "speed", line)?;
        if capacity < 0.0 {
            return Err(ParseError {
                line,
                message: format!("vehicle {id}: negative capacity"),
            });
        }
        if unit_cost < 0.0 {
            return Err(ParseError {
                line,
                message: format!("vehicle {id}: negative unit cost"),
            });
        }
        if !(speed > 0.0) {
            return Err(ParseError {
                line,
                message: format!("vehicle {id}: speed must be positive"),
            });
        }
        vehicles.push(VehicleSpec {
            id,
            capacity,
            unit_cost,
            speed,
        });
    }

    let (line, node_header) = liner.next_payload().ok_or(ParseError {
        line: 0,
        message: "missing NODES section".to_string(),
    })?;
    if node_header.len() != 2 || node_header[0] != "NODES" {
        return Err(ParseError {
            line,
            message: "expected `NODES <count>`".to_string(),
        });
    }
    let node_count = parse_id(node_header[1], "node count", line)? as usize;

    let mut nodes = Vec::with_capacity(node_count);
    let mut node_lines: BTreeMap<NodeId, usize> = BTreeMap::new();
    for _ in 0..node_count {
        let (line, tokens) = liner.next_payload().ok_or(ParseError {
            line,
            message: format!("expected {node_count} node lines"),
        })?;
        if tokens.len() != 10 || tokens[0] != "N" {
            return Err(ParseError {
                line,
                message: "expected `N <id> <x> <y> <q> <e> <l> <s> <succ> <pred>`".to_string(),
            });
        }
        let id = NodeId(parse_id(tokens[1], "node id", line)?);
        if node_lines.insert(id, line).is_some() {
            return Err(ParseError {
                line,
                message: format!("duplicate node id {id}"),
            });
        }
        let node = Node {
            id,
            x: parse_num(tokens[2], "x", line)?,
            y: parse_num(tokens[3], "y", line)?,
            q: parse_num(tokens[4], "q", line)?,
            e: parse_num(tokens[5], "e", line)?,
            l: parse_num(tokens[6], "l", line)?,
            s: parse_num(tokens[7], "s", line)?,
            succ: parse_link_list(tokens[8], line)?,
            pred: parse_link_list(tokens[9], line)?,
        };
        if node.e > node.l {
            return Err(ParseError {
                line,
                message: format!("node {id}: window open {} exceeds close {}", node.e, node.l),
            });
        }
        if node.s < 0.0 {
            return Err(ParseError {
                line,
                message: format!("node {id}: negative service time"),
            });
        }
        nodes.push(node);
    }

    let mut overrides: BTreeMap<(NodeId, NodeId), EdgeOverride> = BTreeMap::new();
    while let Some((line, tokens)) = liner.next_payload() {
        if tokens.len() != 4 || tokens[0] != "EDGE" {
            return Err(ParseError {
                line,
                message: format!("unexpected content `{}`", tokens.join(" ")),
            });
        }
        let i = NodeId(parse_id(tokens[1], "edge endpoint", line)?);
        let j = NodeId(parse_id(tokens[2], "edge endpoint", line)?);
        let value = if tokens[3] == "INF" {
            None
        } else {
            let length = parse_num(tokens[3], "edge length", line)?;
            if length < 0.0 {
                return Err(ParseError {
                    line,
                    message: "negative edge length".to_string(),
                });
            }
            Some(length)
        };
        for id in [i, j] {
            if !node_lines.contains_key(&id) {
                return Err(ParseError {
                    line,
                    message: format!("edge references unknown node {id}"),
                });
            }
        }
        overrides.insert((i, j), value);
    }

    // Cross-line checks delegate to Instance::new; map its verdict back to
    // the line of the node it names where possible.
    match Instance::new(nodes, vehicles, overrides) {
        Ok(instance) => {
            let warnings = reciprocity_warnings(&instance);
            Ok(ParsedInstance { instance, warnings })
        }
        Err(err) => {
            let line = match &err {
                ModelError::UnknownReference { node, .. }
                | ModelError::SelfLink(node)
                | ModelError::WindowInverted { node, .. }
                | ModelError::NegativeService { node, .. }
                | ModelError::NonFinite { node, .. } => {
                    node_lines.get(node).copied().unwrap_or(0)
                }
                _ => 0,
            };
            Err(ParseError {
                line,
                message: err.to_string(),
            })
        }
    }
}

/// Writes an instance in the canonical file format; `parse_instance` of the
/// result reproduces the instance field for field.
pub fn serialize_instance(instance: &Instance) -> String {
    let mut out = String::new();
    out.push_str("PDPTW 1\n");
    out.push_str(&format!("VEHICLES {}\n", instance.vehicles().len()));
    for v in instance.vehicles() {
        out.push_str(&format!(
            "V {} {} {} {}\n",
            v.id, v.capacity, v.unit_cost, v.speed
        ));
    }
    out.push_str(&format!("NODES {}\n", instance.nodes().len()));
    for n in instance.nodes() {
        out.push_str(&format!(
            "N {} {} {} {} {} {} {} {} {}\n",
            n.id,
            n.x,
            n.y,
            n.q,
            n.e,
            n.l,
            n.s,
            format_link_list(&n.succ),
            format_link_list(&n.pred),
        ));
    }
    for (&(i, j), value) in instance.overrides() {
        match value {
            Some(length) => out.push_str(&format!("EDGE {i} {j} {length}\n")),
            None => out.push_str(&format!("EDGE {i} {j} INF\n")),
        }
    }
    out
}
