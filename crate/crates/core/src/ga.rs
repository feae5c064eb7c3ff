//! Genetic search over per-vehicle visit sequences: randomized-greedy
//! construction, route-exchange crossover, swap/relocate/merge mutation, a
//! deterministic repair procedure, and the generational loop.
//!
//! Selection runs tournaments on the weighted aggregate while a Pareto
//! archive observes every feasible evaluation, so the scalar search also
//! yields the non-dominated front. All randomness flows from one seeded
//! ChaCha8 stream; fitness evaluation is pure and may be delegated to a
//! parallel [`FitnessEvaluator`] without changing any result.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::evaluation::{replay, ObjectiveVector, RouteTrace, Scorer, Solution};
use crate::model::{Instance, ModelError, NodeId, PrecedencePair};
use crate::moo::{aggregate, ParetoArchive, Weights, WeightsError};

/// Cached evaluation of a chromosome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fitness {
    pub vector: ObjectiveVector,
    pub aggregate: f64,
    pub feasible: bool,
}

/// A candidate solution plus its cached fitness.
///
/// Variation operators return fresh chromosomes with the cache empty, so a
/// stale score can never leak through a mutation.
#[derive(Debug, Clone)]
pub struct Chromosome {
    pub solution: Solution,
    fitness: Option<Fitness>,
}

impl Chromosome {
    pub fn new(solution: Solution) -> Chromosome {
        Chromosome {
            solution,
            fitness: None,
        }
    }

    /// The cached fitness, if this chromosome has been evaluated.
    pub fn fitness(&self) -> Option<Fitness> {
        self.fitness
    }
}

/// Knobs of the evolutionary loop.
#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub crossover_rate: f64,
    pub mutation_rate: f64,
    pub tournament: usize,
    pub elites: usize,
    pub seed: u64,
    pub weights: Weights,
    /// Generations without improvement before an early stop; 0 disables.
    pub stagnation: usize,
}

impl Default for GaConfig {
    fn default() -> GaConfig {
        GaConfig {
            population: 64,
            generations: 500,
            crossover_rate: 0.9,
            mutation_rate: 0.2,
            tournament: 3,
            elites: 1,
            seed: 0,
            weights: Weights::UNIT,
            stagnation: 0,
        }
    }
}

impl GaConfig {
    /// Checks every range invariant.
    pub fn check(&self) -> Result<(), ConfigError> {
        if self.population < 2 {
            return Err(ConfigError::PopulationTooSmall);
        }
        if self.elites >= self.population {
            return Err(ConfigError::TooManyElites);
        }
        for (name, rate) in [
            ("crossover", self.crossover_rate),
            ("mutation", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&rate) || !rate.is_finite() {
                return Err(ConfigError::RateOutOfRange(name));
            }
        }
        if self.tournament == 0 {
            return Err(ConfigError::TournamentEmpty);
        }
        self.weights.check().map_err(ConfigError::Weights)
    }
}

/// Invalid [`GaConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigError {
    PopulationTooSmall,
    TooManyElites,
    RateOutOfRange(&'static str),
    TournamentEmpty,
    Weights(WeightsError),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::PopulationTooSmall => write!(f, "population must be at least 2"),
            ConfigError::TooManyElites => write!(f, "elite count must be below population size"),
            ConfigError::RateOutOfRange(which) => {
                write!(f, "{which} rate must lie in [0, 1]")
            }
            ConfigError::TournamentEmpty => write!(f, "tournament size must be at least 1"),
            ConfigError::Weights(err) => write!(f, "{err}"),
        }
    }
}

impl core::error::Error for ConfigError {}

/// Why a solve run could not start or finish.
#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    Config(ConfigError),
    /// The succ/pred link columns do not form supplier/client pairs.
    Links(ModelError),
    /// Quantities exist but no vehicle can carry anything.
    NoUsableCapacity,
    /// Clients demand more than suppliers offer; coverage is impossible.
    DemandExceedsSupply { demand: f64, supply: f64 },
    /// Surplus supply cannot fit in the fleet at route end.
    SupplyExceedsFleet { excess: f64, fleet_capacity: f64 },
    /// No feasible individual could be constructed within the attempt budget.
    Construction { attempts: usize },
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::Config(err) => write!(f, "invalid configuration: {err}"),
            SolveError::Links(err) => write!(f, "invalid precedence links: {err}"),
            SolveError::NoUsableCapacity => {
                write!(f, "no vehicle has positive capacity for the outstanding quantities")
            }
            SolveError::DemandExceedsSupply { demand, supply } => {
                write!(f, "total demand {demand} exceeds total supply {supply}")
            }
            SolveError::SupplyExceedsFleet {
                excess,
                fleet_capacity,
            } => write!(
                f,
                "supply surplus {excess} cannot fit in fleet capacity {fleet_capacity}"
            ),
            SolveError::Construction { attempts } => {
                write!(f, "no feasible individual after {attempts} construction attempts")
            }
        }
    }
}

impl core::error::Error for SolveError {}

/// Scores a batch of solutions.
///
/// Implementations must return one `(vector, hard-feasible)` result per
/// input, in input order, each identical to what [`Scorer::score`] yields —
/// a parallel implementation changes throughput, never results.
pub trait FitnessEvaluator {
    fn evaluate(
        &mut self,
        instance: &Instance,
        pairs: &[PrecedencePair],
        batch: &[&Solution],
    ) -> Vec<(ObjectiveVector, bool)>;
}

/// In-process, single-threaded evaluator.
#[derive(Debug, Clone, Copy, Default)]
pub struct SequentialEvaluator;

impl FitnessEvaluator for SequentialEvaluator {
    fn evaluate(
        &mut self,
        instance: &Instance,
        pairs: &[PrecedencePair],
        batch: &[&Solution],
    ) -> Vec<(ObjectiveVector, bool)> {
        let mut scorer = Scorer::new(instance, pairs);
        batch.iter().map(|solution| scorer.score(solution)).collect()
    }
}

/// Outcome of [`evolve`]: the aggregate-best solution, the observed Pareto
/// front, and the run's bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub best: Solution,
    pub vector: ObjectiveVector,
    pub aggregate: f64,
    pub archive: ParetoArchive,
    /// Best aggregate in each generation's population, entry 0 = initial.
    pub history: Vec<f64>,
    pub evaluations: u64,
    pub config: GaConfig,
}

const REPAIR_PASS_LIMIT: usize = 48;
const CONSTRUCTION_ATTEMPTS: usize = 32;
const QUANTITY_EPS: f64 = 1e-9;

/// Why [`repair`] gave up on a chromosome.
#[derive(Debug, Clone, PartialEq)]
pub enum RepairError {
    /// The pass limit ran out before the hard families all passed.
    PassLimitExhausted,
    /// No applicable fix exists (e.g. a node only reachable over absent arcs).
    NoApplicableFix,
    /// The instance's links do not form supplier/client pairs.
    Links(ModelError),
}

impl fmt::Display for RepairError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RepairError::PassLimitExhausted => {
                write!(f, "repair pass limit exhausted before feasibility")
            }
            RepairError::NoApplicableFix => write!(f, "no applicable repair step"),
            RepairError::Links(err) => write!(f, "{err}"),
        }
    }
}

impl core::error::Error for RepairError {}

/// Per-client supplier listing derived from the precedence pairs.
fn suppliers_by_client(pairs: &[PrecedencePair]) -> BTreeMap<NodeId, Vec<NodeId>> {
    let mut map: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for pair in pairs {
        map.entry(pair.client).or_default().push(pair.supplier);
    }
    map
}

/// First serving visit per node: (route listing index, position, departure).
fn first_servings(traces: &[RouteTrace]) -> BTreeMap<NodeId, (usize, usize, f64)> {
    let mut first: BTreeMap<NodeId, (usize, usize, f64)> = BTreeMap::new();
    for (r, trace) in traces.iter().enumerate() {
        for (p, visit) in trace.visits.iter().enumerate() {
            if !visit.is_serving() {
                continue;
            }
            let slot = first.entry(visit.node).or_insert((r, p, visit.departure));
            if visit.departure < slot.2 {
                *slot = (r, p, visit.departure);
            }
        }
    }
    first
}

struct Probe {
    traces: Vec<RouteTrace>,
    leftover: BTreeMap<NodeId, f64>,
    first: BTreeMap<NodeId, (usize, usize, f64)>,
    sound: bool,
}

impl Probe {
    fn of(instance: &Instance, solution: &Solution) -> Probe {
        let run = replay(instance, solution);
        let first = first_servings(&run.traces);
        let sound = run.traces.iter().all(|t| t.missing_arcs.is_empty());
        Probe {
            traces: run.traces,
            leftover: run.leftover,
            first,
            sound,
        }
    }

    fn covered(&self) -> bool {
        self.leftover.values().all(|q| q.abs() <= QUANTITY_EPS)
    }

    /// Violated pairs in sorted order.
    fn precedence_violations(&self, pairs: &[PrecedencePair]) -> Vec<PrecedencePair> {
        pairs
            .iter()
            .filter(|pair| {
                match (self.first.get(&pair.supplier), self.first.get(&pair.client)) {
                    (None, None) => false,
                    (Some(s), Some(c)) => s.2 > c.2,
                    _ => true,
                }
            })
            .copied()
            .collect()
    }

    fn feasible(&self, pairs: &[PrecedencePair]) -> bool {
        self.sound && self.covered() && self.precedence_violations(pairs).is_empty()
    }
}

/// Cheapest route end where `node` can be appended as a nonzero transfer,
/// by added distance, route listing index breaking ties.
///
/// Appends never disturb the replay of what comes before them in the same
/// route, so an append that passes its load gate is guaranteed to move
/// goods; that strict progress is what lets the repair loop terminate.
fn best_append(
    instance: &Instance,
    solution: &Solution,
    probe: &Probe,
    node: NodeId,
    is_client: bool,
) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (r, (vehicle, seq)) in solution.routes.iter().enumerate() {
        let spec = instance.vehicle(*vehicle).expect("fleet vehicle");
        let end_load = probe.traces[r]
            .visits
            .last()
            .map_or(0.0, |visit| visit.load_after);
        let gate = if is_client {
            end_load > QUANTITY_EPS
        } else {
            end_load < spec.capacity - QUANTITY_EPS
        };
        if !gate {
            continue;
        }
        let end = seq.last().copied().unwrap_or(NodeId::DEPOT);
        let (Some(d_in), Some(d_home)) = (
            instance.distance(end, node),
            instance.distance(node, NodeId::DEPOT),
        ) else {
            continue;
        };
        let added = d_in + d_home - instance.distance(end, NodeId::DEPOT).unwrap_or(0.0);
        let better = match best {
            None => true,
            Some((b, br)) => {
                added.total_cmp(&b).then_with(|| r.cmp(&br)) == core::cmp::Ordering::Less
            }
        };
        if better {
            best = Some((added, r));
        }
    }
    best.map(|(_, r)| r)
}

/// One repair step; returns whether anything changed.
fn repair_step(
    instance: &Instance,
    pairs: &[PrecedencePair],
    clients: &BTreeMap<NodeId, Vec<NodeId>>,
    solution: &mut Solution,
    probe: &Probe,
) -> bool {
    // Order errors first: when both sides are served out of order, move the
    // client's first serving visit to just behind the supplier's. Pairs with
    // an unserved side fall through to coverage, which appends the absentee.
    for pair in probe.precedence_violations(pairs) {
        let (Some(&(rs, ps, _)), Some(&(rc, pc, _))) = (
            probe.first.get(&pair.supplier),
            probe.first.get(&pair.client),
        ) else {
            continue;
        };
        let node = solution.routes[rc].1.remove(pc);
        let at = if rs == rc && pc < ps { ps } else { ps + 1 };
        solution.routes[rs].1.insert(at, node);
        return true;
    }

    // Outstanding quantity: append one serving visit at the cheapest route
    // end. Clients go first — deliveries drain load and make room — and
    // suppliers fill in whenever no client is placeable yet.
    let mut todo: Vec<(bool, NodeId)> = probe
        .leftover
        .iter()
        .filter(|(_, q)| q.abs() > QUANTITY_EPS)
        .map(|(&id, &q)| (q < 0.0, id))
        .collect();
    todo.sort_by_key(|&(is_client, node)| (!is_client, node));
    for (is_client, node) in todo {
        if is_client {
            let suppliers = clients.get(&node).map(Vec::as_slice).unwrap_or(&[]);
            if !suppliers.iter().all(|s| probe.first.contains_key(s)) {
                // Its suppliers are queued behind it; try again next pass.
                continue;
            }
        }
        if let Some(r) = best_append(instance, solution, probe, node, is_client) {
            solution.routes[r].1.push(node);
            return true;
        }
    }
    false
}

fn repair_with(
    instance: &Instance,
    pairs: &[PrecedencePair],
    clients: &BTreeMap<NodeId, Vec<NodeId>>,
    chromosome: &Chromosome,
) -> Result<Chromosome, RepairError> {
    let mut solution = chromosome.solution.clone();
    for _ in 0..REPAIR_PASS_LIMIT {
        let probe = Probe::of(instance, &solution);
        if probe.feasible(pairs) {
            // An untouched feasible input keeps its cached fitness.
            if solution == chromosome.solution {
                return Ok(chromosome.clone());
            }
            return Ok(Chromosome::new(solution));
        }
        if !repair_step(instance, pairs, clients, &mut solution, &probe) {
            return Err(RepairError::NoApplicableFix);
        }
    }
    Err(RepairError::PassLimitExhausted)
}

/// Drives a chromosome to hard-family feasibility, or reports failure.
///
/// Deterministic and idempotent: a feasible input comes back unchanged.
/// Passes iterate to a fixpoint under a pass limit — precedence order fixes
/// first, then coverage appends (including shortfall revisits) at the
/// cheapest route end. Traversals of absent arcs are not repaired.
pub fn repair(instance: &Instance, chromosome: &Chromosome) -> Result<Chromosome, RepairError> {
    let pairs = instance
        .derive_precedence_pairs()
        .map_err(RepairError::Links)?;
    let clients = suppliers_by_client(&pairs);
    repair_with(instance, &pairs, &clients, chromosome)
}

/// Fleet-wide coverability gate shared by construction entry points.
fn check_coverable(instance: &Instance) -> Result<(), SolveError> {
    let supply = instance.total_supply();
    let demand = instance.total_demand();
    if supply == 0.0 && demand == 0.0 {
        return Ok(());
    }
    let fleet_capacity: f64 = instance.vehicles().iter().map(|v| v.capacity).sum();
    let max_capacity = instance
        .vehicles()
        .iter()
        .map(|v| v.capacity)
        .fold(0.0f64, f64::max);
    if max_capacity <= 0.0 {
        return Err(SolveError::NoUsableCapacity);
    }
    if demand > supply + QUANTITY_EPS {
        return Err(SolveError::DemandExceedsSupply { demand, supply });
    }
    if supply - demand > fleet_capacity + QUANTITY_EPS {
        return Err(SolveError::SupplyExceedsFleet {
            excess: supply - demand,
            fleet_capacity,
        });
    }
    Ok(())
}

/// One append candidate during greedy construction.
struct Append {
    added: f64,
    node: NodeId,
    route: usize,
    transfer: f64,
    departure: f64,
}

/// Randomized greedy construction: repeatedly append a serving visit chosen
/// from the three cheapest eligible (node, route) candidates.
fn construct(
    instance: &Instance,
    clients: &BTreeMap<NodeId, Vec<NodeId>>,
    rng: &mut ChaCha8Rng,
) -> Solution {
    let mut solution = Solution::empty(instance);
    let mut pool: BTreeMap<NodeId, f64> = crate::evaluation::outstanding_quantities(instance);
    let specs: Vec<_> = instance.vehicles().to_vec();
    let mut end: Vec<NodeId> = specs.iter().map(|_| NodeId::DEPOT).collect();
    let mut end_dep: Vec<f64> = specs.iter().map(|_| 0.0).collect();
    let mut load: Vec<f64> = specs.iter().map(|_| 0.0).collect();
    let mut first_dep: BTreeMap<NodeId, f64> = BTreeMap::new();

    let mut budget = 8 * pool.len() + 8;
    while pool.values().any(|q| q.abs() > QUANTITY_EPS) && budget > 0 {
        budget -= 1;
        let mut candidates: Vec<Append> = Vec::new();
        let gather = |enforce_order: bool, candidates: &mut Vec<Append>| {
            for (&node, &q) in &pool {
                if q.abs() <= QUANTITY_EPS {
                    continue;
                }
                let spec_node = instance.node(node).expect("pool node");
                for (r, spec) in specs.iter().enumerate() {
                    let transfer = if q > 0.0 {
                        q.min(spec.capacity - load[r])
                    } else {
                        (-q).min(load[r])
                    };
                    if transfer <= QUANTITY_EPS {
                        continue;
                    }
                    let Some(d) = instance.distance(end[r], node) else {
                        continue;
                    };
                    let arrival = end_dep[r] + d / spec.speed;
                    let start = arrival.max(spec_node.e);
                    let departure = start + spec_node.s;
                    if q < 0.0 && enforce_order && !first_dep.contains_key(&node) {
                        let suppliers =
                            clients.get(&node).map(Vec::as_slice).unwrap_or(&[]);
                        let ok = suppliers.iter().all(|s| {
                            first_dep.get(s).is_some_and(|&dep| dep <= departure)
                        });
                        if !ok {
                            continue;
                        }
                    }
                    candidates.push(Append {
                        added: d,
                        node,
                        route: r,
                        transfer: if q > 0.0 { transfer } else { -transfer },
                        departure,
                    });
                }
            }
        };
        gather(true, &mut candidates);
        if candidates.is_empty() {
            // Deadlocked on ordering: let repair untangle what this breaks.
            gather(false, &mut candidates);
        }
        if candidates.is_empty() {
            break;
        }
        candidates.sort_by(|a, b| {
            a.added
                .total_cmp(&b.added)
                .then_with(|| (a.node, a.route).cmp(&(b.node, b.route)))
        });
        let pick = &candidates[rng.gen_range(0..candidates.len().min(3))];
        let r = pick.route;
        solution.routes[r].1.push(pick.node);
        *pool.get_mut(&pick.node).unwrap() -= pick.transfer;
        load[r] += pick.transfer;
        end[r] = pick.node;
        end_dep[r] = pick.departure;
        first_dep.entry(pick.node).or_insert(pick.departure);
    }
    solution
}

fn init_population_with(
    instance: &Instance,
    config: &GaConfig,
    pairs: &[PrecedencePair],
    clients: &BTreeMap<NodeId, Vec<NodeId>>,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Chromosome>, SolveError> {
    check_coverable(instance)?;
    let mut population = Vec::with_capacity(config.population);
    for _ in 0..config.population {
        let mut built = None;
        for _ in 0..CONSTRUCTION_ATTEMPTS {
            let candidate = Chromosome::new(construct(instance, clients, rng));
            if let Ok(repaired) = repair_with(instance, pairs, clients, &candidate) {
                built = Some(repaired);
                break;
            }
        }
        match built {
            Some(chromosome) => population.push(chromosome),
            None => {
                return Err(SolveError::Construction {
                    attempts: CONSTRUCTION_ATTEMPTS,
                })
            }
        }
    }
    Ok(population)
}

/// Builds `population` feasible chromosomes by randomized greedy insertion
/// followed by [`repair`]; deterministic for a given rng state.
pub fn init_population(
    instance: &Instance,
    config: &GaConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Chromosome>, SolveError> {
    config.check().map_err(SolveError::Config)?;
    let pairs = instance.derive_precedence_pairs().map_err(SolveError::Links)?;
    let clients = suppliers_by_client(&pairs);
    init_population_with(instance, config, &pairs, &clients, rng)
}

/// Route-exchange recombination core: keep a random subset of `keeper`'s
/// routes, then scan `donor`'s visit order for whatever is still missing.
fn cross_one(
    instance: &Instance,
    keeper: &Solution,
    donor: &Solution,
    rng: &mut ChaCha8Rng,
) -> Solution {
    let mut child = Solution {
        routes: keeper
            .routes
            .iter()
            .map(|(v, seq)| {
                let kept = if rng.gen_bool(0.5) { seq.clone() } else { Vec::new() };
                (*v, kept)
            })
            .collect(),
    };
    let mut leftover = replay(instance, &child).leftover;
    for (vehicle, seq) in &donor.routes {
        for &node in seq {
            let missing = leftover
                .get(&node)
                .is_some_and(|q| q.abs() > QUANTITY_EPS);
            if !missing {
                continue;
            }
            match child.routes.iter_mut().find(|(v, _)| v == vehicle) {
                Some((_, route)) => route.push(node),
                None => child.routes.push((*vehicle, alloc::vec![node])),
            }
            leftover.insert(node, 0.0);
        }
    }
    child
}

fn crossover_with(
    instance: &Instance,
    pairs: &[PrecedencePair],
    clients: &BTreeMap<NodeId, Vec<NodeId>>,
    a: &Chromosome,
    b: &Chromosome,
    rng: &mut ChaCha8Rng,
) -> (Chromosome, Chromosome) {
    let raw_a = Chromosome::new(cross_one(instance, &a.solution, &b.solution, rng));
    let raw_b = Chromosome::new(cross_one(instance, &b.solution, &a.solution, rng));
    let child_a = repair_with(instance, pairs, clients, &raw_a).unwrap_or_else(|_| a.clone());
    let child_b = repair_with(instance, pairs, clients, &raw_b).unwrap_or_else(|_| b.clone());
    (child_a, child_b)
}

/// Route-exchange crossover; children are repaired, and a child whose repair
/// fails falls back to a copy of its keeper parent.
pub fn crossover(
    a: &Chromosome,
    b: &Chromosome,
    instance: &Instance,
    rng: &mut ChaCha8Rng,
) -> (Chromosome, Chromosome) {
    let pairs = instance.derive_precedence_pairs().unwrap_or_default();
    let clients = suppliers_by_client(&pairs);
    crossover_with(instance, &pairs, &clients, a, b, rng)
}

fn mutate_with(
    instance: &Instance,
    pairs: &[PrecedencePair],
    clients: &BTreeMap<NodeId, Vec<NodeId>>,
    chromosome: &Chromosome,
    rng: &mut ChaCha8Rng,
) -> Chromosome {
    let mut solution = chromosome.solution.clone();
    match rng.gen_range(0..3u8) {
        0 => {
            // Swap two visits within one route.
            let candidates: Vec<usize> = (0..solution.routes.len())
                .filter(|&r| solution.routes[r].1.len() >= 2)
                .collect();
            if candidates.is_empty() {
                return chromosome.clone();
            }
            let r = candidates[rng.gen_range(0..candidates.len())];
            let seq = &mut solution.routes[r].1;
            let i = rng.gen_range(0..seq.len());
            let j = rng.gen_range(0..seq.len() - 1);
            let j = if j >= i { j + 1 } else { j };
            seq.swap(i, j);
        }
        1 => {
            // Relocate one visit to any position of any route.
            let candidates: Vec<usize> = (0..solution.routes.len())
                .filter(|&r| !solution.routes[r].1.is_empty())
                .collect();
            if candidates.is_empty() {
                return chromosome.clone();
            }
            let r = candidates[rng.gen_range(0..candidates.len())];
            let i = rng.gen_range(0..solution.routes[r].1.len());
            let node = solution.routes[r].1.remove(i);
            let target = rng.gen_range(0..solution.routes.len());
            let at = rng.gen_range(0..=solution.routes[target].1.len());
            solution.routes[target].1.insert(at, node);
        }
        _ => {
            // Merge one route onto another, freeing a vehicle.
            let candidates: Vec<usize> = (0..solution.routes.len())
                .filter(|&r| !solution.routes[r].1.is_empty())
                .collect();
            if candidates.len() < 2 {
                return chromosome.clone();
            }
            let i = rng.gen_range(0..candidates.len());
            let mut j = rng.gen_range(0..candidates.len() - 1);
            if j >= i {
                j += 1;
            }
            let (a, b) = (candidates[i], candidates[j]);
            let moved = core::mem::take(&mut solution.routes[b].1);
            solution.routes[a].1.extend(moved);
        }
    }
    let raw = Chromosome::new(solution);
    repair_with(instance, pairs, clients, &raw).unwrap_or_else(|_| chromosome.clone())
}

/// Applies one of swap / relocate / merge (uniform choice), then [`repair`];
/// degenerate picks and failed repairs return the input unchanged.
pub fn mutate(
    chromosome: &Chromosome,
    instance: &Instance,
    _config: &GaConfig,
    rng: &mut ChaCha8Rng,
) -> Chromosome {
    let pairs = instance.derive_precedence_pairs().unwrap_or_default();
    let clients = suppliers_by_client(&pairs);
    mutate_with(instance, &pairs, &clients, chromosome, rng)
}

fn evaluate_population<E: FitnessEvaluator + ?Sized>(
    instance: &Instance,
    pairs: &[PrecedencePair],
    weights: &Weights,
    population: &mut [Chromosome],
    evaluator: &mut E,
    archive: &mut ParetoArchive,
    evaluations: &mut u64,
) {
    let need: Vec<usize> = (0..population.len())
        .filter(|&i| population[i].fitness.is_none())
        .collect();
    if need.is_empty() {
        return;
    }
    let results = {
        let batch: Vec<&Solution> = need.iter().map(|&i| &population[i].solution).collect();
        evaluator.evaluate(instance, pairs, &batch)
    };
    assert_eq!(results.len(), need.len(), "evaluator must score the whole batch");
    *evaluations += need.len() as u64;
    for (&i, (vector, feasible)) in need.iter().zip(results) {
        population[i].fitness = Some(Fitness {
            vector,
            aggregate: aggregate(weights, &vector),
            feasible,
        });
        if feasible && archive.would_accept(&vector) {
            archive.insert(population[i].solution.clone(), vector);
        }
    }
}

fn tournament(population: &[Chromosome], size: usize, rng: &mut ChaCha8Rng) -> usize {
    let mut winner = rng.gen_range(0..population.len());
    for _ in 1..size {
        let contender = rng.gen_range(0..population.len());
        let wa = population[winner].fitness.expect("evaluated").aggregate;
        let ca = population[contender].fitness.expect("evaluated").aggregate;
        if ca < wa || (ca == wa && contender < winner) {
            winner = contender;
        }
    }
    winner
}

/// Population indices sorted by (aggregate ascending, index).
fn ranked(population: &[Chromosome]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..population.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = population[a].fitness.expect("evaluated").aggregate;
        let fb = population[b].fitness.expect("evaluated").aggregate;
        fa.total_cmp(&fb).then_with(|| a.cmp(&b))
    });
    order
}

/// Runs the generational loop with a caller-supplied fitness evaluator.
///
/// Any conforming evaluator — sequential or parallel — produces the same
/// result for the same seed, because evaluation is pure and its results are
/// consumed in batch order.
pub fn evolve_with<E: FitnessEvaluator + ?Sized>(
    instance: &Instance,
    config: &GaConfig,
    evaluator: &mut E,
) -> Result<SolveResult, SolveError> {
    config.check().map_err(SolveError::Config)?;
    let pairs = instance.derive_precedence_pairs().map_err(SolveError::Links)?;
    let clients = suppliers_by_client(&pairs);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut population = init_population_with(instance, config, &pairs, &clients, &mut rng)?;
    let mut archive = ParetoArchive::new();
    let mut evaluations = 0u64;
    evaluate_population(
        instance,
        &pairs,
        &config.weights,
        &mut population,
        evaluator,
        &mut archive,
        &mut evaluations,
    );

    let mut best = population[ranked(&population)[0]].clone();
    let mut history = alloc::vec![best.fitness.expect("evaluated").aggregate];
    let mut stagnant = 0usize;

    for _ in 0..config.generations {
        let order = ranked(&population);
        let mut next: Vec<Chromosome> = order[..config.elites]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        while next.len() < config.population {
            let pa = tournament(&population, config.tournament, &mut rng);
            let pb = tournament(&population, config.tournament, &mut rng);
            let (ca, cb) = if rng.gen_bool(config.crossover_rate) {
                crossover_with(
                    instance,
                    &pairs,
                    &clients,
                    &population[pa],
                    &population[pb],
                    &mut rng,
                )
            } else {
                (population[pa].clone(), population[pb].clone())
            };
            for child in [ca, cb] {
                if next.len() == config.population {
                    break;
                }
                let child = if rng.gen_bool(config.mutation_rate) {
                    mutate_with(instance, &pairs, &clients, &child, &mut rng)
                } else {
                    child
                };
                next.push(child);
            }
        }
        population = next;
        evaluate_population(
            instance,
            &pairs,
            &config.weights,
            &mut population,
            evaluator,
            &mut archive,
            &mut evaluations,
        );
        let gen_best = &population[ranked(&population)[0]];
        let gen_aggregate = gen_best.fitness.expect("evaluated").aggregate;
        history.push(gen_aggregate);
        if gen_aggregate < best.fitness.expect("evaluated").aggregate {
            best = gen_best.clone();
            stagnant = 0;
        } else {
            stagnant += 1;
        }
        if config.stagnation > 0 && stagnant >= config.stagnation {
            break;
        }
    }

    let fitness = best.fitness.expect("evaluated");
    Ok(SolveResult {
        best: best.solution,
        vector: fitness.vector,
        aggregate: fitness.aggregate,
        archive,
        history,
        evaluations,
        config: config.clone(),
    })
}

/// Runs the generational loop with the in-process sequential evaluator.
pub fn evolve(instance: &Instance, config: &GaConfig) -> Result<SolveResult, SolveError> {
    evolve_with(instance, config, &mut SequentialEvaluator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::validate;
    use crate::model::parse_instance;
    use alloc::vec;

    const TABLE: &str = include_str!("../../../data/demo17.pdptw");

    fn pair_instance() -> Instance {
        let text = "PDPTW 1\nVEHICLES 1\nV 1 10 1 1\nNODES 3\n\
                    N 0 0 0 0 0 1000 0 - -\n\
                    N 1 3 4 10 0 100 0 2 -\n\
                    N 2 6 8 -10 0 100 0 - 1\n";
        parse_instance(text).unwrap().instance
    }

    fn small_config(population: usize, generations: usize, seed: u64) -> GaConfig {
        GaConfig {
            population,
            generations,
            seed,
            ..GaConfig::default()
        }
    }

    #[test]
    fn config_bounds_are_enforced() {
        assert!(GaConfig::default().check().is_ok());
        let mut c = GaConfig::default();
        c.population = 1;
        assert_eq!(c.check(), Err(ConfigError::PopulationTooSmall));
        let mut c = GaConfig::default();
        c.elites = c.population;
        assert_eq!(c.check(), Err(ConfigError::TooManyElites));
        let mut c = GaConfig::default();
        c.crossover_rate = 1.5;
        assert_eq!(c.check(), Err(ConfigError::RateOutOfRange("crossover")));
        let mut c = GaConfig::default();
        c.weights = Weights {
            vehicles: 0.0,
            tardiness: 0.0,
            cost: 0.0,
        };
        assert!(matches!(c.check(), Err(ConfigError::Weights(_))));
    }

    #[test]
    fn init_population_is_feasible_and_deterministic() {
        let inst = pair_instance();
        let config = small_config(8, 0, 7);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let population = init_population(&inst, &config, &mut rng).unwrap();
        assert_eq!(population.len(), 8);
        for chromosome in &population {
            let report = validate(&inst, &chromosome.solution);
            assert!(report.feasible, "{report:?}");
        }
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let again = init_population(&inst, &config, &mut rng).unwrap();
        for (a, b) in population.iter().zip(&again) {
            assert_eq!(a.solution, b.solution);
        }
    }

    #[test]
    fn init_population_on_nothing_to_serve_is_empty_routes() {
        let text = "PDPTW 1\nVEHICLES 2\nV 1 10 1 1\nV 2 10 1 1\nNODES 1\n\
                    N 0 0 0 0 0 10 0 - -\n";
        let inst = parse_instance(text).unwrap().instance;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let population = init_population(&inst, &small_config(4, 0, 1), &mut rng).unwrap();
        for chromosome in &population {
            assert!(chromosome.solution.routes.iter().all(|(_, seq)| seq.is_empty()));
        }
    }

    #[test]
    fn uncoverable_instances_are_rejected() {
        let no_cap = "PDPTW 1\nVEHICLES 1\nV 1 0 1 1\nNODES 3\n\
                      N 0 0 0 0 0 10 0 - -\n\
                      N 1 1 0 5 0 10 0 2 -\n\
                      N 2 2 0 -5 0 10 0 - 1\n";
        let inst = parse_instance(no_cap).unwrap().instance;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = init_population(&inst, &small_config(2, 0, 1), &mut rng).unwrap_err();
        assert_eq!(err, SolveError::NoUsableCapacity);

        let short = "PDPTW 1\nVEHICLES 1\nV 1 50 1 1\nNODES 3\n\
                     N 0 0 0 0 0 10 0 - -\n\
                     N 1 1 0 5 0 10 0 2 -\n\
                     N 2 2 0 -25 0 10 0 - 1\n";
        let inst = parse_instance(short).unwrap().instance;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let err = init_population(&inst, &small_config(2, 0, 1), &mut rng).unwrap_err();
        assert!(matches!(err, SolveError::DemandExceedsSupply { .. }));
    }

    #[test]
    fn repair_restores_an_inverted_pair() {
        let inst = pair_instance();
        let mut solution = Solution::empty(&inst);
        solution.routes[0].1 = vec![NodeId(2), NodeId(1)];
        let repaired = repair(&inst, &Chromosome::new(solution)).unwrap();
        assert!(validate(&inst, &repaired.solution).feasible);
    }

    #[test]
    fn repair_is_idempotent_on_feasible_input() {
        let inst = pair_instance();
        let mut solution = Solution::empty(&inst);
        solution.routes[0].1 = vec![NodeId(1), NodeId(2)];
        let chromosome = Chromosome::new(solution);
        let once = repair(&inst, &chromosome).unwrap();
        assert_eq!(once.solution, chromosome.solution);
        let twice = repair(&inst, &once).unwrap();
        assert_eq!(twice.solution, once.solution);
    }

    #[test]
    fn repair_splits_an_overloaded_pickup() {
        // 30 units through a capacity-10 vehicle: repair must create revisits
        // until everything moves.
        let text = "PDPTW 1\nVEHICLES 1\nV 1 10 1 1\nNODES 7\n\
                    N 0 0 0 0 0 1000 0 - -\n\
                    N 1 1 0 10 0 1000 0 4 -\n\
                    N 2 2 0 10 0 1000 0 5 -\n\
                    N 3 3 0 10 0 1000 0 6 -\n\
                    N 4 1 5 -10 0 1000 0 - 1\n\
                    N 5 2 5 -10 0 1000 0 - 2\n\
                    N 6 3 5 -10 0 1000 0 - 3\n";
        let inst = parse_instance(text).unwrap().instance;
        let mut solution = Solution::empty(&inst);
        solution.routes[0].1 = vec![NodeId(1), NodeId(2), NodeId(3)];
        let repaired = repair(&inst, &Chromosome::new(solution)).unwrap();
        let report = validate(&inst, &repaired.solution);
        assert!(report.feasible, "{report:?}");
        let again = repair(&inst, &repaired).unwrap();
        assert_eq!(again.solution, repaired.solution, "idempotent");
    }

    #[test]
    fn crossover_children_stay_feasible() {
        let inst = pair_instance();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let population =
            init_population(&inst, &small_config(4, 0, 3), &mut rng).unwrap();
        let (a, b) = crossover(&population[0], &population[1], &inst, &mut rng);
        for child in [&a, &b] {
            assert!(validate(&inst, &child.solution).feasible);
        }
    }

    #[test]
    fn self_crossover_preserves_transfers() {
        let inst = pair_instance();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let population =
            init_population(&inst, &small_config(2, 0, 9), &mut rng).unwrap();
        let parent = &population[0];
        let (a, b) = crossover(parent, parent, &inst, &mut rng);
        for child in [&a, &b] {
            let report = validate(&inst, &child.solution);
            assert!(report.feasible, "coverage must match the parent's");
        }
    }

    #[test]
    fn mutate_keeps_feasibility_and_degenerates_to_identity() {
        let inst = pair_instance();
        let config = small_config(2, 0, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let population = init_population(&inst, &config, &mut rng).unwrap();
        for _ in 0..20 {
            let out = mutate(&population[0], &inst, &config, &mut rng);
            assert!(validate(&inst, &out.solution).feasible);
        }

        // With no visits anywhere, every operator degenerates to identity.
        let idle = Chromosome::new(Solution::empty(&inst));
        for seed in 0..10u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let out = mutate(&idle, &inst, &config, &mut rng);
            assert_eq!(out.solution, idle.solution);
        }
    }

    #[test]
    fn evolve_finds_the_enumerated_optimum_on_the_pair() {
        let inst = pair_instance();
        for seed in [1u64, 2, 3] {
            let config = GaConfig {
                population: 8,
                generations: 20,
                seed,
                ..GaConfig::default()
            };
            let result = evolve(&inst, &config).unwrap();
            assert_eq!(result.vector.as_array(), [1.0, 0.0, 20.0]);
            assert_eq!(result.aggregate, 21.0);
        }
    }

    #[test]
    fn zero_generations_returns_the_initial_best() {
        let inst = pair_instance();
        let config = small_config(4, 0, 1);
        let result = evolve(&inst, &config).unwrap();
        assert_eq!(result.history.len(), 1);
        assert_eq!(result.aggregate, result.history[0]);
    }

    #[test]
    fn zero_rates_keep_the_initial_best() {
        let inst = pair_instance();
        let config = GaConfig {
            population: 6,
            generations: 10,
            crossover_rate: 0.0,
            mutation_rate: 0.0,
            seed: 11,
            ..GaConfig::default()
        };
        let result = evolve(&inst, &config).unwrap();
        assert_eq!(result.history.first(), result.history.last());
    }

    #[test]
    fn evolve_is_deterministic_per_seed() {
        let inst = parse_instance(TABLE).unwrap().instance;
        let config = GaConfig {
            population: 12,
            generations: 15,
            seed: 42,
            ..GaConfig::default()
        };
        let a = evolve(&inst, &config).unwrap();
        let b = evolve(&inst, &config).unwrap();
        assert_eq!(a, b);
        for window in a.history.windows(2) {
            assert!(window[1] <= window[0], "history must be non-increasing");
        }
        assert!(validate(&inst, &a.best).feasible);
    }
}
