//! Text and structured renderings of the command reports.
//!
//! Structured output is JSON with sorted keys and shortest-round-trip
//! floats, so the same result always serializes to the same bytes.

use pdptw_core::evaluation::{format_routes, ObjectiveVector, Solution, ValidationReport};
use pdptw_core::ga::SolveResult;
use pdptw_core::model::ReciprocityWarning;
use pdptw_core::moo::{aggregate, Weights};
use pdptw_core::oracle::OracleOutcome;
use serde_json::{json, Value};

/// Output style selected with `--format`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Line-oriented human-readable report.
    Text,
    /// Deterministic JSON.
    Structured,
}

fn vector_array(vector: &ObjectiveVector) -> Value {
    let [f1, f2, f3] = vector.as_array();
    json!([f1, f2, f3])
}

fn routes_value(solution: &Solution) -> Value {
    Value::Array(
        solution
            .routes
            .iter()
            .map(|(vehicle, visits)| {
                json!({
                    "vehicle": vehicle.0,
                    "visits": visits.iter().map(|n| n.0).collect::<Vec<u32>>(),
                })
            })
            .collect(),
    )
}

/// Route lines for a plan, or `-` when every vehicle stays idle.
fn routes_text(solution: &Solution) -> String {
    let lines = format_routes(solution);
    if lines.is_empty() {
        "-\n".into()
    } else {
        lines
    }
}

pub fn validate_text(
    nodes: usize,
    vehicles: usize,
    pairs: usize,
    warnings: &[ReciprocityWarning],
) -> String {
    let mut out = format!("nodes: {nodes}\nvehicles: {vehicles}\npairs: {pairs}\n");
    for warning in warnings {
        out.push_str(&format!("warning: {warning}\n"));
    }
    out.push_str("valid\n");
    out
}

pub fn validate_json(
    nodes: usize,
    vehicles: usize,
    pairs: usize,
    warnings: &[ReciprocityWarning],
) -> Value {
    json!({
        "nodes": nodes,
        "vehicles": vehicles,
        "pairs": pairs,
        "valid": true,
        "warnings": warnings.iter().map(|w| w.to_string()).collect::<Vec<String>>(),
    })
}

pub fn evaluate_text(
    report: &ValidationReport,
    vector: &ObjectiveVector,
    distance: f64,
    weighted: f64,
) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "feasible: {}\n",
        if report.feasible { "yes" } else { "no" }
    ));
    out.push_str(&format!("vehicles_used: {:.6}\n", vector.vehicles_used));
    out.push_str(&format!("total_tardiness: {:.6}\n", vector.total_tardiness));
    out.push_str(&format!("transport_cost: {:.6}\n", vector.transport_cost));
    out.push_str(&format!("distance: {distance:.6}\n"));
    out.push_str(&format!("aggregate: {weighted:.6}\n"));
    for (name, family) in report.families() {
        let verdict = if family.passed { "pass" } else { "fail" };
        if family.notes.is_empty() {
            out.push_str(&format!("{name}: {verdict}\n"));
        } else {
            out.push_str(&format!("{name}: {verdict} — {}\n", family.notes.join("; ")));
        }
    }
    out
}

pub fn evaluate_json(
    report: &ValidationReport,
    vector: &ObjectiveVector,
    distance: f64,
    weighted: f64,
) -> Value {
    let mut families = serde_json::Map::new();
    for (name, family) in report.families() {
        families.insert(
            name.into(),
            json!({ "passed": family.passed, "notes": family.notes }),
        );
    }
    json!({
        "aggregate": weighted,
        "distance": distance,
        "f1": vector.vehicles_used,
        "f2": vector.total_tardiness,
        "f3": vector.transport_cost,
        "families": families,
        "feasible": report.feasible,
    })
}

/// Archive entries ordered like the text export: aggregate, then insertion.
fn front_order(result: &SolveResult) -> Vec<usize> {
    let weights = &result.config.weights;
    let mut order: Vec<usize> = (0..result.archive.entries().len()).collect();
    order.sort_by(|&a, &b| {
        let fa = aggregate(weights, &result.archive.entries()[a].vector);
        let fb = aggregate(weights, &result.archive.entries()[b].vector);
        fa.total_cmp(&fb).then_with(|| a.cmp(&b))
    });
    order
}

pub fn solve_text(result: &SolveResult) -> String {
    let mut out = String::new();
    out.push_str(&format!("seed: {}\n", result.config.seed));
    out.push_str(&format!("evaluations: {}\n", result.evaluations));
    out.push_str(&format!("aggregate: {:.6}\n", result.aggregate));
    let [f1, f2, f3] = result.vector.as_array();
    out.push_str(&format!("vector: {f1:.6} {f2:.6} {f3:.6}\n"));
    out.push_str(&routes_text(&result.best));
    out.push_str("front:\n");
    out.push_str(&result.archive.export(&result.config.weights));
    out
}

pub fn solve_json(result: &SolveResult) -> Value {
    let config = &result.config;
    let front: Vec<Value> = front_order(result)
        .into_iter()
        .map(|i| {
            let entry = &result.archive.entries()[i];
            json!({
                "routes": routes_value(&entry.solution),
                "vector": vector_array(&entry.vector),
            })
        })
        .collect();
    json!({
        "aggregate": result.aggregate,
        "best": routes_value(&result.best),
        "config": {
            "crossover_rate": config.crossover_rate,
            "elites": config.elites,
            "generations": config.generations,
            "mutation_rate": config.mutation_rate,
            "population": config.population,
            "seed": config.seed,
            "stagnation": config.stagnation,
            "tournament": config.tournament,
            "weights": [config.weights.vehicles, config.weights.tardiness, config.weights.cost],
        },
        "evaluations": result.evaluations,
        "front": front,
        "history": result.history,
        "seed": config.seed,
        "vector": vector_array(&result.vector),
    })
}

pub fn oracle_text(outcome: &OracleOutcome) -> String {
    let mut out = String::new();
    out.push_str("method: exhaustive\n");
    out.push_str(&format!("explored: {}\n", outcome.explored));
    match &outcome.best {
        Some(best) => {
            out.push_str(&format!("aggregate: {:.6}\n", best.aggregate));
            let [f1, f2, f3] = best.vector.as_array();
            out.push_str(&format!("vector: {f1:.6} {f2:.6} {f3:.6}\n"));
            out.push_str(&routes_text(&best.solution));
        }
        None => out.push_str("no feasible plan\n"),
    }
    out.push_str("front:\n");
    for vector in &outcome.front {
        let [f1, f2, f3] = vector.as_array();
        out.push_str(&format!("{f1:.6} {f2:.6} {f3:.6}\n"));
    }
    out
}

pub fn oracle_json(outcome: &OracleOutcome) -> Value {
    let (best, vector, weighted) = match &outcome.best {
        Some(best) => (
            routes_value(&best.solution),
            vector_array(&best.vector),
            json!(best.aggregate),
        ),
        None => (Value::Null, Value::Null, Value::Null),
    };
    json!({
        "aggregate": weighted,
        "best": best,
        "explored": outcome.explored,
        "front": outcome.front.iter().map(vector_array).collect::<Vec<Value>>(),
        "method": "exhaustive",
        "vector": vector,
    })
}

/// Final serialization of a structured report.
pub fn to_pretty(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    text
}

/// Applies one shared `Weights` scalarization.
pub fn weighted_aggregate(weights: &Weights, vector: &ObjectiveVector) -> f64 {
    aggregate(weights, vector)
}
