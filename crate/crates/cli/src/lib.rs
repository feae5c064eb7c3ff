//! Command-line front end: validate, evaluate, solve, and enumerate
//! pickup-and-delivery plans over the text instance format.

pub mod output;
pub mod threads;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use output::Format;
use pdptw_core::evaluation::{
    objective_vector, outstanding_quantities, parse_routes, simulate_route, validate,
};
use pdptw_core::ga::{evolve, evolve_with, GaConfig, SolveError};
use pdptw_core::model::{parse_instance, Instance};
use pdptw_core::moo::{aggregate, Weights};
use pdptw_core::oracle::{exhaustive_best, OracleError, OracleLimits};
pub use threads::{parallelism_from_env, Parallelism, ThreadedEvaluator};

#[derive(Parser)]
#[command(
    name = "pdptw",
    version,
    about = "Multi-vehicle pickup-and-delivery planner with time windows"
)]
struct Cli {
    /// Report style.
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    /// Write the report to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse an instance file and report its shape.
    Validate {
        /// Instance file.
        instance: PathBuf,
    },
    /// Score a route plan against an instance.
    Evaluate {
        /// Instance file.
        instance: PathBuf,
        /// Route plan file.
        routes: PathBuf,
        /// Objective weights as `vehicles,tardiness,cost`.
        #[arg(long, value_parser = parse_weights, default_value = "1,1,1")]
        weights: Weights,
    },
    /// Search for a good plan with the genetic algorithm.
    Solve {
        /// Instance file.
        instance: PathBuf,
        /// Random seed.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Population size.
        #[arg(long = "pop", default_value_t = 64)]
        population: usize,
        /// Generation count.
        #[arg(long = "gens", default_value_t = 500)]
        generations: usize,
        /// Crossover rate.
        #[arg(long = "cx", default_value_t = 0.9)]
        crossover: f64,
        /// Mutation rate.
        #[arg(long = "mut", default_value_t = 0.2)]
        mutation: f64,
        /// Stop after this many generations without improvement (0 = never).
        #[arg(long, default_value_t = 0)]
        stagnation: usize,
        /// Objective weights as `vehicles,tardiness,cost`.
        #[arg(long, value_parser = parse_weights, default_value = "1,1,1")]
        weights: Weights,
    },
    /// Exhaustively enumerate plans on a small instance.
    Oracle {
        /// Instance file.
        instance: PathBuf,
        /// Objective weights as `vehicles,tardiness,cost`.
        #[arg(long, value_parser = parse_weights, default_value = "1,1,1")]
        weights: Weights,
        /// Serving-visit budget across all routes.
        #[arg(long = "max-visits", default_value_t = 8)]
        max_visits: usize,
        /// Fleet size limit.
        #[arg(long = "max-vehicles", default_value_t = 2)]
        max_vehicles: usize,
        /// Search-tree node budget.
        #[arg(long, default_value_t = 2_000_000)]
        budget: u64,
    },
}

/// Parses `a,b,c` into objective weights.
fn parse_weights(text: &str) -> Result<Weights, String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err("expected three comma-separated weights".into());
    }
    let mut values = [0.0f64; 3];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse::<f64>()
            .map_err(|e| format!("bad weight {:?}: {e}", part.trim()))?;
    }
    let weights = Weights {
        vehicles: values[0],
        tardiness: values[1],
        cost: values[2],
    };
    weights.check().map_err(|e| e.to_string())?;
    Ok(weights)
}

/// A failed command: message for stderr plus the process exit code.
struct Failure {
    message: String,
    code: i32,
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        message: message.into(),
        code,
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| fail(2, format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<(Instance, Vec<String>), Failure> {
    let text = read_file(path)?;
    let parsed = parse_instance(&text).map_err(|e| fail(2, e.to_string()))?;
    let warnings = parsed.warnings.iter().map(|w| w.to_string()).collect();
    Ok((parsed.instance, warnings))
}

fn run_validate(path: &Path, format: Format) -> Result<(String, i32), Failure> {
    let text = read_file(path)?;
    let parsed = parse_instance(&text).map_err(|e| fail(2, e.to_string()))?;
    let pairs = parsed
        .instance
        .derive_precedence_pairs()
        .map_err(|e| fail(2, e.to_string()))?;
    let nodes = parsed.instance.nodes().len();
    let vehicles = parsed.instance.vehicles().len();
    let report = match format {
        Format::Text => output::validate_text(nodes, vehicles, pairs.len(), &parsed.warnings),
        Format::Structured => output::to_pretty(&output::validate_json(
            nodes,
            vehicles,
            pairs.len(),
            &parsed.warnings,
        )),
    };
    Ok((report, 0))
}

fn run_evaluate(
    instance_path: &Path,
    routes_path: &Path,
    weights: &Weights,
    format: Format,
) -> Result<(String, i32), Failure> {
    let (instance, _) = load_instance(instance_path)?;
    let routes_text = read_file(routes_path)?;
    let solution = parse_routes(&instance, &routes_text).map_err(|e| fail(2, e.to_string()))?;
    let report = validate(&instance, &solution);
    let vector = objective_vector(&instance, &solution);
    let weighted = aggregate(weights, &vector);
    let mut remaining = outstanding_quantities(&instance);
    let mut distance = 0.0;
    for (vehicle, visits) in &solution.routes {
        let spec = instance
            .vehicles()
            .iter()
            .find(|v| v.id == *vehicle)
            .expect("parsed routes reference fleet vehicles");
        distance += simulate_route(&instance, spec, visits, &mut remaining).distance;
    }
    let rendered = match format {
        Format::Text => output::evaluate_text(&report, &vector, distance, weighted),
        Format::Structured => {
            output::to_pretty(&output::evaluate_json(&report, &vector, distance, weighted))
        }
    };
    Ok((rendered, if report.feasible { 0 } else { 1 }))
}

fn solve_failure(error: SolveError) -> Failure {
    let code = match &error {
        SolveError::Config(_) | SolveError::Links(_) => 2,
        _ => 3,
    };
    fail(code, error.to_string())
}

#[allow(clippy::too_many_arguments)]
fn run_solve(
    path: &Path,
    seed: u64,
    population: usize,
    generations: usize,
    crossover: f64,
    mutation: f64,
    stagnation: usize,
    weights: Weights,
    format: Format,
) -> Result<(String, i32), Failure> {
    let (instance, _) = load_instance(path)?;
    let config = GaConfig {
        population,
        generations,
        crossover_rate: crossover,
        mutation_rate: mutation,
        stagnation,
        seed,
        weights,
        ..GaConfig::default()
    };
    let result = match parallelism_from_env() {
        Parallelism::Sequential => evolve(&instance, &config),
        Parallelism::Threads(threads) => {
            evolve_with(&instance, &config, &mut ThreadedEvaluator { threads })
        }
    }
    .map_err(solve_failure)?;
    let rendered = match format {
        Format::Text => output::solve_text(&result),
        Format::Structured => output::to_pretty(&output::solve_json(&result)),
    };
    Ok((rendered, 0))
}

fn oracle_failure(error: OracleError) -> Failure {
    let code = match &error {
        OracleError::Weights(_) | OracleError::Links(_) => 2,
        _ => 3,
    };
    fail(code, error.to_string())
}

fn run_oracle(
    path: &Path,
    weights: &Weights,
    max_visits: usize,
    max_vehicles: usize,
    budget: u64,
    format: Format,
) -> Result<(String, i32), Failure> {
    let (instance, _) = load_instance(path)?;
    let limits = OracleLimits {
        max_serving_visits: max_visits,
        max_vehicles,
        node_budget: budget,
    };
    let outcome = exhaustive_best(&instance, weights, &limits).map_err(oracle_failure)?;
    let code = if outcome.best.is_some() { 0 } else { 1 };
    let rendered = match format {
        Format::Text => output::oracle_text(&outcome),
        Format::Structured => output::to_pretty(&output::oracle_json(&outcome)),
    };
    Ok((rendered, code))
}

fn dispatch(command: Command, format: Format) -> Result<(String, i32), Failure> {
    match command {
        Command::Validate { instance } => run_validate(&instance, format),
        Command::Evaluate {
            instance,
            routes,
            weights,
        } => run_evaluate(&instance, &routes, &weights, format),
        Command::Solve {
            instance,
            seed,
            population,
            generations,
            crossover,
            mutation,
            stagnation,
            weights,
        } => run_solve(
            &instance,
            seed,
            population,
            generations,
            crossover,
            mutation,
            stagnation,
            weights,
            format,
        ),
        Command::Oracle {
            instance,
            weights,
            max_visits,
            max_vehicles,
            budget,
        } => run_oracle(&instance, &weights, max_visits, max_vehicles, budget, format),
    }
}

/// Runs the command line and returns the process exit code.
///
/// Reports go to `out` (or the `--out` file); errors go to `err`.
/// Exit codes: 0 success, 1 infeasible result, 2 usage or input error,
/// 3 instance outside the command's reach.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(error) => {
            return match error.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{error}");
                    0
                }
                _ => {
                    let _ = write!(err, "{error}");
                    2
                }
            };
        }
    };
    match dispatch(cli.command, cli.format) {
        Ok((report, code)) => {
            match cli.out {
                Some(path) => {
                    if let Err(error) = fs::write(&path, &report) {
                        let _ = writeln!(err, "error: {}: {error}", path.display());
                        return 2;
                    }
                }
                None => {
                    let _ = write!(out, "{report}");
                }
            }
            code
        }
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}
