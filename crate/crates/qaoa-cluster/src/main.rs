//! `qaoa-cluster` command-line interface.
//!
//! Subcommands: `run` (full experiment from a config or preset), `analyze`
//! (summarize an emitted traces.csv), `solve` (one Maxcut optimization),
//! `cluster` (bicluster a dataset), `compile` (emit a gate program).
//!
//! Exit codes: 0 on success, 2 for configuration/usage errors, 3 for
//! runtime failures.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use qaoa_cluster::cluster::{bicluster, ClusterSolver, Dataset};
use qaoa_cluster::compile::{compile_qaoa, emit_program, Basis};
use qaoa_cluster::graph::WeightedGraph;
use qaoa_cluster::harness::{
    analyze_traces, emit_outputs, run_experiment, ExperimentConfig, NoiseSpec,
};
use qaoa_cluster::rng::split_rng;
use qaoa_cluster::sim::QaoaAngles;
use qaoa_cluster::solver::{solve_prepared, PreparedInstance, SolveConfig};
use qaoa_cluster::stats::ObjectiveStatistic;
use qaoa_cluster::{Error, Result};

#[derive(Parser)]
#[command(
    name = "qaoa-cluster",
    version,
    about = "Maxcut clustering with simulated QAOA and Bayesian angle search"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum ObjectiveArg {
    #[default]
    Max,
    Mean,
    ExpectedMax,
}

impl From<ObjectiveArg> for ObjectiveStatistic {
    fn from(a: ObjectiveArg) -> Self {
        match a {
            ObjectiveArg::Max => ObjectiveStatistic::Max,
            ObjectiveArg::Mean => ObjectiveStatistic::Mean,
            ObjectiveArg::ExpectedMax => ObjectiveStatistic::ExpectedMax,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum SolverArg {
    #[default]
    Qaoa,
    BruteForce,
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum BasisArg {
    #[default]
    Cnot,
    Cz,
}

impl From<BasisArg> for Basis {
    fn from(b: BasisArg) -> Self {
        match b {
            BasisArg::Cnot => Basis::Cnot,
            BasisArg::Cz => Basis::Cz,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a full experiment and write its output files.
    Run {
        /// Experiment configuration JSON file.
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Built-in configuration: default-19q, randomized-instances, fc20.
        #[arg(long)]
        preset: Option<String>,
        /// Master seed (presets only; config files carry their own).
        #[arg(long, default_value_t = 11)]
        seed: u64,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize a previously emitted traces.csv.
    Analyze {
        #[arg(long)]
        traces: PathBuf,
    },
    /// Optimize Maxcut on one graph and print the result as JSON.
    Solve {
        /// Graph JSON file: {"nodes": n, "edges": [[i, j, w], ...]}.
        #[arg(long)]
        graph: PathBuf,
        /// QAOA layer count.
        #[arg(long, default_value_t = 1)]
        p: usize,
        /// Measurement shots per step.
        #[arg(long, default_value_t = 2500)]
        shots: usize,
        /// Optimization steps.
        #[arg(long, default_value_t = 55)]
        budget: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Noise model: "table-s1" (19-qubit device readout table) or
        /// "uniform:FLIP" (one readout flip probability for all qubits).
        #[arg(long)]
        noise: Option<String>,
        #[arg(long, value_enum, default_value_t)]
        objective: ObjectiveArg,
        /// Skip rescaling weights to a maximum of 1 before simulating.
        #[arg(long)]
        raw_weights: bool,
        /// Also write the result JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Split a dataset into two clusters and print the labels as JSON.
    Cluster {
        /// Dataset JSON file (kind: points or boxes).
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        solver: SolverArg,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, default_value_t = 2500)]
        shots: usize,
        #[arg(long, default_value_t = 55)]
        budget: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Write the label JSON here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compile a QAOA circuit for a graph and print the gate program.
    Compile {
        #[arg(long)]
        graph: PathBuf,
        /// Cost angles, one per layer (comma-separated).
        #[arg(long, value_delimiter = ',', required = true)]
        gamma: Vec<f64>,
        /// Driver angles, one per layer (comma-separated).
        #[arg(long, value_delimiter = ',', required = true)]
        beta: Vec<f64>,
        /// Two-qubit basis for the interaction blocks.
        #[arg(long, value_enum, default_value_t)]
        basis: BasisArg,
        /// Write the program here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Reads a user-supplied file, folding I/O and JSON problems into a usage
/// error that names the offending path.
fn load<T>(path: &Path, what: &str, parse: impl Fn(&str) -> Result<T>) -> Result<T> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("{what} {}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        Error::Json(j) => Error::invalid(format!("{what} {}: {j}", path.display())),
        other => other,
    })
}

fn parse_noise(text: &str) -> Result<NoiseSpec> {
    if text == "table-s1" {
        return Ok(NoiseSpec::TableS1);
    }
    if let Some(rest) = text.strip_prefix("uniform:") {
        let flip: f64 = rest
            .parse()
            .map_err(|_| Error::invalid(format!("invalid flip probability {rest:?}")))?;
        return Ok(NoiseSpec::UniformReadout { flip });
    }
    Err(Error::invalid(format!(
        "unknown noise model {text:?} (expected table-s1 or uniform:FLIP)"
    )))
}

fn cmd_run(
    config: Option<PathBuf>,
    preset: Option<String>,
    seed: u64,
    out: PathBuf,
) -> Result<()> {
    let config = match (config, preset) {
        (Some(path), None) => load(&path, "config", ExperimentConfig::from_json_str)?,
        (None, Some(name)) => ExperimentConfig::preset(&name, seed)?,
        (None, None) => return Err(Error::invalid("pass either --config or --preset")),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    };
    let result = run_experiment(&config)?;
    emit_outputs(&result, &out)?;
    println!("experiment: {}", config.name);
    println!("instances: {}", result.instances.len());
    for inst in &result.instances {
        let runs = inst.traces.len();
        let successes = inst.success_count();
        println!(
            "instance {}: optimum {} reached in {successes}/{runs} runs",
            inst.index, inst.optimum
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_analyze(traces: PathBuf) -> Result<()> {
    let digests = load(&traces, "traces", analyze_traces)?;
    for d in &digests {
        let median = d
            .median_time_to_optimum
            .map_or_else(|| "-".to_string(), |m| m.to_string());
        println!(
            "instance {}: {}/{} runs reached the optimum, median step {}, mean final normalized {:.6}",
            d.instance, d.successes, d.runs, median, d.mean_final_normalized
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_solve(
    graph: PathBuf,
    p: usize,
    shots: usize,
    budget: usize,
    seed: u64,
    noise: Option<String>,
    objective: ObjectiveArg,
    raw_weights: bool,
    out: Option<PathBuf>,
) -> Result<()> {
    let g = load(&graph, "graph", WeightedGraph::from_json_str)?;
    let noise_model = noise
        .as_deref()
        .map(|t| parse_noise(t)?.build(g.node_count()))
        .transpose()?;
    let config = SolveConfig {
        layers: p,
        shots,
        budget,
        objective: objective.into(),
        noise: noise_model,
        precondition: !raw_weights,
        ..SolveConfig::default()
    };
    let inst = PreparedInstance::new(&g, config.precondition)?;
    let mut rng = split_rng(seed, 0);
    let trace = solve_prepared(&inst, &config, &mut rng)?;
    let assignment = trace.best_assignment.as_ref();
    let report = serde_json::json!({
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "optimum": trace.optimum,
        "best_cost": trace.best_cost,
        "normalized_best": trace.best_cost / trace.optimum,
        "assignment": assignment.map(|b| b.to_string()),
        "labels": assignment.map(|b| b.bits()),
        "steps": trace.records.len(),
        "time_to_optimum": trace.time_to_optimum,
        "reached_optimum": trace.time_to_optimum.is_some(),
        "failure": trace.failure,
    });
    let text = serde_json::to_string_pretty(&report)?;
    if let Some(path) = &out {
        std::fs::write(path, &text)?;
    }
    println!("{text}");
    Ok(())
}

fn cmd_cluster(
    data: PathBuf,
    solver: SolverArg,
    p: usize,
    shots: usize,
    budget: usize,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<()> {
    let dataset = load(&data, "dataset", Dataset::from_json_str)?;
    let solver = match solver {
        SolverArg::BruteForce => ClusterSolver::BruteForce,
        SolverArg::Qaoa => ClusterSolver::Qaoa(SolveConfig {
            layers: p,
            shots,
            budget,
            ..SolveConfig::default()
        }),
    };
    let mut rng = split_rng(seed, 0);
    let outcome = bicluster(&dataset, &solver, &mut rng)?;
    let text = outcome.labels.to_json_string()?;
    if let Some(path) = &out {
        std::fs::write(path, &text)?;
        println!("cut value: {}", outcome.cut_value);
        println!("wrote {}", path.display());
    } else {
        println!("{text}");
    }
    Ok(())
}

fn cmd_compile(
    graph: PathBuf,
    gamma: Vec<f64>,
    beta: Vec<f64>,
    basis: BasisArg,
    out: Option<PathBuf>,
) -> Result<()> {
    let g = load(&graph, "graph", WeightedGraph::from_json_str)?;
    let angles = QaoaAngles::new(gamma, beta)?;
    let program = compile_qaoa(&g, &angles, basis.into())?;
    let text = emit_program(&program);
    if let Some(path) = &out {
        std::fs::write(path, &text)?;
        println!(
            "wrote {} ({} instructions, two-qubit depth {})",
            path.display(),
            program.instructions().len(),
            program.two_qubit_depth()
        );
    } else {
        print!("{text}");
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, preset, seed, out } => cmd_run(config, preset, seed, out),
        Command::Analyze { traces } => cmd_analyze(traces),
        Command::Solve {
            graph,
            p,
            shots,
            budget,
            seed,
            noise,
            objective,
            raw_weights,
            out,
        } => cmd_solve(graph, p, shots, budget, seed, noise, objective, raw_weights, out),
        Command::Cluster { data, solver, p, shots, budget, seed, out } => {
            cmd_cluster(data, solver, p, shots, budget, seed, out)
        }
        Command::Compile { graph, gamma, beta, basis, out } => {
            cmd_compile(graph, gamma, beta, basis, out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() {
                ExitCode::from(2)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
