//! Experiment orchestration: repeated seeded runs, time-to-optimum eCDFs,
//! the random-sampling null model, KS comparisons, and file emission.
//!
//! Determinism contract: every run's generator is derived from the master
//! seed and the run's global index ([`crate::rng::run_rng`]), instances
//! randomize weights/datasets from the master seed plus the instance
//! index, and results are assembled in index order — so outputs are
//! byte-identical for any worker count, including fully sequential builds.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cluster::{cloud_ground_truth, distance_graph, two_gaussian_clouds, LabelAssignment};
use crate::error::{Error, Result};
use crate::graph::{random_weights, topology_19q, WeightedGraph};
use crate::par;
use crate::rng::{run_rng, split_rng, DATASET_STREAM};
use crate::sim::NoiseModel;
use crate::solver::{solve_prepared, PreparedInstance, RunTrace, SolveConfig, OPTIMUM_TOLERANCE};
use crate::stats::{ks_significance, random_sampling_cdf, ObjectiveStatistic};

/// Where the problem graph of each instance comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSource {
    /// The 19-qubit device topology. Weights are drawn uniformly from
    /// (0, 1] per instance unless `unit_weights` is set.
    Topology19q {
        #[serde(default)]
        unit_weights: bool,
    },
    /// Two 10-point Gaussian clouds (separation 10, deviation 1) under the
    /// complete Euclidean distance graph; ground-truth labels are known.
    Fc20,
    /// A graph JSON file (`{"nodes": n, "edges": [[i, j, w], ...]}`).
    File { path: String },
}

/// Readout/depolarizing noise selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum NoiseSpec {
    /// Per-qubit readout flip probabilities from the device fidelity table.
    TableS1,
    /// One readout flip probability for every qubit.
    UniformReadout { flip: f64 },
    /// Explicit per-qubit flips plus optional two-qubit depolarizing rate.
    Custom {
        readout_flip: Vec<f64>,
        #[serde(default)]
        depolarizing_2q: f64,
    },
}

impl NoiseSpec {
    pub fn build(&self, n_qubits: usize) -> Result<NoiseModel> {
        match self {
            NoiseSpec::TableS1 => {
                let m = NoiseModel::table_s1();
                if n_qubits != 19 {
                    return Err(Error::invalid(format!(
                        "table-s1 noise describes 19 qubits, instance has {n_qubits}"
                    )));
                }
                Ok(m)
            }
            NoiseSpec::UniformReadout { flip } => NoiseModel::readout_uniform(n_qubits, *flip),
            NoiseSpec::Custom { readout_flip, depolarizing_2q } => {
                if readout_flip.len() != n_qubits {
                    return Err(Error::LengthMismatch {
                        expected: n_qubits,
                        got: readout_flip.len(),
                    });
                }
                NoiseModel::new(readout_flip.clone(), *depolarizing_2q)
            }
        }
    }
}

fn default_layers() -> usize {
    1
}

fn default_instances() -> usize {
    1
}

fn default_true() -> bool {
    true
}

/// A full experiment description, loadable from JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub master_seed: u64,
    /// Independent optimization runs per instance.
    pub runs: usize,
    /// Optimization steps per run.
    pub budget: usize,
    /// Measurement shots per step.
    pub shots: usize,
    #[serde(default = "default_layers")]
    pub layers: usize,
    #[serde(default)]
    pub objective: ObjectiveStatistic,
    pub graph: GraphSource,
    /// Number of (re-randomized) problem instances.
    #[serde(default = "default_instances")]
    pub instances: usize,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    /// Rescale weights so the maximum is 1 before simulating.
    #[serde(default = "default_true")]
    pub precondition: bool,
}

impl ExperimentConfig {
    /// Validates every field, reporting all problems at once with their
    /// field paths.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if self.name.trim().is_empty() {
            problems.push("name: must be non-empty".to_string());
        }
        if self.budget == 0 {
            problems.push("budget: must be at least 1".to_string());
        }
        if self.shots == 0 {
            problems.push("shots: must be at least 1".to_string());
        }
        if self.layers == 0 {
            problems.push("layers: must be at least 1".to_string());
        }
        if self.instances == 0 {
            problems.push("instances: must be at least 1".to_string());
        }
        if let GraphSource::File { path } = &self.graph {
            if path.trim().is_empty() {
                problems.push("graph.path: must be non-empty".to_string());
            }
        }
        if let Some(NoiseSpec::UniformReadout { flip }) = &self.noise {
            if !(0.0..=0.5).contains(flip) {
                problems.push(format!("noise.flip: {flip} outside [0, 0.5]"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    /// The named built-in study configurations.
    pub fn preset(name: &str, master_seed: u64) -> Result<ExperimentConfig> {
        let base = ExperimentConfig {
            name: name.to_string(),
            master_seed,
            runs: 20,
            budget: 55,
            shots: 2500,
            layers: 1,
            objective: ObjectiveStatistic::Max,
            graph: GraphSource::Topology19q { unit_weights: false },
            instances: 1,
            noise: None,
            precondition: true,
        };
        match name {
            // The single-instance device study: 19 qubits, random weights,
            // 20 runs of 55 steps at 2500 shots.
            "default-19q" => Ok(base),
            // Five re-randomized instances of the device graph.
            "randomized-instances" => Ok(ExperimentConfig { runs: 10, instances: 5, ..base }),
            // The fully connected 20-node clustering study: 250 shots.
            "fc20" => Ok(ExperimentConfig {
                runs: 10,
                shots: 250,
                graph: GraphSource::Fc20,
                ..base
            }),
            other => Err(Error::invalid(format!(
                "unknown preset {other:?} (expected default-19q, randomized-instances, or fc20)"
            ))),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let c: ExperimentConfig = serde_json::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            layers: self.layers,
            shots: self.shots,
            budget: self.budget,
            objective: self.objective,
            noise: None, // built per instance (needs the qubit count)
            precondition: self.precondition,
            ..SolveConfig::default()
        }
    }
}

/// Builds the graph (and ground-truth labels, when defined) for one
/// instance.
fn build_instance(source: &GraphSource, seed: u64) -> Result<(WeightedGraph, Option<LabelAssignment>)> {
    match source {
        GraphSource::Topology19q { unit_weights } => {
            let base = topology_19q();
            let g = if *unit_weights { base } else { random_weights(&base, seed) };
            Ok((g, None))
        }
        GraphSource::Fc20 => {
            let mut rng = split_rng(seed, DATASET_STREAM);
            let points = two_gaussian_clouds(10, 10.0, 1.0, &mut rng)?;
            Ok((distance_graph(&points)?, Some(cloud_ground_truth(10))))
        }
        GraphSource::File { path } => Ok((WeightedGraph::read_json(Path::new(path))?, None)),
    }
}

/// Results for one problem instance.
#[derive(Clone, Debug)]
pub struct InstanceOutcome {
    pub index: usize,
    pub graph: WeightedGraph,
    pub optimum: f64,
    pub optimal_count: usize,
    /// Probability that one uniform bitstring is optimal.
    pub optimal_probability: f64,
    pub traces: Vec<RunTrace>,
    /// Ground-truth labels when the source defines them (fc20).
    pub label_truth: Option<LabelAssignment>,
}

impl InstanceOutcome {
    pub fn times_to_optimum(&self) -> Vec<Option<usize>> {
        self.traces.iter().map(|t| t.time_to_optimum).collect()
    }

    pub fn success_count(&self) -> usize {
        self.traces.iter().filter(|t| t.time_to_optimum.is_some()).count()
    }

    /// Per-run: did the best sampled assignment match the ground truth up
    /// to a global flip? `None` when no truth is defined.
    pub fn label_matches(&self) -> Option<Vec<bool>> {
        let truth = self.label_truth.as_ref()?;
        Some(
            self.traces
                .iter()
                .map(|t| {
                    t.best_assignment
                        .as_ref()
                        .is_some_and(|b| LabelAssignment::from_bitstring(b).matches_up_to_flip(truth))
                })
                .collect(),
        )
    }
}

/// A completed experiment.
#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub instances: Vec<InstanceOutcome>,
}

/// Runs the whole experiment: `instances × runs` independent optimizations,
/// parallel across runs, reassembled in run order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let mut instances = Vec::with_capacity(config.instances);
    for idx in 0..config.instances {
        let (graph, label_truth) =
            build_instance(&config.graph, config.master_seed.wrapping_add(idx as u64))?;
        let mut solve = config.solve_config();
        solve.noise = config
            .noise
            .as_ref()
            .map(|spec| spec.build(graph.node_count()))
            .transpose()?;
        let prepared = PreparedInstance::new(&graph, config.precondition)?;

        let run_indices: Vec<usize> = (0..config.runs).collect();
        let traces: Vec<Result<RunTrace>> = par::map_items(run_indices, |r| {
            let global = (idx * config.runs + r) as u64;
            let mut rng = run_rng(config.master_seed, global);
            solve_prepared(&prepared, &solve, &mut rng)
        });
        let traces: Vec<RunTrace> = traces.into_iter().collect::<Result<_>>()?;

        instances.push(InstanceOutcome {
            index: idx,
            optimum: prepared.optimum(),
            optimal_count: prepared.optimal_count(),
            optimal_probability: prepared.optimal_probability(),
            graph,
            traces,
            label_truth,
        });
    }
    Ok(ExperimentResult { config: config.clone(), instances })
}

/// A right-continuous empirical CDF over integer step counts. Censored
/// runs (those that never reached the optimum) stay in the denominator, so
/// the curve plateaus below 1.
#[derive(Clone, Debug, PartialEq)]
pub struct EcdfCurve {
    /// Sorted success times.
    times: Vec<usize>,
    /// Total sample count including censored runs.
    total: usize,
}

impl EcdfCurve {
    pub fn evaluate(&self, k: usize) -> f64 {
        let hits = self.times.partition_point(|&t| t <= k);
        hits as f64 / self.total as f64
    }

    pub fn success_count(&self) -> usize {
        self.times.len()
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// The curve's final height.
    pub fn plateau(&self) -> f64 {
        self.times.len() as f64 / self.total as f64
    }
}

/// Builds the eCDF of time-to-optimum samples; `None` entries are censored
/// runs.
pub fn empirical_cdf(samples: &[Option<usize>]) -> Result<EcdfCurve> {
    if samples.is_empty() {
        return Err(Error::invalid("empirical CDF needs at least one sample"));
    }
    let mut times: Vec<usize> = samples.iter().copied().flatten().collect();
    times.sort_unstable();
    Ok(EcdfCurve { times, total: samples.len() })
}

/// The exact sup-distance between two CDFs over the integer domain
/// `0..=k_max` (which contains every jump point of integer-valued step
/// counts).
pub fn ks_statistic(f1: impl Fn(usize) -> f64, f2: impl Fn(usize) -> f64, k_max: usize) -> f64 {
    (0..=k_max)
        .map(|k| (f1(k) - f2(k)).abs())
        .fold(0.0, f64::max)
}

/// One empirical-vs-null comparison.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KsComparison {
    pub instance: usize,
    /// Sup distance between the run eCDF and the random-sampling CDF.
    pub ks: f64,
    /// Empirical sample size (runs).
    pub n: usize,
    /// Null sample size (budget steps).
    pub m: usize,
    pub alpha: f64,
    /// Per-bitstring optimum probability feeding the null model.
    pub p_success: f64,
    pub successes: usize,
    pub runs: usize,
}

/// Compares each instance's eCDF against its analytic random-sampling null.
pub fn ks_report(result: &ExperimentResult) -> Result<Vec<KsComparison>> {
    let mut out = Vec::with_capacity(result.instances.len());
    for inst in &result.instances {
        if inst.traces.is_empty() {
            continue;
        }
        let ecdf = empirical_cdf(&inst.times_to_optimum())?;
        let p = inst.optimal_probability;
        let shots = result.config.shots;
        let budget = result.config.budget;
        let null = |k: usize| random_sampling_cdf(p, shots, k).expect("validated probability");
        let ks = ks_statistic(|k| ecdf.evaluate(k), null, budget);
        let alpha = ks_significance(ks, inst.traces.len(), budget)?;
        out.push(KsComparison {
            instance: inst.index,
            ks,
            n: inst.traces.len(),
            m: budget,
            alpha,
            p_success: p,
            successes: ecdf.success_count(),
            runs: inst.traces.len(),
        });
    }
    Ok(out)
}

fn join_angles(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

/// `traces.csv`: one row per optimization step of every run.
pub fn traces_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("instance,run,step,gamma,beta,best,mean,historic_best,normalized\n");
    for inst in &result.instances {
        for (run, trace) in inst.traces.iter().enumerate() {
            for r in &trace.records {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    inst.index,
                    run,
                    r.step,
                    join_angles(&r.gammas),
                    join_angles(&r.betas),
                    r.best_cost,
                    r.mean_cost,
                    r.historic_best,
                    r.normalized_historic_best,
                ));
            }
        }
    }
    out
}

/// `ecdf.csv`: the empirical time-to-optimum CDF per instance, evaluated
/// at every step `0..=budget`.
pub fn ecdf_csv(result: &ExperimentResult) -> Result<String> {
    let mut out = String::from("instance,step,empirical\n");
    for inst in &result.instances {
        if inst.traces.is_empty() {
            continue;
        }
        let ecdf = empirical_cdf(&inst.times_to_optimum())?;
        for k in 0..=result.config.budget {
            out.push_str(&format!("{},{},{}\n", inst.index, k, ecdf.evaluate(k)));
        }
    }
    Ok(out)
}

/// `null_cdf.csv`: the analytic random-sampling CDF per instance.
pub fn null_cdf_csv(result: &ExperimentResult) -> Result<String> {
    let mut out = String::from("instance,step,null\n");
    for inst in &result.instances {
        for k in 0..=result.config.budget {
            let v = random_sampling_cdf(inst.optimal_probability, result.config.shots, k)?;
            out.push_str(&format!("{},{},{}\n", inst.index, k, v));
        }
    }
    Ok(out)
}

/// `per_step_costs.csv`: sampled cut values with multiplicities (violin
/// plot source).
pub fn per_step_costs_csv(result: &ExperimentResult) -> String {
    let mut out = String::from("instance,run,step,cost,count\n");
    for inst in &result.instances {
        for (run, trace) in inst.traces.iter().enumerate() {
            for (step_idx, counts) in trace.step_cost_counts.iter().enumerate() {
                for (cost, count) in counts {
                    out.push_str(&format!(
                        "{},{},{},{},{}\n",
                        inst.index,
                        run,
                        step_idx + 1,
                        cost,
                        count
                    ));
                }
            }
        }
    }
    out
}

#[derive(Serialize)]
struct InstanceSummary {
    instance: usize,
    nodes: usize,
    edges: usize,
    optimum: f64,
    optimal_count: usize,
    p_success: f64,
    runs: usize,
    successes: usize,
    success_fraction: f64,
    median_time_to_optimum: Option<f64>,
    mean_final_normalized: f64,
    label_recovery: Option<f64>,
    failures: usize,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a ExperimentConfig,
    total_runs: usize,
    instances: Vec<InstanceSummary>,
}

fn median(sorted: &[usize]) -> Option<f64> {
    match sorted.len() {
        0 => None,
        n if n % 2 == 1 => Some(sorted[n / 2] as f64),
        n => Some((sorted[n / 2 - 1] + sorted[n / 2]) as f64 / 2.0),
    }
}

/// `summary.json` content.
pub fn summary_json(result: &ExperimentResult) -> Result<String> {
    let mut instances = Vec::with_capacity(result.instances.len());
    for inst in &result.instances {
        let mut times: Vec<usize> =
            inst.traces.iter().filter_map(|t| t.time_to_optimum).collect();
        times.sort_unstable();
        let runs = inst.traces.len();
        let successes = times.len();
        let finals: Vec<f64> = inst
            .traces
            .iter()
            .filter_map(|t| t.records.last().map(|r| r.normalized_historic_best))
            .collect();
        let mean_final = if finals.is_empty() {
            0.0
        } else {
            finals.iter().sum::<f64>() / finals.len() as f64
        };
        let label_recovery = inst
            .label_matches()
            .map(|m| m.iter().filter(|&&b| b).count() as f64 / m.len().max(1) as f64);
        instances.push(InstanceSummary {
            instance: inst.index,
            nodes: inst.graph.node_count(),
            edges: inst.graph.edge_count(),
            optimum: inst.optimum,
            optimal_count: inst.optimal_count,
            p_success: inst.optimal_probability,
            runs,
            successes,
            success_fraction: if runs == 0 { 0.0 } else { successes as f64 / runs as f64 },
            median_time_to_optimum: median(&times),
            mean_final_normalized: mean_final,
            label_recovery,
            failures: inst.traces.iter().filter(|t| t.failure.is_some()).count(),
        });
    }
    let total_runs = result.instances.iter().map(|i| i.traces.len()).sum();
    let summary = Summary { config: &result.config, total_runs, instances };
    Ok(serde_json::to_string_pretty(&summary)?)
}

/// Writes all output files into `out_dir` (created if missing):
/// `traces.csv`, `ecdf.csv`, `null_cdf.csv`, `ks_report.json`,
/// `per_step_costs.csv`, `summary.json`.
pub fn emit_outputs(result: &ExperimentResult, out_dir: &Path) -> Result<()> {
    std::fs::create_dir_all(out_dir)?;
    let write = |name: &str, content: String| -> Result<()> {
        std::fs::write(out_dir.join(name), content)?;
        Ok(())
    };
    write("traces.csv", traces_csv(result))?;
    write("ecdf.csv", ecdf_csv(result)?)?;
    write("null_cdf.csv", null_cdf_csv(result)?)?;
    write("ks_report.json", serde_json::to_string_pretty(&ks_report(result)?)?)?;
    write("per_step_costs.csv", per_step_costs_csv(result))?;
    write("summary.json", summary_json(result)?)?;
    Ok(())
}

/// A per-instance digest recomputed from a `traces.csv` file (the
/// `analyze` subcommand).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceDigest {
    pub instance: usize,
    pub runs: usize,
    pub successes: usize,
    pub median_time_to_optimum: Option<f64>,
    pub mean_final_normalized: f64,
}

/// Parses an emitted `traces.csv` and summarizes each instance.
pub fn analyze_traces(text: &str) -> Result<Vec<TraceDigest>> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::Parse { line: 1, message: "empty traces file".into() })?;
    if header != "instance,run,step,gamma,beta,best,mean,historic_best,normalized" {
        return Err(Error::Parse { line: 1, message: format!("unexpected header {header:?}") });
    }
    // (instance, run) → (first step reaching optimum, last normalized).
    type RunRecord = ((usize, usize), (Option<usize>, f64));
    let mut per_run: Vec<RunRecord> = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 9 fields, got {}", fields.len()),
            });
        }
        let parse_usize = |s: &str, what: &str| -> Result<usize> {
            s.parse().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("invalid {what} {s:?}"),
            })
        };
        let instance = parse_usize(fields[0], "instance")?;
        let run = parse_usize(fields[1], "run")?;
        let step = parse_usize(fields[2], "step")?;
        let normalized: f64 = fields[8].parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("invalid normalized value {:?}", fields[8]),
        })?;
        let key = (instance, run);
        let entry = match per_run.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v,
            None => {
                per_run.push((key, (None, 0.0)));
                &mut per_run.last_mut().unwrap().1
            }
        };
        if entry.0.is_none() && normalized >= 1.0 - OPTIMUM_TOLERANCE {
            entry.0 = Some(step);
        }
        entry.1 = normalized;
    }
    let mut instances: Vec<usize> = per_run.iter().map(|((i, _), _)| *i).collect();
    instances.sort_unstable();
    instances.dedup();
    let mut out = Vec::new();
    for inst in instances {
        let runs: Vec<&(Option<usize>, f64)> =
            per_run.iter().filter(|((i, _), _)| *i == inst).map(|(_, v)| v).collect();
        let mut times: Vec<usize> = runs.iter().filter_map(|(t, _)| *t).collect();
        times.sort_unstable();
        let mean_final = runs.iter().map(|(_, n)| n).sum::<f64>() / runs.len() as f64;
        out.push(TraceDigest {
            instance: inst,
            runs: runs.len(),
            successes: times.len(),
            median_time_to_optimum: median(&times),
            mean_final_normalized: mean_final,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            name: "tiny".into(),
            master_seed: 3,
            runs: 2,
            budget: 3,
            shots: 64,
            layers: 1,
            objective: ObjectiveStatistic::Max,
            graph: GraphSource::File { path: String::new() },
            instances: 1,
            noise: None,
            precondition: true,
        }
    }

    fn write_triangle(dir: &Path) -> std::path::PathBuf {
        let g = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let path = dir.join("triangle.json");
        g.write_json(&path).unwrap();
        path
    }

    #[test]
    fn config_validation_lists_field_paths() {
        let mut c = tiny_config();
        c.name = "  ".into();
        c.budget = 0;
        c.shots = 0;
        match c.validate() {
            Err(Error::Config(problems)) => {
                assert!(problems.iter().any(|p| p.starts_with("name:")));
                assert!(problems.iter().any(|p| p.starts_with("budget:")));
                assert!(problems.iter().any(|p| p.starts_with("shots:")));
                assert!(problems.iter().any(|p| p.starts_with("graph.path:")));
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn config_json_round_trip_rejects_unknown_fields() {
        let c = ExperimentConfig::preset("default-19q", 11).unwrap();
        let text = c.to_json_string().unwrap();
        let back = ExperimentConfig::from_json_str(&text).unwrap();
        assert_eq!(back, c);
        let bad = r#"{"name":"x","master_seed":1,"runs":1,"budget":1,"shots":1,
                      "graph":{"source":"fc20"},"bogus":true}"#;
        assert!(ExperimentConfig::from_json_str(bad).is_err());
    }

    #[test]
    fn presets_have_pinned_shapes() {
        let d = ExperimentConfig::preset("default-19q", 11).unwrap();
        assert_eq!((d.runs, d.budget, d.shots, d.instances), (20, 55, 2500, 1));
        assert_eq!(d.graph, GraphSource::Topology19q { unit_weights: false });
        let r = ExperimentConfig::preset("randomized-instances", 11).unwrap();
        assert_eq!((r.runs, r.instances), (10, 5));
        let f = ExperimentConfig::preset("fc20", 11).unwrap();
        assert_eq!((f.runs, f.shots), (10, 250));
        assert_eq!(f.graph, GraphSource::Fc20);
        assert!(ExperimentConfig::preset("nope", 1).is_err());
    }

    #[test]
    fn ecdf_basics() {
        // Single sample at 5: step from 0 to 1 at k=5.
        let e = empirical_cdf(&[Some(5)]).unwrap();
        assert_eq!(e.evaluate(4), 0.0);
        assert_eq!(e.evaluate(5), 1.0);
        assert_eq!(e.evaluate(100), 1.0);
        // Quartile staircase.
        let e = empirical_cdf(&[Some(1), Some(2), Some(3), Some(4)]).unwrap();
        for (k, want) in [(0, 0.0), (1, 0.25), (2, 0.5), (3, 0.75), (4, 1.0)] {
            assert_relative_eq!(e.evaluate(k), want);
        }
        // Censored runs hold the plateau below 1.
        let e = empirical_cdf(&[Some(2), None, None, Some(1)]).unwrap();
        assert_relative_eq!(e.evaluate(10), 0.5);
        assert_relative_eq!(e.plateau(), 0.5);
        assert_eq!(e.success_count(), 2);
        assert_eq!(e.total(), 4);
        assert!(empirical_cdf(&[]).is_err());
    }

    #[test]
    fn ks_statistic_examples() {
        let a = empirical_cdf(&[Some(0)]).unwrap();
        let b = empirical_cdf(&[Some(1)]).unwrap();
        // Identical curves → 0.
        assert_eq!(ks_statistic(|k| a.evaluate(k), |k| a.evaluate(k), 10), 0.0);
        // Step at 0 vs step at 1 → 1.
        assert_eq!(ks_statistic(|k| a.evaluate(k), |k| b.evaluate(k), 10), 1.0);
        // Staircases [1,2] vs [3,4] → 1.0 (at k=2 the first is done, the
        // second has not started).
        let c = empirical_cdf(&[Some(1), Some(2)]).unwrap();
        let d = empirical_cdf(&[Some(3), Some(4)]).unwrap();
        assert_relative_eq!(ks_statistic(|k| c.evaluate(k), |k| d.evaluate(k), 10), 1.0);
        // Symmetry.
        assert_relative_eq!(
            ks_statistic(|k| c.evaluate(k), |k| d.evaluate(k), 10),
            ks_statistic(|k| d.evaluate(k), |k| c.evaluate(k), 10)
        );
    }

    #[test]
    fn ks_significance_round_trip() {
        // α = 2 exp(-2 ks² nm/(n+m)) inverts to ks = √(-ln(α/2)(n+m)/(2nm)).
        let (n, m) = (23usize, 55usize);
        let ks = 0.392;
        let alpha = ks_significance(ks, n, m).unwrap();
        let back =
            (-(alpha / 2.0).ln() * (n + m) as f64 / (2.0 * n as f64 * m as f64)).sqrt();
        assert_relative_eq!(back, ks, max_relative = 1e-12);
        // ks = 0 → α = 2, reported raw.
        assert_relative_eq!(ks_significance(0.0, 5, 5).unwrap(), 2.0);
    }

    #[test]
    fn small_experiment_end_to_end() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_triangle(dir.path());
        let mut config = tiny_config();
        config.graph = GraphSource::File { path: path.to_string_lossy().into_owned() };
        let result = run_experiment(&config).unwrap();
        assert_eq!(result.instances.len(), 1);
        let inst = &result.instances[0];
        assert_eq!(inst.traces.len(), 2);
        assert!(inst.traces.iter().all(|t| t.records.len() <= 3));
        assert_relative_eq!(inst.optimum, 2.0, max_relative = 1e-12);
        assert_eq!(inst.optimal_count, 6);

        // Determinism: the same config gives byte-identical outputs.
        let again = run_experiment(&config).unwrap();
        assert_eq!(traces_csv(&result), traces_csv(&again));

        let out = dir.path().join("results");
        emit_outputs(&result, &out).unwrap();
        for name in [
            "traces.csv",
            "ecdf.csv",
            "null_cdf.csv",
            "ks_report.json",
            "per_step_costs.csv",
            "summary.json",
        ] {
            assert!(out.join(name).is_file(), "{name} missing");
        }
        let summary = std::fs::read_to_string(out.join("summary.json")).unwrap();
        assert!(summary.contains("\"total_runs\": 2"));

        // The digest recomputed from the CSV agrees with the result.
        let digests =
            analyze_traces(&std::fs::read_to_string(out.join("traces.csv")).unwrap()).unwrap();
        assert_eq!(digests.len(), 1);
        assert_eq!(digests[0].runs, 2);
        assert_eq!(digests[0].successes, inst.success_count());
    }

    #[test]
    fn zero_runs_emit_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_triangle(dir.path());
        let mut config = tiny_config();
        config.runs = 0;
        config.graph = GraphSource::File { path: path.to_string_lossy().into_owned() };
        let result = run_experiment(&config).unwrap();
        let out = dir.path().join("results");
        emit_outputs(&result, &out).unwrap();
        let traces = std::fs::read_to_string(out.join("traces.csv")).unwrap();
        assert_eq!(traces, "instance,run,step,gamma,beta,best,mean,historic_best,normalized\n");
        let ecdf = std::fs::read_to_string(out.join("ecdf.csv")).unwrap();
        assert_eq!(ecdf, "instance,step,empirical\n");
        let summary = std::fs::read_to_string(out.join("summary.json")).unwrap();
        assert!(summary.contains("\"total_runs\": 0"));
        assert!(summary.contains("\"runs\": 0"));
    }

    #[test]
    fn randomized_instances_differ() {
        let config = ExperimentConfig {
            name: "multi".into(),
            master_seed: 5,
            runs: 1,
            budget: 2,
            shots: 32,
            layers: 1,
            objective: ObjectiveStatistic::Max,
            graph: GraphSource::Topology19q { unit_weights: false },
            instances: 2,
            noise: None,
            precondition: true,
        };
        let result = run_experiment(&config).unwrap();
        assert_eq!(result.instances.len(), 2);
        let w0: Vec<f64> =
            result.instances[0].graph.edges().iter().map(|e| e.weight).collect();
        let w1: Vec<f64> =
            result.instances[1].graph.edges().iter().map(|e| e.weight).collect();
        assert_ne!(w0, w1, "instances must re-randomize weights");
        // Null CDF rows exist for both instances.
        let null = null_cdf_csv(&result).unwrap();
        assert!(null.lines().any(|l| l.starts_with("0,")));
        assert!(null.lines().any(|l| l.starts_with("1,")));
    }

    #[test]
    fn fc20_instance_carries_ground_truth() {
        let mut config = ExperimentConfig::preset("fc20", 11).unwrap();
        config.runs = 1;
        config.budget = 2;
        config.shots = 16;
        let result = run_experiment(&config).unwrap();
        let inst = &result.instances[0];
        assert_eq!(inst.graph.node_count(), 20);
        assert_eq!(inst.graph.edge_count(), 190);
        assert!(inst.label_truth.is_some());
        assert_eq!(inst.label_matches().unwrap().len(), 1);
    }

    #[test]
    fn noise_spec_builders() {
        assert!(NoiseSpec::TableS1.build(19).is_ok());
        assert!(NoiseSpec::TableS1.build(5).is_err());
        let u = NoiseSpec::UniformReadout { flip: 0.05 }.build(3).unwrap();
        assert_relative_eq!(u.readout_flip(2), 0.05);
        assert!(NoiseSpec::Custom { readout_flip: vec![0.1; 2], depolarizing_2q: 0.0 }
            .build(3)
            .is_err());
    }

    #[test]
    fn analyze_rejects_malformed_input() {
        assert!(analyze_traces("").is_err());
        assert!(analyze_traces("wrong,header\n").is_err());
        let good_header = "instance,run,step,gamma,beta,best,mean,historic_best,normalized\n";
        assert!(analyze_traces(&format!("{good_header}0,0,1,2,3\n")).is_err());
        assert!(
            analyze_traces(&format!("{good_header}0,0,1,0.5,0.5,1,0.7,1,abc\n")).is_err()
        );
        // Minimal valid file.
        let text = format!("{good_header}0,0,1,0.5,0.5,1,0.7,1,0.5\n0,0,2,0.5,0.5,2,0.9,2,1\n");
        let d = analyze_traces(&text).unwrap();
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].successes, 1);
        assert_eq!(d[0].median_time_to_optimum, Some(2.0));
    }
}
