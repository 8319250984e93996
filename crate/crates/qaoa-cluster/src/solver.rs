//! End-to-end Maxcut solving on one instance: prepare the simulator,
//! sample shot batches, and drive the angle search.
//!
//! Costs fed to the optimizer are normalized by the instance's known
//! optimum (found by exhaustive scan of the energy table), so the GP
//! defaults — unit signal variance, unit length scale — apply as-is and a
//! run "reaches the optimum" exactly when its normalized best hits 1.
//!
//! Before simulation the instance is *preconditioned*: all weights are
//! rescaled so the largest weight is 1. Maxcut is invariant under positive
//! rescaling (the argmax and the normalized costs are unchanged), but the
//! cost-layer angle γ multiplies weights directly, so rescaling keeps one
//! γ period meaningful for instances of any magnitude instead of aliasing
//! it away on large weights.

use rand::Rng;

use crate::bayesopt::{optimize, AcquisitionConfig, BayesOptConfig, GpConfig};
use crate::error::{Error, Result};
use crate::graph::{BitString, WeightedGraph};
use crate::rng::ChaCha8Rng;
use crate::sim::{NoiseModel, QaoaAngles, QaoaSimulator};
use crate::stats::{objective_value, CostSample, ObjectiveStatistic};

/// Slack, on the normalized scale, for declaring the optimum reached.
pub const OPTIMUM_TOLERANCE: f64 = 1e-9;

/// Settings for one optimization run.
#[derive(Clone, Debug)]
pub struct SolveConfig {
    /// QAOA layer count `p`.
    pub layers: usize,
    /// Measurement shots per objective evaluation.
    pub shots: usize,
    /// Objective evaluations per run.
    pub budget: usize,
    pub objective: ObjectiveStatistic,
    pub noise: Option<NoiseModel>,
    pub gp: GpConfig,
    pub acquisition: AcquisitionConfig,
    /// Rescale weights so the maximum weight is 1 before simulating.
    pub precondition: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            layers: 1,
            shots: 2500,
            budget: 55,
            objective: ObjectiveStatistic::Max,
            noise: None,
            gp: GpConfig::default(),
            acquisition: AcquisitionConfig::default(),
            precondition: true,
        }
    }
}

/// A problem instance readied for repeated runs: the (possibly rescaled)
/// energy table plus its exhaustively determined optimum.
#[derive(Clone, Debug)]
pub struct PreparedInstance {
    sim: QaoaSimulator,
    /// Weights were multiplied by this factor before simulation.
    scale: f64,
    optimum_scaled: f64,
    optimal_index: u64,
    optimal_count: usize,
}

impl PreparedInstance {
    pub fn new(g: &WeightedGraph, precondition: bool) -> Result<Self> {
        if g.edge_count() == 0 {
            return Err(Error::InvalidGraph("cannot optimize a graph with no edges".into()));
        }
        let scale = if precondition { 1.0 / g.max_weight() } else { 1.0 };
        let sim = QaoaSimulator::new(&g.scaled(scale)?)?;
        // Exhaustive scan of the energy table. Sequential on purpose: the
        // optimum, its first argmax, and the tie count must not depend on
        // thread count.
        let size = 1u64 << sim.qubit_count();
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0u64;
        let mut count = 0usize;
        for x in 0..size {
            let c = sim.cut_of_index(x);
            if c > best {
                best = c;
                arg = x;
                count = 1;
            } else if c == best {
                count += 1;
            }
        }
        Ok(PreparedInstance {
            sim,
            scale,
            optimum_scaled: best,
            optimal_index: arg,
            optimal_count: count,
        })
    }

    pub fn qubit_count(&self) -> usize {
        self.sim.qubit_count()
    }

    pub fn simulator(&self) -> &QaoaSimulator {
        &self.sim
    }

    /// The optimum on the original weight scale.
    pub fn optimum(&self) -> f64 {
        self.optimum_scaled / self.scale
    }

    pub fn optimal_assignment(&self) -> BitString {
        BitString::from_index(self.optimal_index, self.sim.qubit_count())
            .expect("index fits the register")
    }

    /// Number of basis states achieving the optimum (always even: the
    /// complement of an optimal cut is optimal).
    pub fn optimal_count(&self) -> usize {
        self.optimal_count
    }

    /// Probability that one uniform random bitstring is optimal.
    pub fn optimal_probability(&self) -> f64 {
        self.optimal_count as f64 / (1u64 << self.sim.qubit_count()) as f64
    }
}

/// One optimization step as reported in traces. Costs are on the original
/// weight scale; `normalized_historic_best` is the running best divided by
/// the optimum, so it is non-decreasing and capped at 1.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    /// 1-based step index.
    pub step: usize,
    pub gammas: Vec<f64>,
    pub betas: Vec<f64>,
    /// Best sampled cut in this step's shot batch.
    pub best_cost: f64,
    /// Mean sampled cut of the batch.
    pub mean_cost: f64,
    /// Best sampled cut over all steps so far.
    pub historic_best: f64,
    pub normalized_historic_best: f64,
}

/// The full record of one run.
#[derive(Clone, Debug)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    /// Per step: distinct sampled cut values with multiplicities.
    pub step_cost_counts: Vec<Vec<(f64, usize)>>,
    /// First 1-based step whose sampled best reached the optimum.
    pub time_to_optimum: Option<usize>,
    /// Best sampled assignment across the run.
    pub best_assignment: Option<BitString>,
    /// Its cut value on the original scale.
    pub best_cost: f64,
    pub optimum: f64,
    pub optimal_probability: f64,
    pub failure: Option<String>,
}

/// Runs GP-UCB angle optimization against a prepared instance. All
/// randomness (proposals and shot seeds) flows from `rng` in step order.
pub fn solve_prepared(
    inst: &PreparedInstance,
    config: &SolveConfig,
    rng: &mut ChaCha8Rng,
) -> Result<RunTrace> {
    if config.layers == 0 {
        return Err(Error::invalid("need at least one QAOA layer"));
    }
    if config.shots == 0 {
        return Err(Error::invalid("need at least one shot per step"));
    }
    let p = config.layers;
    let target = match config.objective {
        ObjectiveStatistic::Max => Some(1.0 - OPTIMUM_TOLERANCE),
        _ => None,
    };
    let bayes = BayesOptConfig {
        budget: config.budget,
        gp: config.gp,
        acquisition: config.acquisition,
        target,
    };

    let mut records: Vec<TraceRecord> = Vec::new();
    let mut step_cost_counts: Vec<Vec<(f64, usize)>> = Vec::new();
    let mut best_scaled = f64::NEG_INFINITY;
    let mut best_index: Option<u64> = None;

    let trace = optimize(2 * p, &bayes, rng, |x, rng| {
        let angles = QaoaAngles::from_flat(x)?;
        let state = inst.sim.prepare(&angles);
        let shot_seed = rng.gen::<u64>();
        let bits = state.sample_bitstrings(config.shots, shot_seed, config.noise.as_ref())?;

        let mut step_best = f64::NEG_INFINITY;
        let mut step_arg = 0u64;
        let costs: Vec<f64> = bits
            .iter()
            .map(|b| {
                let c = inst.sim.cut_of_index(b.index());
                if c > step_best {
                    step_best = c;
                    step_arg = b.index();
                }
                c
            })
            .collect();
        let sample = CostSample::new(costs)?;
        if step_best > best_scaled {
            best_scaled = step_best;
            best_index = Some(step_arg);
        }
        let scale = inst.scale;
        records.push(TraceRecord {
            step: records.len() + 1,
            gammas: angles.gammas().to_vec(),
            betas: angles.betas().to_vec(),
            best_cost: step_best / scale,
            mean_cost: sample.mean() / scale,
            historic_best: best_scaled / scale,
            normalized_historic_best: best_scaled / inst.optimum_scaled,
        });
        step_cost_counts.push(
            sample.value_counts().into_iter().map(|(v, c)| (v / scale, c)).collect(),
        );

        let objective = objective_value(config.objective, &inst.sim, &state, &sample)?;
        Ok(objective / inst.optimum_scaled)
    })?;

    let time_to_optimum = records
        .iter()
        .find(|r| r.normalized_historic_best >= 1.0 - OPTIMUM_TOLERANCE)
        .map(|r| r.step);
    let best_assignment = best_index
        .map(|i| BitString::from_index(i, inst.sim.qubit_count()))
        .transpose()?;
    Ok(RunTrace {
        records,
        step_cost_counts,
        time_to_optimum,
        best_assignment,
        best_cost: if best_scaled.is_finite() { best_scaled / inst.scale } else { f64::NEG_INFINITY },
        optimum: inst.optimum(),
        optimal_probability: inst.optimal_probability(),
        failure: trace.failure,
    })
}

/// Prepares `g` and runs one optimization.
pub fn solve_instance(
    g: &WeightedGraph,
    config: &SolveConfig,
    rng: &mut ChaCha8Rng,
) -> Result<RunTrace> {
    let inst = PreparedInstance::new(g, config.precondition)?;
    solve_prepared(&inst, config, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::brute_force_maxcut;
    use crate::rng::run_rng;
    use approx::assert_relative_eq;

    fn triangle() -> WeightedGraph {
        WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    #[test]
    fn prepared_instance_finds_exhaustive_optimum() {
        let inst = PreparedInstance::new(&triangle(), true).unwrap();
        assert_relative_eq!(inst.optimum(), 2.0, max_relative = 1e-12);
        assert_eq!(inst.optimal_count(), 6);
        assert_relative_eq!(inst.optimal_probability(), 0.75);
        let (_, value) = brute_force_maxcut(&triangle()).unwrap();
        assert_relative_eq!(inst.optimum(), value.value(), max_relative = 1e-12);
    }

    #[test]
    fn preconditioning_preserves_optimum_and_argmax() {
        let g = WeightedGraph::new(4, [(0, 1, 8.0), (1, 2, 3.0), (2, 3, 11.0), (0, 3, 5.0)])
            .unwrap();
        let raw = PreparedInstance::new(&g, false).unwrap();
        let pre = PreparedInstance::new(&g, true).unwrap();
        assert_relative_eq!(raw.optimum(), pre.optimum(), max_relative = 1e-12);
        assert_eq!(raw.optimal_count(), pre.optimal_count());
        // Same argmax (first index scans identically under positive scaling).
        assert_eq!(raw.optimal_assignment(), pre.optimal_assignment());
        // The scaled table really is normalized: max weight 1 means the
        // scaled optimum is at most the total weight ratio.
        assert_relative_eq!(pre.optimum() / raw.optimum(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn edgeless_graph_rejected() {
        let g = WeightedGraph::new(3, Vec::<(usize, usize, f64)>::new()).unwrap();
        assert!(PreparedInstance::new(&g, true).is_err());
    }

    #[test]
    fn solve_runs_deterministically() {
        let g = triangle();
        let config = SolveConfig { shots: 200, budget: 8, ..SolveConfig::default() };
        let a = solve_instance(&g, &config, &mut run_rng(5, 0)).unwrap();
        let b = solve_instance(&g, &config, &mut run_rng(5, 0)).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.time_to_optimum, b.time_to_optimum);
        assert_eq!(a.best_assignment, b.best_assignment);
        // A different run stream gives a different trajectory.
        let c = solve_instance(&g, &config, &mut run_rng(5, 1)).unwrap();
        assert_ne!(
            a.records.first().map(|r| r.gammas.clone()),
            c.records.first().map(|r| r.gammas.clone())
        );
    }

    #[test]
    fn trace_records_are_consistent() {
        let g = WeightedGraph::new(
            6,
            [(0, 1, 0.9), (1, 2, 0.4), (2, 3, 1.3), (3, 4, 0.7), (4, 5, 1.1), (0, 5, 0.6)],
        )
        .unwrap();
        let config = SolveConfig { shots: 300, budget: 12, ..SolveConfig::default() };
        let trace = solve_instance(&g, &config, &mut run_rng(7, 0)).unwrap();
        assert!(trace.failure.is_none());
        let mut historic = f64::NEG_INFINITY;
        for (i, r) in trace.records.iter().enumerate() {
            assert_eq!(r.step, i + 1);
            assert_eq!(r.gammas.len(), 1);
            assert_eq!(r.betas.len(), 1);
            historic = historic.max(r.best_cost);
            assert_relative_eq!(r.historic_best, historic, max_relative = 1e-12);
            assert!(r.mean_cost <= r.best_cost + 1e-12);
            assert!(r.normalized_historic_best <= 1.0 + 1e-12);
            assert_relative_eq!(
                r.normalized_historic_best,
                r.historic_best / trace.optimum,
                max_relative = 1e-9
            );
            // Step cost counts cover exactly the shot count.
            let total: usize = trace.step_cost_counts[i].iter().map(|(_, c)| c).sum();
            assert_eq!(total, 300);
        }
        // The reported best assignment evaluates to the reported best cost.
        let best = trace.best_assignment.clone().unwrap();
        let cut = g.cut_cost(&best).unwrap().value();
        assert_relative_eq!(cut, trace.best_cost, max_relative = 1e-9);
    }

    #[test]
    fn small_instance_reaches_optimum_and_stops() {
        let g = triangle();
        // With 75% of bitstrings optimal, the first shot batch almost
        // surely contains an optimum; the run must stop right there.
        let config = SolveConfig { shots: 64, budget: 20, ..SolveConfig::default() };
        let trace = solve_instance(&g, &config, &mut run_rng(3, 0)).unwrap();
        let t = trace.time_to_optimum.expect("triangle optimum is easy");
        assert_eq!(t, 1);
        assert_eq!(trace.records.len(), t, "run stops at the optimum");
        assert_relative_eq!(trace.best_cost, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn layer_count_shapes_the_angle_vector() {
        let g = triangle();
        let config =
            SolveConfig { layers: 2, shots: 64, budget: 3, ..SolveConfig::default() };
        let trace = solve_instance(&g, &config, &mut run_rng(11, 0)).unwrap();
        for r in &trace.records {
            assert_eq!(r.gammas.len(), 2);
            assert_eq!(r.betas.len(), 2);
        }
    }

    #[test]
    fn invalid_configs_rejected() {
        let g = triangle();
        let c = SolveConfig { layers: 0, ..SolveConfig::default() };
        assert!(solve_instance(&g, &c, &mut run_rng(1, 0)).is_err());
        let c = SolveConfig { shots: 0, ..SolveConfig::default() };
        assert!(solve_instance(&g, &c, &mut run_rng(1, 0)).is_err());
    }
}
