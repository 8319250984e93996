//! Gaussian-process upper-confidence-bound optimization for the angle
//! search.
//!
//! The surrogate is a GP with a Matérn-5/2 kernel
//!
//! ```text
//! k(r) = σ_f² · (1 + √5·r/ℓ + 5r²/(3ℓ²)) · exp(-√5·r/ℓ)
//! ```
//!
//! fit by Cholesky factorization (never an explicit inverse). Acquisition
//! maximizes `UCB(x) = μ(x) + κ·σ(x)` over a fresh batch of uniform random
//! candidates followed by coordinate-wise refinement with geometric step
//! halving; parameters live on the torus `[0, 2π)^d` and wrap.
//!
//! Defaults are tuned for objectives normalized to `[0, 1]` (cut values
//! divided by the known optimum): unit signal variance, unit length scale,
//! observation noise `σ_n² = 0.01`, `κ = 2.576`, and a zero prior mean.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::ChaCha8Rng;

const TAU: f64 = std::f64::consts::TAU;

/// Matérn-5/2 covariance as a function of distance.
#[derive(Clone, Copy, Debug)]
pub struct MaternKernel {
    signal_variance: f64,
    length_scale: f64,
}

impl MaternKernel {
    pub fn new(signal_variance: f64, length_scale: f64) -> Result<Self> {
        if !(signal_variance > 0.0 && signal_variance.is_finite()) {
            return Err(Error::invalid(format!("signal variance {signal_variance} must be positive")));
        }
        if !(length_scale > 0.0 && length_scale.is_finite()) {
            return Err(Error::invalid(format!("length scale {length_scale} must be positive")));
        }
        Ok(MaternKernel { signal_variance, length_scale })
    }

    pub fn signal_variance(&self) -> f64 {
        self.signal_variance
    }

    pub fn eval(&self, r: f64) -> f64 {
        let a = 5f64.sqrt() * r / self.length_scale;
        self.signal_variance * (1.0 + a + a * a / 3.0) * (-a).exp()
    }
}

impl Default for MaternKernel {
    fn default() -> Self {
        MaternKernel { signal_variance: 1.0, length_scale: 1.0 }
    }
}

/// How distance between parameter vectors is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DistanceMetric {
    /// Plain Euclidean distance on the raw coordinates (the default).
    #[default]
    Euclidean,
    /// Euclidean distance between points on the unit circle per coordinate
    /// (`2·sin(Δ/2)` per dimension), so 0 and 2π-ε are close.
    Chordal,
}

impl DistanceMetric {
    pub fn distance(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        let sq: f64 = match self {
            DistanceMetric::Euclidean => {
                x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
            }
            DistanceMetric::Chordal => x
                .iter()
                .zip(y)
                .map(|(a, b)| {
                    let c = 2.0 * ((a - b) / 2.0).sin();
                    c * c
                })
                .sum(),
        };
        sq.sqrt()
    }
}

/// Hyperparameters of the GP surrogate.
#[derive(Clone, Copy, Debug)]
pub struct GpConfig {
    pub kernel: MaternKernel,
    /// Observation noise variance added to the Gram diagonal.
    pub noise_variance: f64,
    /// Numerical jitter added to the Gram diagonal.
    pub jitter: f64,
    pub prior_mean: f64,
    pub metric: DistanceMetric,
}

impl Default for GpConfig {
    fn default() -> Self {
        GpConfig {
            kernel: MaternKernel::default(),
            noise_variance: 0.01,
            jitter: 1e-8,
            prior_mean: 0.0,
            metric: DistanceMetric::Euclidean,
        }
    }
}

/// A GP posterior over observed `(x, y)` pairs, refit on every observation.
#[derive(Clone, Debug)]
pub struct GpModel {
    config: GpConfig,
    dim: usize,
    xs: Vec<Vec<f64>>,
    ys: Vec<f64>,
    /// Lower Cholesky factor of the Gram matrix.
    lower: DMatrix<f64>,
    /// `K⁻¹ (y - prior_mean)`.
    alpha: DVector<f64>,
}

impl GpModel {
    pub fn new(dim: usize, config: GpConfig) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("GP needs at least one input dimension"));
        }
        if !(config.noise_variance >= 0.0 && config.noise_variance.is_finite()) {
            return Err(Error::invalid(format!(
                "noise variance {} must be non-negative",
                config.noise_variance
            )));
        }
        if !(config.jitter >= 0.0 && config.jitter.is_finite()) {
            return Err(Error::invalid(format!("jitter {} must be non-negative", config.jitter)));
        }
        if !config.prior_mean.is_finite() {
            return Err(Error::invalid("prior mean must be finite"));
        }
        Ok(GpModel {
            config,
            dim,
            xs: Vec::new(),
            ys: Vec::new(),
            lower: DMatrix::zeros(0, 0),
            alpha: DVector::zeros(0),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn observations(&self) -> (&[Vec<f64>], &[f64]) {
        (&self.xs, &self.ys)
    }

    /// Adds one observation and refits the posterior.
    pub fn observe(&mut self, x: Vec<f64>, y: f64) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::LengthMismatch { expected: self.dim, got: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) || !y.is_finite() {
            return Err(Error::invalid("observations must be finite"));
        }
        self.xs.push(x);
        self.ys.push(y);
        self.refit()
    }

    fn refit(&mut self) -> Result<()> {
        let n = self.xs.len();
        let diag = self.config.noise_variance + self.config.jitter;
        let gram = DMatrix::from_fn(n, n, |i, j| {
            let k = self
                .config
                .kernel
                .eval(self.config.metric.distance(&self.xs[i], &self.xs[j]));
            if i == j {
                k + diag
            } else {
                k
            }
        });
        let chol: Cholesky<f64, Dyn> = Cholesky::new(gram).ok_or_else(|| {
            Error::DegenerateGram(format!(
                "Cholesky factorization failed for {n} observations \
                 (noise {}, jitter {})",
                self.config.noise_variance, self.config.jitter
            ))
        })?;
        let centered = DVector::from_iterator(n, self.ys.iter().map(|y| y - self.config.prior_mean));
        self.alpha = chol.solve(&centered);
        self.lower = chol.unpack();
        Ok(())
    }

    /// Posterior mean and standard deviation of the latent function at `x`.
    /// With no observations this is the prior.
    pub fn posterior(&self, x: &[f64]) -> Result<(f64, f64)> {
        if x.len() != self.dim {
            return Err(Error::LengthMismatch { expected: self.dim, got: x.len() });
        }
        let sigma2 = self.config.kernel.signal_variance();
        if self.is_empty() {
            return Ok((self.config.prior_mean, sigma2.sqrt()));
        }
        let n = self.xs.len();
        let ks = DVector::from_iterator(
            n,
            self.xs
                .iter()
                .map(|xi| self.config.kernel.eval(self.config.metric.distance(xi, x))),
        );
        let mean = self.config.prior_mean + ks.dot(&self.alpha);
        let v = self
            .lower
            .solve_lower_triangular(&ks)
            .ok_or_else(|| Error::DegenerateGram("triangular solve failed".into()))?;
        let var = (sigma2 - v.dot(&v)).max(0.0);
        Ok((mean, var.sqrt()))
    }

    /// `μ(x) + κ·σ(x)`.
    pub fn upper_confidence(&self, x: &[f64], kappa: f64) -> Result<f64> {
        let (mean, sd) = self.posterior(x)?;
        Ok(mean + kappa * sd)
    }
}

/// Acquisition-search settings.
#[derive(Clone, Copy, Debug)]
pub struct AcquisitionConfig {
    /// Exploration weight in the UCB rule.
    pub kappa: f64,
    /// Uniform random candidates scored per proposal.
    pub candidate_count: usize,
    /// Coordinate-descent sweeps over the best candidate; the move size
    /// starts at π/2 and halves after each sweep.
    pub refinement_steps: usize,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        AcquisitionConfig { kappa: 2.576, candidate_count: 256, refinement_steps: 20 }
    }
}

fn uniform_point(dim: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..dim).map(|_| rng.gen::<f64>() * TAU).collect()
}

/// Proposes the next evaluation point: the UCB maximizer over a fresh
/// random candidate batch, polished by wrapped coordinate descent. With an
/// empty model every point has equal score, so a uniform draw is returned.
/// Ties keep the first maximizer.
pub fn propose_next(
    gp: &GpModel,
    rng: &mut ChaCha8Rng,
    acq: &AcquisitionConfig,
) -> Result<Vec<f64>> {
    let dim = gp.dim();
    if gp.is_empty() {
        return Ok(uniform_point(dim, rng));
    }
    if acq.candidate_count == 0 {
        return Err(Error::invalid("acquisition needs at least one candidate"));
    }
    let mut best = uniform_point(dim, rng);
    let mut best_val = gp.upper_confidence(&best, acq.kappa)?;
    for _ in 1..acq.candidate_count {
        let cand = uniform_point(dim, rng);
        let val = gp.upper_confidence(&cand, acq.kappa)?;
        if val > best_val {
            best = cand;
            best_val = val;
        }
    }
    let mut step = std::f64::consts::FRAC_PI_2;
    for _ in 0..acq.refinement_steps {
        for k in 0..dim {
            for sign in [1.0, -1.0] {
                let mut cand = best.clone();
                cand[k] = (cand[k] + sign * step).rem_euclid(TAU);
                let val = gp.upper_confidence(&cand, acq.kappa)?;
                if val > best_val {
                    best = cand;
                    best_val = val;
                }
            }
        }
        step *= 0.5;
    }
    Ok(best)
}

/// Settings for a full optimization run.
#[derive(Clone, Copy, Debug)]
pub struct BayesOptConfig {
    /// Number of objective evaluations.
    pub budget: usize,
    pub gp: GpConfig,
    pub acquisition: AcquisitionConfig,
    /// Stop as soon as an observation reaches this value.
    pub target: Option<f64>,
}

impl Default for BayesOptConfig {
    fn default() -> Self {
        BayesOptConfig {
            budget: 55,
            gp: GpConfig::default(),
            acquisition: AcquisitionConfig::default(),
            target: None,
        }
    }
}

/// One evaluated point.
#[derive(Clone, Debug)]
pub struct OptimizationStep {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Best objective seen up to and including this step.
    pub historic_best: f64,
}

/// The record of an optimization run. `reached_target_at` is the 1-based
/// step index of the first observation at or above the target. A failed
/// objective evaluation truncates the trace and reports in `failure`.
#[derive(Clone, Debug)]
pub struct OptimizationTrace {
    pub steps: Vec<OptimizationStep>,
    pub reached_target_at: Option<usize>,
    pub failure: Option<String>,
}

impl OptimizationTrace {
    pub fn best(&self) -> Option<&OptimizationStep> {
        self.steps
            .iter()
            .reduce(|best, s| if s.objective > best.objective { s } else { best })
    }
}

/// Runs GP-UCB over `[0, 2π)^dim`: propose, evaluate, observe, repeat.
///
/// The RNG drives both candidate generation and anything the objective
/// draws from it, in program order, so a run is a pure function of the
/// generator state. An objective error stops the run and is reported in
/// the trace rather than unwinding, so partial results survive.
pub fn optimize(
    dim: usize,
    config: &BayesOptConfig,
    rng: &mut ChaCha8Rng,
    mut objective: impl FnMut(&[f64], &mut ChaCha8Rng) -> Result<f64>,
) -> Result<OptimizationTrace> {
    let mut gp = GpModel::new(dim, config.gp)?;
    let mut trace =
        OptimizationTrace { steps: Vec::new(), reached_target_at: None, failure: None };
    let mut historic_best = f64::NEG_INFINITY;
    for step in 1..=config.budget {
        let x = match propose_next(&gp, rng, &config.acquisition) {
            Ok(x) => x,
            Err(e) => {
                trace.failure = Some(format!("proposal failed at step {step}: {e}"));
                return Ok(trace);
            }
        };
        let y = match objective(&x, rng) {
            Ok(y) => y,
            Err(e) => {
                let err = Error::ObjectiveFailed { step, source: Box::new(e) };
                trace.failure = Some(err.to_string());
                return Ok(trace);
            }
        };
        if !y.is_finite() {
            trace.failure = Some(format!("objective returned non-finite value at step {step}"));
            return Ok(trace);
        }
        historic_best = historic_best.max(y);
        trace.steps.push(OptimizationStep { x: x.clone(), objective: y, historic_best });
        if let Some(target) = config.target {
            if y >= target {
                trace.reached_target_at = Some(step);
                return Ok(trace);
            }
        }
        gp.observe(x, y)?;
    }
    Ok(trace)
}
