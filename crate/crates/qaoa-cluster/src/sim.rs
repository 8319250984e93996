//! Dense statevector simulation of QAOA circuits.
//!
//! States live in the computational basis with the packed-integer
//! convention of [`crate::graph`]: bit `k` of a basis-state index is qubit
//! `k`. The QAOA state for `p` layers is
//!
//! ```text
//! |γ, β⟩ = V_p U_p · · · V_1 U_1 |+⟩^n
//! ```
//!
//! where `U_l = exp(-i γ_l H_C)` applies the diagonal cost phases
//! (`H_C |x⟩ = E(x) |x⟩` with `E(x) = -cut(x)`) and `V_l = exp(-i β_l Σ_k σ^x_k)`
//! is the transverse-field driver, a product of single-qubit `RX(2β_l)`
//! rotations. Both kernels are matrix-free: the cost layer is an
//! elementwise phase multiply and the driver is `n` two-amplitude butterfly
//! passes, so one layer costs `O(n · 2^n)` flops.
//!
//! Amplitude maps run in parallel under the `parallel` feature; every
//! reduction that feeds a reported number (norms, cumulative probabilities)
//! is sequential, so sampled bits are identical for any thread count.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{BitString, WeightedGraph};
use crate::par;

/// Hard cap on simulated qubits (a 2^24 statevector is 256 MiB).
pub const MAX_QUBITS: usize = 24;

pub const TAU: f64 = std::f64::consts::TAU;

/// QAOA angle schedule: `p` cost angles γ and `p` driver angles β, each in
/// `[0, 2π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QaoaAngles {
    gammas: Vec<f64>,
    betas: Vec<f64>,
}

impl QaoaAngles {
    pub fn new(gammas: Vec<f64>, betas: Vec<f64>) -> Result<Self> {
        if gammas.is_empty() {
            return Err(Error::invalid("angle schedule needs at least one layer"));
        }
        if gammas.len() != betas.len() {
            return Err(Error::invalid(format!(
                "angle schedule has {} cost angles but {} driver angles",
                gammas.len(),
                betas.len()
            )));
        }
        for &a in gammas.iter().chain(betas.iter()) {
            if !a.is_finite() || !(0.0..TAU).contains(&a) {
                return Err(Error::invalid(format!("angle {a} outside [0, 2π)")));
            }
        }
        Ok(QaoaAngles { gammas, betas })
    }

    /// Builds from the flat layout `[γ_1..γ_p, β_1..β_p]` used by the
    /// optimizer.
    pub fn from_flat(theta: &[f64]) -> Result<Self> {
        if theta.is_empty() || !theta.len().is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "flat angle vector has length {}, expected positive and even",
                theta.len()
            )));
        }
        let p = theta.len() / 2;
        Self::new(theta[..p].to_vec(), theta[p..].to_vec())
    }

    pub fn p(&self) -> usize {
        self.gammas.len()
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.gammas.iter().chain(self.betas.iter()).copied().collect()
    }
}

/// Readout and two-qubit noise parameters.
///
/// Readout noise flips each measured bit independently with a per-qubit
/// probability in `[0, 0.5]`. The two-qubit depolarizing probability applies
/// per two-qubit gate when executing compiled programs stochastically (see
/// [`crate::compile::sample_program`]); it does not affect exact state
/// preparation.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseModel {
    readout_flip: Vec<f64>,
    depolarizing_2q: f64,
}

/// Measured readout fidelities of the 19-qubit device, in vertex order of
/// [`crate::graph::topology_19q`] (device qubit 3 absent).
pub const DEVICE_READOUT_FIDELITY: [f64; 19] = [
    0.938, 0.958, 0.970, 0.953, 0.965, 0.840, 0.925, 0.947, 0.927, 0.942, 0.900, 0.942, 0.921,
    0.947, 0.970, 0.948, 0.921, 0.930, 0.930,
];

impl NoiseModel {
    pub fn new(readout_flip: Vec<f64>, depolarizing_2q: f64) -> Result<Self> {
        for (q, &p) in readout_flip.iter().enumerate() {
            if !(0.0..=0.5).contains(&p) {
                return Err(Error::invalid(format!(
                    "readout flip probability {p} for qubit {q} outside [0, 0.5]"
                )));
            }
        }
        if !(0.0..=1.0).contains(&depolarizing_2q) {
            return Err(Error::invalid(format!(
                "two-qubit depolarizing probability {depolarizing_2q} outside [0, 1]"
            )));
        }
        Ok(NoiseModel { readout_flip, depolarizing_2q })
    }

    /// The same flip probability on every one of `n` qubits.
    pub fn readout_uniform(n: usize, p: f64) -> Result<Self> {
        Self::new(vec![p; n], 0.0)
    }

    /// Readout noise from the bundled 19-qubit fidelity table
    /// (flip probability `1 - F_RO` per qubit); selected on the CLI as
    /// `--noise table-s1`.
    pub fn table_s1() -> Self {
        NoiseModel {
            readout_flip: DEVICE_READOUT_FIDELITY.iter().map(|f| 1.0 - f).collect(),
            depolarizing_2q: 0.0,
        }
    }

    pub fn with_depolarizing_2q(mut self, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!(
                "two-qubit depolarizing probability {p} outside [0, 1]"
            )));
        }
        self.depolarizing_2q = p;
        Ok(self)
    }

    /// Flip probability for qubit `q` (0 beyond the configured width).
    pub fn readout_flip(&self, q: usize) -> f64 {
        self.readout_flip.get(q).copied().unwrap_or(0.0)
    }

    pub fn qubit_count(&self) -> usize {
        self.readout_flip.len()
    }

    pub fn depolarizing_2q(&self) -> f64 {
        self.depolarizing_2q
    }

    pub fn has_readout_noise(&self) -> bool {
        self.readout_flip.iter().any(|&p| p > 0.0)
    }
}

/// A normalized `2^n`-amplitude quantum state.
#[derive(Clone, Debug)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

fn check_capacity(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("state needs at least one qubit"));
    }
    if n > MAX_QUBITS {
        return Err(Error::CapacityExceeded { what: "statevector", requested: n, max: MAX_QUBITS });
    }
    Ok(())
}

impl StateVector {
    /// `|+⟩^n`: every basis state with amplitude `2^{-n/2}`.
    pub fn uniform_superposition(n: usize) -> Result<Self> {
        check_capacity(n)?;
        let amp = Complex64::new((1u64 << n) as f64, 0.0).sqrt().finv();
        Ok(StateVector { n, amps: vec![amp; 1 << n] })
    }

    /// `|0…0⟩`.
    pub fn zero_state(n: usize) -> Result<Self> {
        check_capacity(n)?;
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { n, amps })
    }

    /// Wraps raw amplitudes; the length must be a power of two and the
    /// vector normalized to within 1e-6.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let len = amps.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::invalid(format!(
                "amplitude vector length {len} is not a power of two ≥ 2"
            )));
        }
        let n = len.trailing_zeros() as usize;
        check_capacity(n)?;
        let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::NotNormalized { total });
        }
        Ok(StateVector { n, amps })
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `|amplitude|²` per basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        par::map_index(self.amps.len(), |x| self.amps[x].norm_sqr())
    }

    fn check_qubit(&self, q: usize) -> Result<()> {
        if q >= self.n {
            return Err(Error::invalid(format!(
                "qubit {q} out of range for {}-qubit state",
                self.n
            )));
        }
        Ok(())
    }

    /// Visits every amplitude pair `(x, x | 1<<q)` and replaces it by
    /// `f(idx0, a0, a1)`, where `idx0` is the basis index with bit `q`
    /// clear.
    fn for_each_pair<F>(&mut self, q: usize, f: F)
    where
        F: Fn(usize, Complex64, Complex64) -> (Complex64, Complex64) + Sync,
    {
        let half = 1usize << q;
        par::for_each_chunk_mut(&mut self.amps, half << 1, |base, chunk| {
            let (lo, hi) = chunk.split_at_mut(half);
            for k in 0..half {
                let (a0, a1) = f(base + k, lo[k], hi[k]);
                lo[k] = a0;
                hi[k] = a1;
            }
        });
    }

    /// Hadamard on qubit `q`.
    pub fn apply_h(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        self.for_each_pair(q, |_, a0, a1| ((a0 + a1) * s, (a0 - a1) * s));
        Ok(())
    }

    /// Pauli X on qubit `q`.
    pub fn apply_x(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        self.for_each_pair(q, |_, a0, a1| (a1, a0));
        Ok(())
    }

    /// Pauli Y on qubit `q`.
    pub fn apply_y(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let i = Complex64::new(0.0, 1.0);
        self.for_each_pair(q, move |_, a0, a1| (-i * a1, i * a0));
        Ok(())
    }

    /// Pauli Z on qubit `q`.
    pub fn apply_z(&mut self, q: usize) -> Result<()> {
        self.check_qubit(q)?;
        let mask = 1usize << q;
        par::for_each_mut(&mut self.amps, |x, a| {
            if x & mask != 0 {
                *a = -*a;
            }
        });
        Ok(())
    }

    /// `RZ(θ) = diag(e^{-iθ/2}, e^{+iθ/2})` on qubit `q`.
    pub fn apply_rz(&mut self, q: usize, theta: f64) -> Result<()> {
        self.check_qubit(q)?;
        let mask = 1usize << q;
        let minus = Complex64::from_polar(1.0, -theta / 2.0);
        let plus = Complex64::from_polar(1.0, theta / 2.0);
        par::for_each_mut(&mut self.amps, |x, a| {
            *a *= if x & mask == 0 { minus } else { plus };
        });
        Ok(())
    }

    /// `RX(θ) = exp(-i θ σ^x / 2)` on qubit `q`.
    pub fn apply_rx(&mut self, q: usize, theta: f64) -> Result<()> {
        self.check_qubit(q)?;
        let c = (theta / 2.0).cos();
        let ms = Complex64::new(0.0, -(theta / 2.0).sin());
        self.for_each_pair(q, move |_, a0, a1| (c * a0 + ms * a1, ms * a0 + c * a1));
        Ok(())
    }

    /// Controlled-X with control `c` and target `t`.
    pub fn apply_cnot(&mut self, c: usize, t: usize) -> Result<()> {
        self.check_qubit(c)?;
        self.check_qubit(t)?;
        if c == t {
            return Err(Error::invalid(format!("cnot control and target both {c}")));
        }
        let cmask = 1usize << c;
        self.for_each_pair(t, move |idx0, a0, a1| {
            if idx0 & cmask != 0 {
                (a1, a0)
            } else {
                (a0, a1)
            }
        });
        Ok(())
    }

    /// Controlled-Z between qubits `a` and `b` (symmetric).
    pub fn apply_cz(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_qubit(a)?;
        self.check_qubit(b)?;
        if a == b {
            return Err(Error::invalid(format!("cz endpoints both {a}")));
        }
        let mask = (1usize << a) | (1usize << b);
        par::for_each_mut(&mut self.amps, |x, amp| {
            if x & mask == mask {
                *amp = -*amp;
            }
        });
        Ok(())
    }

    /// One cost layer: multiplies each amplitude by `exp(-i γ E(x))` with
    /// `E(x) = -cut(x)` for the given graph.
    pub fn apply_cost_unitary(&mut self, g: &WeightedGraph, gamma: f64) -> Result<()> {
        if self.n != g.node_count() {
            return Err(Error::LengthMismatch { expected: g.node_count(), got: self.n });
        }
        par::for_each_mut(&mut self.amps, |x, a| {
            *a *= Complex64::from_polar(1.0, -gamma * g.energy_of_index(x as u64));
        });
        Ok(())
    }

    /// One driver layer: `exp(-i β σ^x)` on every qubit, i.e. `RX(2β)` per
    /// qubit.
    pub fn apply_driver_unitary(&mut self, beta: f64) {
        for q in 0..self.n {
            self.apply_rx(q, 2.0 * beta).expect("qubit index in range by construction");
        }
    }

    /// Draws `n_shots` measurement outcomes by inverse-CDF sampling.
    ///
    /// The cumulative distribution is accumulated sequentially (exact
    /// determinism for any thread count); each shot costs one binary search.
    /// With a noise model, each output bit is then flipped independently
    /// with its per-qubit readout probability. Per shot, the generator is
    /// consumed in a fixed documented order: one uniform for the basis-state
    /// draw, then (only when readout noise is active) one uniform per qubit,
    /// ascending.
    pub fn sample_bitstrings(
        &self,
        n_shots: usize,
        seed: u64,
        noise: Option<&NoiseModel>,
    ) -> Result<Vec<BitString>> {
        if n_shots == 0 {
            return Err(Error::invalid("shot count must be at least 1"));
        }
        let probs = self.probabilities();
        let mut cumulative = Vec::with_capacity(probs.len());
        let mut total = 0.0;
        for p in probs {
            total += p;
            cumulative.push(total);
        }
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::NotNormalized { total });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let flip = noise.filter(|m| m.has_readout_noise());
        let mut out = Vec::with_capacity(n_shots);
        for _ in 0..n_shots {
            let u: f64 = rng.gen::<f64>() * total;
            let mut x = cumulative.partition_point(|&c| c <= u) as u64;
            if x as usize >= cumulative.len() {
                x = (cumulative.len() - 1) as u64; // guards u == total edge case
            }
            if let Some(m) = flip {
                for q in 0..self.n {
                    if rng.gen::<f64>() < m.readout_flip(q) {
                        x ^= 1 << q;
                    }
                }
            }
            out.push(BitString::from_index(x, self.n)?);
        }
        Ok(out)
    }
}

/// Precomputed per-basis-state energies for one graph, reusable across
/// angle evaluations and runs.
///
/// Building the table costs one `O(m · 2^n)` sweep; afterwards each cost
/// layer is a single elementwise phase pass and sampled cut values are
/// table lookups.
#[derive(Clone, Debug)]
pub struct QaoaSimulator {
    n: usize,
    /// `E(x) = -cut(x)` indexed by basis state.
    energies: Vec<f64>,
}

impl QaoaSimulator {
    pub fn new(g: &WeightedGraph) -> Result<Self> {
        let n = g.node_count();
        check_capacity(n)?;
        let energies = par::map_index(1 << n, |x| g.energy_of_index(x as u64));
        Ok(QaoaSimulator { n, energies })
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn energy_of_index(&self, x: u64) -> f64 {
        self.energies[x as usize]
    }

    pub fn cut_of_index(&self, x: u64) -> f64 {
        -self.energies[x as usize]
    }

    /// Prepares `|γ, β⟩` from `|+⟩^n`.
    pub fn prepare(&self, angles: &QaoaAngles) -> StateVector {
        let mut state = StateVector::uniform_superposition(self.n)
            .expect("capacity checked at construction");
        for l in 0..angles.p() {
            let gamma = angles.gammas()[l];
            par::for_each_mut(&mut state.amps, |x, a| {
                *a *= Complex64::from_polar(1.0, -gamma * self.energies[x]);
            });
            state.apply_driver_unitary(angles.betas()[l]);
        }
        state
    }
}

/// Prepares the QAOA state for `g` in one shot (builds a fresh energy
/// table; reuse [`QaoaSimulator`] when evaluating many angle settings).
pub fn prepare_qaoa_state(g: &WeightedGraph, angles: &QaoaAngles) -> Result<StateVector> {
    Ok(QaoaSimulator::new(g)?.prepare(angles))
}
