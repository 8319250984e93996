//! Slow dense-matrix reference constructions.
//!
//! Everything here is built the obvious way — explicit `2^n × 2^n`
//! matrices, generic scaling-and-squaring matrix exponentials, gate
//! unitaries assembled column-by-column from their action on basis states —
//! deliberately sharing no code with the fast statevector kernels. Tests
//! use this module as an independent oracle: the fast path and the compiled
//! gate programs must reproduce these states and unitaries up to global
//! phase. Costs are exponential in memory *and* time, so keep `n` small
//! (≤ 10 or so).

use num_complex::Complex64;

use crate::compile::{GateProgram, Instruction};
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::sim::QaoaAngles;

/// A dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(n: usize) -> Self {
        CMatrix { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.n + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.n + col] = value;
    }

    /// `self · other`.
    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// `self · v`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.n, v.len(), "dimension mismatch");
        let n = self.n;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (i, out_i) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &vj) in v.iter().enumerate() {
                acc += self.data[i * n + j] * vj;
            }
            *out_i = acc;
        }
        out
    }

    pub fn scale(&self, c: Complex64) -> CMatrix {
        CMatrix { n: self.n, data: self.data.iter().map(|z| z * c).collect() }
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch");
        CMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (a, b) = (self.n, other.n);
        let n = a * b;
        let mut out = CMatrix::zeros(n);
        for i in 0..a {
            for j in 0..a {
                let factor = self.data[i * a + j];
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for k in 0..b {
                    for l in 0..b {
                        out.data[(i * b + k) * n + (j * b + l)] = factor * other.data[k * b + l];
                    }
                }
            }
        }
        out
    }

    /// Maximum absolute column sum (induced 1-norm).
    pub fn one_norm(&self) -> f64 {
        let n = self.n;
        (0..n)
            .map(|j| (0..n).map(|i| self.data[i * n + j].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.n, other.n, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Matrix exponential by scaling and squaring with a Taylor series.
///
/// The argument is scaled by `2^-s` until its 1-norm is below 0.5, the
/// series is summed until terms vanish relative to machine precision, and
/// the result is squared `s` times back up.
pub fn matrix_exp(m: &CMatrix) -> CMatrix {
    let norm = m.one_norm();
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = m.scale(Complex64::new(1.0 / f64::powi(2.0, s as i32), 0.0));

    let mut result = CMatrix::identity(m.n);
    let mut term = CMatrix::identity(m.n);
    for k in 1..=60 {
        term = term.mul(&scaled).scale(Complex64::new(1.0 / k as f64, 0.0));
        result = result.add(&term);
        if term.one_norm() < 1e-18 {
            break;
        }
    }
    for _ in 0..s {
        result = result.mul(&result);
    }
    result
}

/// The diagonal cost Hamiltonian with `E(x) = -cut(x)` down the diagonal.
pub fn cost_hamiltonian(g: &WeightedGraph) -> CMatrix {
    let dim = 1usize << g.node_count();
    let mut m = CMatrix::zeros(dim);
    for x in 0..dim as u64 {
        m.set(x as usize, x as usize, Complex64::new(g.energy_of_index(x), 0.0));
    }
    m
}

/// The transverse-field driver Hamiltonian `Σ_k σ^x_k`.
pub fn driver_hamiltonian(n: usize) -> CMatrix {
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim);
    for x in 0..dim {
        for q in 0..n {
            m.set(x ^ (1 << q), x, Complex64::new(1.0, 0.0));
        }
    }
    m
}

/// The QAOA state built entirely from dense matrix exponentials:
/// alternating `exp(-i γ_l H_C)` and `exp(-i β_l H_D)` applied to the
/// uniform superposition.
pub fn qaoa_state_dense(g: &WeightedGraph, angles: &QaoaAngles) -> Result<Vec<Complex64>> {
    let n = g.node_count();
    if n > 12 {
        return Err(Error::CapacityExceeded { what: "dense qubits", requested: n, max: 12 });
    }
    let dim = 1usize << n;
    let amp = 1.0 / (dim as f64).sqrt();
    let mut v = vec![Complex64::new(amp, 0.0); dim];
    let hc = cost_hamiltonian(g);
    let hd = driver_hamiltonian(n);
    for l in 0..angles.p() {
        let ug = matrix_exp(&hc.scale(Complex64::new(0.0, -angles.gammas()[l])));
        let ub = matrix_exp(&hd.scale(Complex64::new(0.0, -angles.betas()[l])));
        v = ug.apply(&v);
        v = ub.apply(&v);
    }
    Ok(v)
}

/// The dense unitary of a single instruction on `n` qubits, built from its
/// action on each basis state (`MEASURE` contributes the identity).
pub fn instruction_unitary(n: usize, ins: &Instruction) -> CMatrix {
    let dim = 1usize << n;
    let mut m = CMatrix::zeros(dim);
    let sqrt_half = std::f64::consts::FRAC_1_SQRT_2;
    for col in 0..dim {
        match *ins {
            Instruction::H(q) => {
                let bit = (col >> q) & 1;
                let low = col & !(1 << q);
                let high = col | (1 << q);
                m.set(low, col, Complex64::new(sqrt_half, 0.0));
                let sign = if bit == 1 { -sqrt_half } else { sqrt_half };
                m.set(high, col, Complex64::new(sign, 0.0));
            }
            Instruction::X(q) => {
                m.set(col ^ (1 << q), col, Complex64::new(1.0, 0.0));
            }
            Instruction::Rz { theta, qubit } => {
                let half = theta / 2.0;
                let phase = if (col >> qubit) & 1 == 0 { -half } else { half };
                m.set(col, col, Complex64::from_polar(1.0, phase));
            }
            Instruction::Rx { theta, qubit } => {
                let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
                m.set(col, col, Complex64::new(c, 0.0));
                m.set(col ^ (1 << qubit), col, Complex64::new(0.0, -s));
            }
            Instruction::Cnot { control, target } => {
                let row = if (col >> control) & 1 == 1 { col ^ (1 << target) } else { col };
                m.set(row, col, Complex64::new(1.0, 0.0));
            }
            Instruction::Cz { a, b } => {
                let sign = if (col >> a) & 1 == 1 && (col >> b) & 1 == 1 { -1.0 } else { 1.0 };
                m.set(col, col, Complex64::new(sign, 0.0));
            }
            Instruction::Measure(_) => {
                m.set(col, col, Complex64::new(1.0, 0.0));
            }
        }
    }
    m
}

/// The dense unitary of a whole program (product of instruction unitaries
/// in program order).
pub fn program_unitary(p: &GateProgram) -> Result<CMatrix> {
    let n = p.n_qubits();
    if n > 12 {
        return Err(Error::CapacityExceeded { what: "dense qubits", requested: n, max: 12 });
    }
    let mut u = CMatrix::identity(1 << n);
    for ins in p.instructions() {
        u = instruction_unitary(n, ins).mul(&u);
    }
    Ok(u)
}

/// Sup-norm distance between two vectors after aligning global phase: the
/// phase is fixed at the largest-magnitude entry of `b`, then the largest
/// entrywise difference `|a_k - e^{iφ} b_k|` is returned.
pub fn global_phase_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len(), "dimension mismatch");
    let k = b
        .iter()
        .enumerate()
        .max_by(|(_, x), (_, y)| x.norm().total_cmp(&y.norm()))
        .map(|(k, _)| k)
        .expect("non-empty vectors");
    if b[k].norm() == 0.0 {
        return a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    let phase = (a[k] / b[k]).arg();
    let rot = Complex64::from_polar(1.0, phase);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - rot * y).norm())
        .fold(0.0, f64::max)
}

/// Sup-norm distance between two unitaries after aligning global phase.
pub fn unitary_phase_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    global_phase_distance(&a.data, &b.data)
}
