//! Compilation of QAOA circuits to two-qubit gate programs.
//!
//! The cost layer `exp(-i γ H_C)` factorizes over edges; each edge `(i, j)`
//! with weight `w` lowers to the three-gate sequence
//!
//! ```text
//! CNOT i j ; RZ(γ·w) j ; CNOT i j
//! ```
//!
//! which equals `exp(-i (γw/2) σ^z_i σ^z_j)` — exactly the per-edge factor
//! of `exp(-i γ H_C)` under the energy convention `E(x) = -cut(x)`, up to a
//! global phase per edge. The equivalence contract is checked against the
//! dense matrix-exponential oracle, not derived by symbol pushing. In the
//! `cz` basis each CNOT expands as `H target ; CZ ; H target`.
//!
//! Edges are first greedily colored into *rounds* of vertex-disjoint pairs
//! (first-fit in canonical edge order), so every edge in a round can run
//! concurrently on hardware. A first-fit round assignment never needs more
//! than `2Δ - 1` rounds for maximum degree `Δ`, and each scheduling round
//! contributes exactly two two-qubit rounds (the two CNOT/CZ halves of its
//! edges), giving a two-qubit-gate depth of `2 × rounds`.
//!
//! Programs serialize to a line-oriented text format (see
//! `PROGRAM_FORMAT.md` at the repository root) and round-trip exactly.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{BitString, WeightedGraph};
use crate::sim::{NoiseModel, QaoaAngles, StateVector};

/// Which two-qubit primitive the hardware offers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    Cnot,
    Cz,
}

impl std::str::FromStr for Basis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cnot" => Ok(Basis::Cnot),
            "cz" => Ok(Basis::Cz),
            other => Err(Error::invalid(format!("unknown basis {other:?} (expected cnot or cz)"))),
        }
    }
}

/// One gate (or terminal measurement) acting on named qubits.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Instruction {
    H(usize),
    X(usize),
    Rz { theta: f64, qubit: usize },
    Rx { theta: f64, qubit: usize },
    Cnot { control: usize, target: usize },
    Cz { a: usize, b: usize },
    Measure(usize),
}

impl Instruction {
    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Instruction::Cnot { .. } | Instruction::Cz { .. })
    }

    /// The qubits this instruction touches (one or two).
    pub fn qubits(&self) -> (usize, Option<usize>) {
        match *self {
            Instruction::H(q) | Instruction::X(q) | Instruction::Measure(q) => (q, None),
            Instruction::Rz { qubit, .. } | Instruction::Rx { qubit, .. } => (qubit, None),
            Instruction::Cnot { control, target } => (control, Some(target)),
            Instruction::Cz { a, b } => (a, Some(b)),
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Instruction::H(q) => write!(f, "H {q}"),
            Instruction::X(q) => write!(f, "X {q}"),
            Instruction::Rz { theta, qubit } => write!(f, "RZ({theta}) {qubit}"),
            Instruction::Rx { theta, qubit } => write!(f, "RX({theta}) {qubit}"),
            Instruction::Cnot { control, target } => write!(f, "CNOT {control} {target}"),
            Instruction::Cz { a, b } => write!(f, "CZ {a} {b}"),
            Instruction::Measure(q) => write!(f, "MEASURE {q}"),
        }
    }
}

/// A straight-line gate program over `n_qubits` qubits.
///
/// `round_markers` records the parallel-round structure of the two-qubit
/// gates: marker `k` is the offset (into the sequence of two-qubit gates,
/// in program order) where round `k` begins. Markers are an annotation —
/// removing single-qubit gates never invalidates them — and within one
/// round no qubit may appear in two two-qubit gates.
#[derive(Clone, Debug, PartialEq)]
pub struct GateProgram {
    n_qubits: usize,
    instructions: Vec<Instruction>,
    round_markers: Vec<usize>,
}

impl GateProgram {
    pub fn new(
        n_qubits: usize,
        instructions: Vec<Instruction>,
        round_markers: Vec<usize>,
    ) -> Result<Self> {
        if n_qubits == 0 {
            return Err(Error::invalid("program needs at least one qubit"));
        }
        for ins in &instructions {
            let (a, b) = ins.qubits();
            if a >= n_qubits || b.is_some_and(|b| b >= n_qubits) {
                return Err(Error::invalid(format!(
                    "instruction {ins} out of range for {n_qubits} qubits"
                )));
            }
            if b == Some(a) {
                return Err(Error::invalid(format!("instruction {ins} repeats a qubit")));
            }
            match *ins {
                Instruction::Rz { theta, .. } | Instruction::Rx { theta, .. }
                    if !theta.is_finite() =>
                {
                    return Err(Error::invalid(format!("non-finite angle in {ins}")));
                }
                _ => {}
            }
        }
        let program = GateProgram { n_qubits, instructions, round_markers };
        program.validate_rounds()?;
        Ok(program)
    }

    fn validate_rounds(&self) -> Result<()> {
        if self.round_markers.is_empty() {
            return Ok(());
        }
        let total = self.two_qubit_count();
        if self.round_markers[0] != 0 {
            return Err(Error::invalid("first round marker must start at offset 0"));
        }
        for w in self.round_markers.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::invalid("round markers must be strictly increasing"));
            }
        }
        if *self.round_markers.last().unwrap() >= total {
            return Err(Error::invalid(format!(
                "round marker beyond the {total} two-qubit gates"
            )));
        }
        // Vertex-disjointness within each round.
        let twoq: Vec<(usize, usize)> = self
            .instructions
            .iter()
            .filter(|i| i.is_two_qubit())
            .map(|i| {
                let (a, b) = i.qubits();
                (a, b.unwrap())
            })
            .collect();
        let mut bounds = self.round_markers.clone();
        bounds.push(total);
        for (k, pair) in bounds.windows(2).enumerate() {
            let mut busy = vec![false; self.n_qubits];
            for &(a, b) in &twoq[pair[0]..pair[1]] {
                if busy[a] || busy[b] {
                    return Err(Error::invalid(format!(
                        "round {k} uses qubit {} twice",
                        if busy[a] { a } else { b }
                    )));
                }
                busy[a] = true;
                busy[b] = true;
            }
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn round_markers(&self) -> &[usize] {
        &self.round_markers
    }

    pub fn two_qubit_count(&self) -> usize {
        self.instructions.iter().filter(|i| i.is_two_qubit()).count()
    }

    /// Two-qubit-gate depth under per-qubit availability scheduling:
    /// single-qubit gates are free, and each two-qubit gate starts one tick
    /// after both its qubits are last busy.
    pub fn two_qubit_depth(&self) -> usize {
        let mut avail = vec![0usize; self.n_qubits];
        let mut depth = 0;
        for ins in &self.instructions {
            if let (a, Some(b)) = ins.qubits() {
                let d = avail[a].max(avail[b]) + 1;
                avail[a] = d;
                avail[b] = d;
                depth = depth.max(d);
            }
        }
        depth
    }
}

/// Vertex-disjoint rounds of edges, in scheduling order.
#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    rounds: Vec<Vec<(usize, usize)>>,
}

impl Schedule {
    pub fn rounds(&self) -> &[Vec<(usize, usize)>] {
        &self.rounds
    }

    pub fn round_count(&self) -> usize {
        self.rounds.len()
    }
}

/// Greedy first-fit edge coloring in canonical edge order.
///
/// Every round is vertex-disjoint, every edge appears exactly once, and the
/// round count never exceeds `2Δ - 1` (first-fit: an edge only opens a new
/// round when each existing round already touches one of its endpoints, and
/// at most `2(Δ-1)` rounds can).
pub fn schedule_edges(g: &WeightedGraph) -> Schedule {
    let mut rounds: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut busy: Vec<Vec<bool>> = Vec::new();
    for e in g.edges() {
        let slot = (0..rounds.len()).find(|&r| !busy[r][e.i] && !busy[r][e.j]);
        let r = match slot {
            Some(r) => r,
            None => {
                rounds.push(Vec::new());
                busy.push(vec![false; g.node_count()]);
                rounds.len() - 1
            }
        };
        rounds[r].push((e.i, e.j));
        busy[r][e.i] = true;
        busy[r][e.j] = true;
    }
    Schedule { rounds }
}

fn edge_weight_map(g: &WeightedGraph) -> HashMap<(usize, usize), f64> {
    g.edges().iter().map(|e| ((e.i, e.j), e.weight)).collect()
}

/// Appends one cost layer for `g` at angle `gamma` onto `instructions`,
/// extending `markers` with the layer's two-qubit rounds. `twoq_so_far`
/// counts two-qubit gates already present.
fn push_cost_layer(
    g: &WeightedGraph,
    gamma: f64,
    basis: Basis,
    schedule: &Schedule,
    instructions: &mut Vec<Instruction>,
    markers: &mut Vec<usize>,
    twoq_so_far: &mut usize,
) {
    let weights = edge_weight_map(g);
    for round in schedule.rounds() {
        // First interaction half: mark a fresh two-qubit round.
        if basis == Basis::Cz {
            for &(_, j) in round {
                instructions.push(Instruction::H(j));
            }
        }
        markers.push(*twoq_so_far);
        for &(i, j) in round {
            match basis {
                Basis::Cnot => instructions.push(Instruction::Cnot { control: i, target: j }),
                Basis::Cz => instructions.push(Instruction::Cz { a: i, b: j }),
            }
        }
        *twoq_so_far += round.len();
        if basis == Basis::Cz {
            for &(_, j) in round {
                instructions.push(Instruction::H(j));
            }
        }
        // The conjugated rotation: RZ(γ·w) on each target.
        for &(i, j) in round {
            let theta = gamma * weights[&(i, j)];
            instructions.push(Instruction::Rz { theta, qubit: j });
        }
        // Second interaction half: another two-qubit round.
        if basis == Basis::Cz {
            for &(_, j) in round {
                instructions.push(Instruction::H(j));
            }
        }
        markers.push(*twoq_so_far);
        for &(i, j) in round {
            match basis {
                Basis::Cnot => instructions.push(Instruction::Cnot { control: i, target: j }),
                Basis::Cz => instructions.push(Instruction::Cz { a: i, b: j }),
            }
        }
        *twoq_so_far += round.len();
        if basis == Basis::Cz {
            for &(_, j) in round {
                instructions.push(Instruction::H(j));
            }
        }
    }
}

/// Compiles one cost layer `exp(-i γ H_C)` (no state preparation, no
/// measurement, no single-qubit fusion).
pub fn compile_cost_layer(g: &WeightedGraph, gamma: f64, basis: Basis) -> Result<GateProgram> {
    if !gamma.is_finite() {
        return Err(Error::invalid(format!("cost angle {gamma} is not finite")));
    }
    let schedule = schedule_edges(g);
    let mut instructions = Vec::new();
    let mut markers = Vec::new();
    let mut twoq = 0;
    push_cost_layer(g, gamma, basis, &schedule, &mut instructions, &mut markers, &mut twoq);
    GateProgram::new(g.node_count(), instructions, markers)
}

/// Compiles the full `p`-layer QAOA circuit: Hadamard preparation, `p`
/// alternating cost/driver layers, and terminal measurements, with adjacent
/// single-qubit gates fused.
pub fn compile_qaoa(g: &WeightedGraph, angles: &QaoaAngles, basis: Basis) -> Result<GateProgram> {
    let n = g.node_count();
    let schedule = schedule_edges(g);
    let mut instructions: Vec<Instruction> = (0..n).map(Instruction::H).collect();
    let mut markers = Vec::new();
    let mut twoq = 0;
    for l in 0..angles.p() {
        push_cost_layer(
            g,
            angles.gammas()[l],
            basis,
            &schedule,
            &mut instructions,
            &mut markers,
            &mut twoq,
        );
        let theta = 2.0 * angles.betas()[l];
        for q in 0..n {
            instructions.push(Instruction::Rx { theta, qubit: q });
        }
    }
    for q in 0..n {
        instructions.push(Instruction::Measure(q));
    }
    let fused = fuse_adjacent_single_qubit(instructions);
    GateProgram::new(n, fused, markers)
}

/// One peephole pass over an instruction list: adjacent `H q ; H q` pairs
/// cancel and adjacent `RZ(a) q ; RZ(b) q` pairs merge into `RZ(a+b) q`.
/// Anything beyond strictly-adjacent fusion is out of scope.
fn fuse_adjacent_single_qubit(instructions: Vec<Instruction>) -> Vec<Instruction> {
    let mut out: Vec<Instruction> = Vec::with_capacity(instructions.len());
    for ins in instructions {
        match (out.last().copied(), ins) {
            (Some(Instruction::H(a)), Instruction::H(b)) if a == b => {
                out.pop();
            }
            (Some(Instruction::Rz { theta: t1, qubit: q1 }), Instruction::Rz { theta: t2, qubit: q2 })
                if q1 == q2 =>
            {
                out.pop();
                out.push(Instruction::Rz { theta: t1 + t2, qubit: q1 });
            }
            _ => out.push(ins),
        }
    }
    out
}

/// Applies the peephole fusion pass to a whole program. Round markers are
/// offsets into the two-qubit gate sequence, which fusion never touches, so
/// they carry over unchanged.
pub fn fuse_single_qubit_gates(p: &GateProgram) -> GateProgram {
    GateProgram {
        n_qubits: p.n_qubits,
        instructions: fuse_adjacent_single_qubit(p.instructions.clone()),
        round_markers: p.round_markers.clone(),
    }
}

/// Serializes to the canonical text form: a `# qubits N` header, one
/// instruction per line, and `# round k` comments before each two-qubit
/// round. Angles print with shortest round-trip formatting (at least 7
/// significant digits, exact on reparse).
pub fn emit_program(p: &GateProgram) -> String {
    let mut out = format!("# qubits {}\n", p.n_qubits);
    let mut twoq = 0usize;
    let mut next_marker = 0usize;
    for ins in &p.instructions {
        if ins.is_two_qubit() {
            if next_marker < p.round_markers.len() && p.round_markers[next_marker] == twoq {
                out.push_str(&format!("# round {next_marker}\n"));
                next_marker += 1;
            }
            twoq += 1;
        }
        out.push_str(&format!("{ins}\n"));
    }
    out
}

/// Parses an angle token: a decimal literal or a `pi` multiple
/// (`pi`, `-pi/2`, `0.5*pi`, `3*pi/4`, ...).
fn parse_angle(token: &str) -> Option<f64> {
    let t = token.trim();
    let (sign, t) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.strip_prefix('+').unwrap_or(t)),
    };
    if t.is_empty() {
        return None;
    }
    let value = if let Some(frac) = t.strip_prefix("pi") {
        let base = std::f64::consts::PI;
        if frac.is_empty() {
            base
        } else {
            let d: f64 = frac.strip_prefix('/')?.trim().parse().ok()?;
            base / d
        }
    } else if let Some((coef, rest)) = t.split_once('*') {
        let c: f64 = coef.trim().parse().ok()?;
        let rest = rest.trim();
        let tail = rest.strip_prefix("pi")?;
        let base = std::f64::consts::PI;
        if tail.is_empty() {
            c * base
        } else {
            let d: f64 = tail.strip_prefix('/')?.trim().parse().ok()?;
            c * base / d
        }
    } else {
        t.parse().ok()?
    };
    Some(sign * value).filter(|v| v.is_finite())
}

/// Parses the canonical text form. Errors carry 1-based line numbers.
///
/// A `# qubits N` header is honored when present (instruction qubits are
/// then range-checked against it); otherwise the width is inferred as the
/// highest qubit index plus one.
pub fn parse_program(text: &str) -> Result<GateProgram> {
    let mut declared: Option<usize> = None;
    let mut instructions: Vec<Instruction> = Vec::new();
    let mut markers: Vec<usize> = Vec::new();
    let mut twoq = 0usize;

    let err = |line: usize, message: String| Error::Parse { line, message };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(rest) = comment.strip_prefix("qubits") {
                if declared.is_some() {
                    return Err(err(lineno, "duplicate qubits header".into()));
                }
                let n: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| err(lineno, format!("invalid qubit count {:?}", rest.trim())))?;
                if n == 0 {
                    return Err(err(lineno, "qubit count must be at least 1".into()));
                }
                declared = Some(n);
            } else if let Some(rest) = comment.strip_prefix("round") {
                let k: usize = rest
                    .trim()
                    .parse()
                    .map_err(|_| err(lineno, format!("invalid round index {:?}", rest.trim())))?;
                if k != markers.len() {
                    return Err(err(
                        lineno,
                        format!("round {k} out of sequence (expected {})", markers.len()),
                    ));
                }
                markers.push(twoq);
            }
            // Any other # line is a plain comment.
            continue;
        }

        let mut tokens = line.split_whitespace();
        let head = tokens.next().expect("non-empty line has a first token");
        let rest: Vec<&str> = tokens.collect();

        let parse_qubit = |tok: &str| -> Result<usize> {
            tok.parse::<usize>()
                .map_err(|_| err(lineno, format!("invalid qubit index {tok:?}")))
        };
        let expect_arity = |n: usize| -> Result<()> {
            if rest.len() != n {
                return Err(err(
                    lineno,
                    format!("{head} expects {n} operand(s), got {}", rest.len()),
                ));
            }
            Ok(())
        };

        let ins = if let Some(args) = head.strip_prefix("RZ(").and_then(|s| s.strip_suffix(')')) {
            expect_arity(1)?;
            let theta = parse_angle(args)
                .ok_or_else(|| err(lineno, format!("invalid angle {args:?}")))?;
            Instruction::Rz { theta, qubit: parse_qubit(rest[0])? }
        } else if let Some(args) = head.strip_prefix("RX(").and_then(|s| s.strip_suffix(')')) {
            expect_arity(1)?;
            let theta = parse_angle(args)
                .ok_or_else(|| err(lineno, format!("invalid angle {args:?}")))?;
            Instruction::Rx { theta, qubit: parse_qubit(rest[0])? }
        } else {
            match head {
                "H" => {
                    expect_arity(1)?;
                    Instruction::H(parse_qubit(rest[0])?)
                }
                "X" => {
                    expect_arity(1)?;
                    Instruction::X(parse_qubit(rest[0])?)
                }
                "MEASURE" => {
                    expect_arity(1)?;
                    Instruction::Measure(parse_qubit(rest[0])?)
                }
                "CNOT" => {
                    expect_arity(2)?;
                    Instruction::Cnot { control: parse_qubit(rest[0])?, target: parse_qubit(rest[1])? }
                }
                "CZ" => {
                    expect_arity(2)?;
                    Instruction::Cz { a: parse_qubit(rest[0])?, b: parse_qubit(rest[1])? }
                }
                other => return Err(err(lineno, format!("unknown instruction {other:?}"))),
            }
        };

        if let Some(n) = declared {
            let (a, b) = ins.qubits();
            if a >= n || b.is_some_and(|b| b >= n) {
                return Err(err(lineno, format!("qubit out of range for {n} declared qubits")));
            }
        }
        if ins.is_two_qubit() {
            twoq += 1;
        }
        instructions.push(ins);
    }

    let n_qubits = match declared {
        Some(n) => n,
        None => {
            let max = instructions
                .iter()
                .map(|i| {
                    let (a, b) = i.qubits();
                    a.max(b.unwrap_or(0))
                })
                .max()
                .ok_or_else(|| err(1, "empty program".into()))?;
            max + 1
        }
    };
    GateProgram::new(n_qubits, instructions, markers)
}

/// Runs the program on `|0…0⟩` and returns the final state. `MEASURE`
/// instructions are terminal annotations and do not collapse the state.
pub fn execute_program(p: &GateProgram) -> Result<StateVector> {
    let mut state = StateVector::zero_state(p.n_qubits)?;
    for ins in &p.instructions {
        apply_instruction(&mut state, ins)?;
    }
    Ok(state)
}

fn apply_instruction(state: &mut StateVector, ins: &Instruction) -> Result<()> {
    match *ins {
        Instruction::H(q) => state.apply_h(q),
        Instruction::X(q) => state.apply_x(q),
        Instruction::Rz { theta, qubit } => state.apply_rz(qubit, theta),
        Instruction::Rx { theta, qubit } => state.apply_rx(qubit, theta),
        Instruction::Cnot { control, target } => state.apply_cnot(control, target),
        Instruction::Cz { a, b } => state.apply_cz(a, b),
        Instruction::Measure(_) => Ok(()),
    }
}

/// Samples measurement outcomes from a program.
///
/// Without two-qubit depolarizing noise the program executes once exactly
/// and shots are drawn from the final state (readout noise applied per
/// shot). With `depolarizing_2q > 0` each shot simulates its own trajectory:
/// after every two-qubit gate, with that probability a uniformly random
/// non-identity two-qubit Pauli is applied to the gate's qubits. Trajectory
/// randomness, the measurement draw, and readout flips all come from one
/// seeded generator in program order, so results are reproducible.
pub fn sample_program(
    p: &GateProgram,
    n_shots: usize,
    seed: u64,
    noise: Option<&NoiseModel>,
) -> Result<Vec<BitString>> {
    let dep = noise.map_or(0.0, |m| m.depolarizing_2q());
    if dep == 0.0 {
        return execute_program(p)?.sample_bitstrings(n_shots, seed, noise);
    }

    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_shots);
    for _ in 0..n_shots {
        let mut state = StateVector::zero_state(p.n_qubits)?;
        for ins in &p.instructions {
            apply_instruction(&mut state, ins)?;
            if ins.is_two_qubit() && rng.gen::<f64>() < dep {
                let (a, b) = ins.qubits();
                let b = b.expect("two-qubit instruction");
                // One of the 15 non-identity two-qubit Paulis, uniformly.
                let choice = rng.gen_range(1..16u8);
                for (q, pauli) in [(a, choice & 3), (b, (choice >> 2) & 3)] {
                    match pauli {
                        0 => {}
                        1 => state.apply_x(q)?,
                        2 => state.apply_y(q)?,
                        3 => state.apply_z(q)?,
                        _ => unreachable!(),
                    }
                }
            }
        }
        let shot_seed = rng.gen::<u64>();
        out.push(state.sample_bitstrings(1, shot_seed, noise)?.remove(0));
    }
    Ok(out)
}
