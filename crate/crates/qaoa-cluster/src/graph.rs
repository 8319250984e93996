//! Weighted graphs, cut costs, and exact Maxcut by enumeration.
//!
//! Conventions used throughout the crate:
//!
//! * A graph on `n` vertices has vertices `0..n`. Edges are undirected,
//!   stored with `i < j`, and carry a weight `w > 0`. A zero-weight edge
//!   is the same thing as an absent edge, so constructors drop them.
//! * An *assignment* (bipartition) is a [`BitString`]: bit `k` holds the
//!   side of vertex `k`. Basis-state integers use the same convention —
//!   bit `k` of the integer is vertex/qubit `k`.
//! * The cut cost of an assignment is the total weight of edges whose
//!   endpoints fall on different sides.
//! * The Ising energy of an assignment is `E(x) = -cut(x)`: one unit of
//!   energy per unit of cut weight, so maximizing the cut is minimizing
//!   the energy. Spins are `s_k = 1 - 2*b_k` (bit 0 ↦ spin +1).

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{split_rng, WEIGHT_STREAM};
use crate::par;

/// Hard cap for exhaustive Maxcut enumeration (2^28 assignments).
pub const BRUTE_FORCE_MAX_NODES: usize = 28;

/// A fixed-width string of bits; bit `k` is vertex/qubit `k`.
///
/// `Display` renders the conventional binary numeral, i.e. the *highest*
/// vertex leftmost, so the displayed string read as a binary number equals
/// [`BitString::index`].
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    value: u64,
    len: usize,
}

impl BitString {
    /// Builds the bit string whose packed integer form is `value`.
    pub fn from_index(value: u64, len: usize) -> Result<Self> {
        if len == 0 || len > 64 {
            return Err(Error::invalid(format!("bit string length {len} not in 1..=64")));
        }
        if len < 64 && value >> len != 0 {
            return Err(Error::invalid(format!(
                "index {value} does not fit in {len} bits"
            )));
        }
        Ok(BitString { value, len })
    }

    /// Builds from per-vertex bits (`bits[k]` is vertex `k`, each 0 or 1).
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.is_empty() || bits.len() > 64 {
            return Err(Error::invalid(format!(
                "bit string length {} not in 1..=64",
                bits.len()
            )));
        }
        let mut value = 0u64;
        for (k, &b) in bits.iter().enumerate() {
            match b {
                0 => {}
                1 => value |= 1 << k,
                other => {
                    return Err(Error::invalid(format!("bit value {other} at position {k}")));
                }
            }
        }
        Ok(BitString { value, len: bits.len() })
    }

    /// Parses a numeral-form string such as `"0101"` (leftmost char is the
    /// highest vertex, matching `Display`).
    pub fn parse(s: &str) -> Result<Self> {
        let mut bits: Vec<u8> = Vec::with_capacity(s.len());
        for c in s.chars().rev() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                other => return Err(Error::invalid(format!("invalid bit character {other:?}"))),
            }
        }
        Self::from_bits(&bits)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false // length 0 is rejected at construction
    }

    /// The packed integer form (bit `k` = vertex `k`).
    pub fn index(&self) -> u64 {
        self.value
    }

    /// Bit of vertex `k` (0 or 1).
    pub fn bit(&self, k: usize) -> u8 {
        debug_assert!(k < self.len);
        ((self.value >> k) & 1) as u8
    }

    /// Ising spin of vertex `k`: `+1` for bit 0, `-1` for bit 1.
    pub fn spin(&self, k: usize) -> i8 {
        1 - 2 * self.bit(k) as i8
    }

    /// All bits in vertex order.
    pub fn bits(&self) -> Vec<u8> {
        (0..self.len).map(|k| self.bit(k)).collect()
    }

    /// The bitwise complement (every vertex switches sides).
    pub fn complement(&self) -> BitString {
        let mask = if self.len == 64 { u64::MAX } else { (1 << self.len) - 1 };
        BitString { value: self.value ^ mask, len: self.len }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in (0..self.len).rev() {
            write!(f, "{}", self.bit(k))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

/// Total weight crossing a bipartition. Always in `[0, total edge weight]`.
#[derive(Clone, Copy, PartialEq, PartialOrd, Debug)]
pub struct CutValue(pub f64);

impl CutValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// An undirected weighted edge with `i < j` and `weight > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

/// An undirected graph with non-negative edge weights.
///
/// Edges are canonicalized at construction (`i < j`, sorted by `(i, j)`,
/// zero-weight edges dropped), so two graphs built from permutations of the
/// same edge list are identical — everything downstream (scheduling,
/// compilation, enumeration) inherits order independence from this.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    nodes: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    /// Validates and canonicalizes an edge list.
    ///
    /// Rejects: zero node count, endpoints out of range, self-loops,
    /// duplicate pairs (regardless of weight), and negative or non-finite
    /// weights. Zero-weight edges are accepted and dropped.
    pub fn new(node_count: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::InvalidGraph("node count must be at least 1".into()));
        }
        let mut canonical: Vec<Edge> = Vec::new();
        for (a, b, w) in edges {
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {a}")));
            }
            if a >= node_count || b >= node_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) out of range for {node_count} vertices"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "edge ({a}, {b}) has invalid weight {w}"
                )));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            canonical.push(Edge { i, j, weight: w });
        }
        canonical.sort_by_key(|e| (e.i, e.j));
        for pair in canonical.windows(2) {
            if pair[0].i == pair[1].i && pair[0].j == pair[1].j {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    pair[0].i, pair[0].j
                )));
            }
        }
        canonical.retain(|e| e.weight > 0.0);
        Ok(WeightedGraph { n: node_count, edges: canonical })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Sum of all edge weights (the ceiling of any cut value).
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.i == v || e.j == v).count()
    }

    pub fn max_degree(&self) -> usize {
        let mut deg = vec![0usize; self.n];
        for e in &self.edges {
            deg[e.i] += 1;
            deg[e.j] += 1;
        }
        deg.into_iter().max().unwrap_or(0)
    }

    /// True when every vertex is reachable from vertex 0.
    pub fn is_connected(&self) -> bool {
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Cut cost of `assignment`: total weight of edges with endpoints on
    /// different sides.
    pub fn cut_cost(&self, assignment: &BitString) -> Result<CutValue> {
        if assignment.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, got: assignment.len() });
        }
        Ok(CutValue(self.cut_of_index(assignment.index())))
    }

    /// Cut cost of the assignment packed as an integer (bit `k` = vertex `k`).
    ///
    /// This is the hot path behind energy tables and enumeration; it assumes
    /// `x` is in range.
    #[inline]
    pub fn cut_of_index(&self, x: u64) -> f64 {
        let mut cut = 0.0;
        for e in &self.edges {
            let diff = ((x >> e.i) ^ (x >> e.j)) & 1;
            if diff == 1 {
                cut += e.weight;
            }
        }
        cut
    }

    /// Ising energy `E(x) = -cut(x)` of `assignment`.
    pub fn ising_energy(&self, assignment: &BitString) -> Result<f64> {
        Ok(-self.cut_cost(assignment)?.0)
    }

    /// Ising energy of a packed assignment.
    #[inline]
    pub fn energy_of_index(&self, x: u64) -> f64 {
        -self.cut_of_index(x)
    }

    /// The same graph with every weight multiplied by `factor > 0`.
    ///
    /// Uniform rescaling preserves the Maxcut argmax and all normalized cut
    /// ratios; the solver uses it to precondition instances whose natural
    /// weight scale is far from 1.
    pub fn scaled(&self, factor: f64) -> Result<WeightedGraph> {
        if !factor.is_finite() || factor <= 0.0 {
            return Err(Error::invalid(format!("scale factor {factor} must be positive")));
        }
        Ok(WeightedGraph {
            n: self.n,
            edges: self
                .edges
                .iter()
                .map(|e| Edge { i: e.i, j: e.j, weight: e.weight * factor })
                .collect(),
        })
    }

    /// Largest edge weight, or 0 for an edgeless graph.
    pub fn max_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).fold(0.0, f64::max)
    }

    /// Serializes as `{"nodes": n, "edges": [[i, j, w], ...]}`.
    pub fn to_json_string(&self) -> String {
        let doc = GraphJson {
            nodes: self.n,
            edges: self.edges.iter().map(|e| (e.i, e.j, e.weight)).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("graph serialization cannot fail")
    }

    /// Parses and validates the JSON form produced by [`Self::to_json_string`].
    pub fn from_json_str(s: &str) -> Result<Self> {
        let doc: GraphJson = serde_json::from_str(s)?;
        WeightedGraph::new(doc.nodes, doc.edges)
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_json_string())?)
    }
}

/// Result of an exhaustive Maxcut enumeration.
#[derive(Clone, Debug)]
pub struct MaxcutEnumeration {
    /// The maximizing assignment with the smallest packed integer form.
    pub assignment: BitString,
    pub value: CutValue,
    /// Number of assignments attaining the maximum over the *full* space
    /// (a unique solution shows up as 2: the cut and its complement).
    pub optimal_count: u64,
}

/// Exact Maxcut for graphs of up to [`BRUTE_FORCE_MAX_NODES`] vertices.
///
/// Returns the optimal assignment (ties broken toward the smallest packed
/// integer) and its cut value.
pub fn brute_force_maxcut(g: &WeightedGraph) -> Result<(BitString, CutValue)> {
    let e = enumerate_maxcut(g)?;
    Ok((e.assignment, e.value))
}

/// Exhaustive Maxcut enumeration, also reporting how many assignments attain
/// the optimum.
///
/// Only assignments with vertex `n-1` on side 0 are enumerated — the
/// complement of a cut has the same value, and of any complement pair the
/// member with the top bit clear is the smaller integer, so the half-space
/// contains the canonical optimum. Counts are doubled to cover both halves.
pub fn enumerate_maxcut(g: &WeightedGraph) -> Result<MaxcutEnumeration> {
    let n = g.node_count();
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::CapacityExceeded {
            what: "brute-force maxcut",
            requested: n,
            max: BRUTE_FORCE_MAX_NODES,
        });
    }
    let half: u64 = 1 << (n - 1);

    // Fixed chunking (independent of thread count) keeps the merge exact and
    // deterministic: within a chunk the scan order is ascending, and chunk
    // results are merged in ascending order too.
    let chunk_len: u64 = (half / 512).max(1 << 12).min(half);
    let mut starts = Vec::new();
    let mut s = 0u64;
    while s < half {
        starts.push((s, (s + chunk_len).min(half)));
        s += chunk_len;
    }

    struct Partial {
        best: f64,
        arg: u64,
        count: u64,
    }

    let partials = par::map_items(starts, |(lo, hi)| {
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0u64;
        let mut count = 0u64;
        for x in lo..hi {
            let cut = g.cut_of_index(x);
            if cut > best {
                best = cut;
                arg = x;
                count = 1;
            } else if cut == best {
                count += 1;
            }
        }
        Partial { best, arg, count }
    });

    let mut best = f64::NEG_INFINITY;
    let mut arg = 0u64;
    let mut count = 0u64;
    for p in partials {
        if p.best > best {
            best = p.best;
            arg = p.arg;
            count = p.count;
        } else if p.best == best {
            count += p.count;
        }
    }

    Ok(MaxcutEnumeration {
        assignment: BitString::from_index(arg, n)?,
        value: CutValue(best),
        optimal_count: count * 2,
    })
}

/// Device qubit labels of the 19-qubit lattice, in vertex order.
///
/// The physical chip has sites 0..=19 with site 3 unusable; vertex `v` of
/// [`topology_19q`] is device qubit `DEVICE_QUBITS[v]`.
pub const DEVICE_QUBITS: [usize; 19] = [0, 1, 2, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19];

/// Coupled device-qubit pairs of the 19-qubit lattice (20 couplings).
pub const DEVICE_COUPLINGS: [(usize, usize); 20] = [
    (0, 5),
    (0, 6),
    (1, 6),
    (1, 7),
    (2, 8),
    (4, 9),
    (5, 10),
    (6, 11),
    (7, 12),
    (8, 13),
    (9, 14),
    (10, 15),
    (10, 16),
    (11, 16),
    (11, 17),
    (12, 17),
    (12, 18),
    (13, 18),
    (13, 19),
    (14, 19),
];

/// The 19-vertex hardware coupling graph with unit weights.
///
/// This is the qubit lattice the experiment harness targets by default: 19
/// usable qubits (device site 3 is defective and absent), 20 couplings,
/// maximum degree 3, connected. Device labels are compacted to contiguous
/// vertices via [`DEVICE_QUBITS`].
pub fn topology_19q() -> WeightedGraph {
    let vertex_of = |q: usize| if q < 3 { q } else { q - 1 };
    WeightedGraph::new(
        19,
        DEVICE_COUPLINGS
            .iter()
            .map(|&(a, b)| (vertex_of(a), vertex_of(b), 1.0)),
    )
    .expect("static topology is valid")
}

/// Replaces every edge weight with an independent uniform draw from `(0, 1]`.
///
/// Weights are drawn in canonical edge order from the dedicated weight
/// stream of `seed`, so the same seed always produces the same instance.
/// Draws are `1 - u` with `u` uniform in `[0, 1)`, keeping weights strictly
/// positive (a zero weight would mean "no edge").
pub fn random_weights(g: &WeightedGraph, seed: u64) -> WeightedGraph {
    use rand::Rng;
    let mut rng = split_rng(seed, WEIGHT_STREAM);
    let edges = g
        .edges
        .iter()
        .map(|e| (e.i, e.j, 1.0 - rng.gen::<f64>()))
        .collect::<Vec<_>>();
    WeightedGraph::new(g.n, edges).expect("reweighting preserves validity")
}
