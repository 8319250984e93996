//! Maxcut bi-clustering of datasets.
//!
//! Two dataset kinds are supported:
//!
//! * **Points** in `R^d`, compared by Euclidean distance. The complete
//!   distance-weighted graph is handed to Maxcut, so the optimal cut
//!   separates the two groups with the largest between-group spread —
//!   same-cluster points sit close together.
//! * **Uniform box distributions** in the plane, compared by the
//!   Bhattacharyya coefficient `b(p, q) = ∫ √(p·q)`. Here edges carry
//!   *overlap*, not distance: Maxcut maximizes between-group overlap,
//!   which drives each cluster toward members that overlap each other as
//!   little as possible (ideally not at all). That is the inverse of the
//!   distance semantics, and intentional: it groups distributions that are
//!   mutually distinguishable.
//!
//! Labels are binary and defined up to a global flip: complementing every
//! label leaves the cut, and hence the clustering, unchanged.

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{brute_force_maxcut, BitString, WeightedGraph};
use crate::rng::ChaCha8Rng;
use crate::solver::{solve_instance, RunTrace, SolveConfig};

/// Grid resolution (per axis) for numeric Bhattacharyya integration.
const BHATTACHARYYA_GRID: usize = 200;

/// Edges are created for overlaps above this coefficient.
const OVERLAP_THRESHOLD: f64 = 1e-9;

/// A uniform probability distribution over an axis-aligned rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxDistribution {
    pub center: [f64; 2],
    /// Full side lengths (width, height).
    pub size: [f64; 2],
}

impl BoxDistribution {
    pub fn new(center: [f64; 2], size: [f64; 2]) -> Result<Self> {
        let b = BoxDistribution { center, size };
        b.validate()?;
        Ok(b)
    }

    fn validate(&self) -> Result<()> {
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("box center must be finite"));
        }
        if self.size.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::invalid(format!(
                "box size {:?} must be positive and finite",
                self.size
            )));
        }
        Ok(())
    }

    pub fn area(&self) -> f64 {
        self.size[0] * self.size[1]
    }

    pub fn min_corner(&self) -> [f64; 2] {
        [self.center[0] - self.size[0] / 2.0, self.center[1] - self.size[1] / 2.0]
    }

    pub fn max_corner(&self) -> [f64; 2] {
        [self.center[0] + self.size[0] / 2.0, self.center[1] + self.size[1] / 2.0]
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        let lo = self.min_corner();
        let hi = self.max_corner();
        x >= lo[0] && x <= hi[0] && y >= lo[1] && y <= hi[1]
    }

    /// Probability density at a point (`1/area` inside, 0 outside).
    pub fn density(&self, x: f64, y: f64) -> f64 {
        if self.contains(x, y) {
            1.0 / self.area()
        } else {
            0.0
        }
    }
}

/// The two dataset kinds the clusterer accepts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "lowercase", deny_unknown_fields)]
pub enum Dataset {
    /// Points in `R^d`, one coordinate vector per element.
    Points(Vec<Vec<f64>>),
    /// Uniform box distributions in the plane.
    Boxes(Vec<BoxDistribution>),
}

impl Dataset {
    pub fn len(&self) -> usize {
        match self {
            Dataset::Points(p) => p.len(),
            Dataset::Boxes(b) => b.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Dataset::Points(points) => {
                if points.len() < 2 {
                    return Err(Error::invalid("need at least two points to cluster"));
                }
                let dim = points[0].len();
                if dim == 0 {
                    return Err(Error::invalid("points need at least one coordinate"));
                }
                for (i, p) in points.iter().enumerate() {
                    if p.len() != dim {
                        return Err(Error::invalid(format!(
                            "point {i} has {} coordinates, expected {dim}",
                            p.len()
                        )));
                    }
                    if p.iter().any(|c| !c.is_finite()) {
                        return Err(Error::invalid(format!("point {i} has a non-finite coordinate")));
                    }
                }
                Ok(())
            }
            Dataset::Boxes(boxes) => {
                if boxes.len() < 2 {
                    return Err(Error::invalid("need at least two boxes to cluster"));
                }
                for b in boxes {
                    b.validate()?;
                }
                Ok(())
            }
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let d: Dataset = serde_json::from_str(text)?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn read_json(path: &std::path::Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json_string()?)?)
    }
}

/// Pairwise Euclidean distances.
pub fn euclidean_distance_matrix(points: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    Dataset::Points(points.to_vec()).validate()?;
    let n = points.len();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = points[i]
                .iter()
                .zip(&points[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            m[i][j] = d;
            m[j][i] = d;
        }
    }
    Ok(m)
}

/// The complete graph over points with Euclidean distances as weights.
/// Coincident points (distance zero) simply contribute no edge.
pub fn distance_graph(points: &[Vec<f64>]) -> Result<WeightedGraph> {
    let m = euclidean_distance_matrix(points)?;
    let n = points.len();
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for (i, row) in m.iter().enumerate() {
        for (j, &w) in row.iter().enumerate().skip(i + 1) {
            edges.push((i, j, w));
        }
    }
    WeightedGraph::new(n, edges)
}

/// Bhattacharyya coefficient `∫√(p·q)` of two box distributions: midpoint
/// quadrature on a 200×200 grid over the pair's bounding box, with each
/// cell clipped against both supports. Clipping removes the O(cell-width)
/// error a plain midpoint rule commits along support edges; since box
/// densities are constant on their support, the clipped rule is exact.
///
/// For uniform boxes the integrand is constant on the intersection, so the
/// coefficient equals `area(p ∩ q) / √(area(p)·area(q))` — handy as an
/// analytic cross-check.
pub fn bhattacharyya_coefficient(p: &BoxDistribution, q: &BoxDistribution) -> Result<f64> {
    p.validate()?;
    q.validate()?;
    let lo = [
        p.min_corner()[0].min(q.min_corner()[0]),
        p.min_corner()[1].min(q.min_corner()[1]),
    ];
    let hi = [
        p.max_corner()[0].max(q.max_corner()[0]),
        p.max_corner()[1].max(q.max_corner()[1]),
    ];
    // The integrand vanishes outside the support intersection.
    let clip_lo = [
        p.min_corner()[0].max(q.min_corner()[0]),
        p.min_corner()[1].max(q.min_corner()[1]),
    ];
    let clip_hi = [
        p.max_corner()[0].min(q.max_corner()[0]),
        p.max_corner()[1].min(q.max_corner()[1]),
    ];
    let nx = BHATTACHARYYA_GRID;
    let ny = BHATTACHARYYA_GRID;
    let dx = (hi[0] - lo[0]) / nx as f64;
    let dy = (hi[1] - lo[1]) / ny as f64;
    let mut total = 0.0;
    for ix in 0..nx {
        let x0 = (lo[0] + ix as f64 * dx).max(clip_lo[0]);
        let x1 = (lo[0] + (ix + 1) as f64 * dx).min(clip_hi[0]);
        if x1 <= x0 {
            continue;
        }
        for iy in 0..ny {
            let y0 = (lo[1] + iy as f64 * dy).max(clip_lo[1]);
            let y1 = (lo[1] + (iy + 1) as f64 * dy).min(clip_hi[1]);
            if y1 <= y0 {
                continue;
            }
            let (cx, cy) = ((x0 + x1) / 2.0, (y0 + y1) / 2.0);
            total += (p.density(cx, cy) * q.density(cx, cy)).sqrt() * (x1 - x0) * (y1 - y0);
        }
    }
    Ok(total.min(1.0))
}

/// The overlap graph of a box dataset: an edge wherever the Bhattacharyya
/// coefficient is positive, weighted by it. Mutually disjoint boxes give
/// an empty edge set.
pub fn overlap_graph(boxes: &[BoxDistribution]) -> Result<WeightedGraph> {
    Dataset::Boxes(boxes.to_vec()).validate()?;
    let n = boxes.len();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let b = bhattacharyya_coefficient(&boxes[i], &boxes[j])?;
            if b > OVERLAP_THRESHOLD {
                edges.push((i, j, b));
            }
        }
    }
    WeightedGraph::new(n, edges)
}

/// Builds the clustering graph appropriate for the dataset kind.
pub fn dataset_graph(d: &Dataset) -> Result<WeightedGraph> {
    match d {
        Dataset::Points(points) => distance_graph(points),
        Dataset::Boxes(boxes) => overlap_graph(boxes),
    }
}

/// Binary cluster labels, one per dataset element, defined up to a global
/// flip.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelAssignment {
    pub labels: Vec<u8>,
}

impl LabelAssignment {
    pub fn new(labels: Vec<u8>) -> Result<Self> {
        if labels.iter().any(|&l| l > 1) {
            return Err(Error::invalid("labels must be 0 or 1"));
        }
        Ok(LabelAssignment { labels })
    }

    /// Label `k` is bit `k` of the cut assignment.
    pub fn from_bitstring(b: &BitString) -> Self {
        LabelAssignment { labels: b.bits() }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn flipped(&self) -> Self {
        LabelAssignment { labels: self.labels.iter().map(|l| 1 - l).collect() }
    }

    /// Equality in the clustering sense: exact or globally flipped.
    pub fn matches_up_to_flip(&self, other: &LabelAssignment) -> bool {
        self == other || *self == other.flipped()
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let l: LabelAssignment = serde_json::from_str(text)?;
        LabelAssignment::new(l.labels)
    }

    pub fn to_json_string(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_json_string()?)?)
    }

    pub fn read_json(path: &std::path::Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// Which Maxcut solver backs the clustering.
#[derive(Clone, Debug)]
pub enum ClusterSolver {
    /// Exact enumeration (up to the brute-force node cap).
    BruteForce,
    /// Simulated QAOA with GP-UCB angle search.
    Qaoa(SolveConfig),
}

/// A completed clustering.
#[derive(Clone, Debug)]
pub struct ClusterOutcome {
    pub labels: LabelAssignment,
    pub assignment: BitString,
    /// Cut value attained by the reported labels.
    pub cut_value: f64,
    /// The graph that was cut.
    pub graph: WeightedGraph,
    /// Optimization record when the QAOA solver ran.
    pub trace: Option<RunTrace>,
}

/// Splits a dataset into two clusters by solving Maxcut on its graph.
/// `rng` drives the QAOA solver and is untouched by the brute-force path.
pub fn bicluster(
    d: &Dataset,
    solver: &ClusterSolver,
    rng: &mut ChaCha8Rng,
) -> Result<ClusterOutcome> {
    d.validate()?;
    let graph = dataset_graph(d)?;
    match solver {
        ClusterSolver::BruteForce => {
            let (assignment, value) = brute_force_maxcut(&graph)?;
            Ok(ClusterOutcome {
                labels: LabelAssignment::from_bitstring(&assignment),
                assignment,
                cut_value: value.value(),
                graph,
                trace: None,
            })
        }
        ClusterSolver::Qaoa(config) => {
            let trace = solve_instance(&graph, config, rng)?;
            let assignment = trace.best_assignment.clone().ok_or_else(|| {
                Error::invalid(format!(
                    "QAOA solver produced no samples{}",
                    trace
                        .failure
                        .as_deref()
                        .map(|f| format!(" ({f})"))
                        .unwrap_or_default()
                ))
            })?;
            Ok(ClusterOutcome {
                labels: LabelAssignment::from_bitstring(&assignment),
                cut_value: graph.cut_cost(&assignment)?.value(),
                assignment,
                graph,
                trace: Some(trace),
            })
        }
    }
}

/// Two seeded Gaussian point clouds of `per_cloud` points each, centered
/// at the origin and at `(separation, 0)` with isotropic deviation `sigma`.
/// Elements `0..per_cloud` belong to the first cloud.
pub fn two_gaussian_clouds(
    per_cloud: usize,
    separation: f64,
    sigma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<Vec<f64>>> {
    if per_cloud == 0 {
        return Err(Error::invalid("clouds need at least one point each"));
    }
    if !(separation.is_finite() && sigma.is_finite() && sigma > 0.0) {
        return Err(Error::invalid("separation and sigma must be finite, sigma positive"));
    }
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::invalid(format!("invalid normal distribution: {e}")))?;
    let mut points = Vec::with_capacity(2 * per_cloud);
    for cloud in 0..2 {
        let cx = separation * cloud as f64;
        for _ in 0..per_cloud {
            let x = cx + normal.sample(rng);
            let y = normal.sample(rng);
            points.push(vec![x, y]);
        }
    }
    Ok(points)
}

/// Ground-truth labels for [`two_gaussian_clouds`] output.
pub fn cloud_ground_truth(per_cloud: usize) -> LabelAssignment {
    LabelAssignment {
        labels: (0..2 * per_cloud).map(|i| u8::from(i >= per_cloud)).collect(),
    }
}
