//! Domain values shared by every stage of the pipeline.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::error::{Error, Result};

/// A finite sample of ℝⁿ together with its declared noise bound ε.
///
/// Coordinates are stored row-major in one flat buffer.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
    epsilon: f64,
}

impl PointCloud {
    /// Builds a cloud, rejecting anything [`validate_cloud`] marks as an error.
    pub fn new(points: Vec<Vec<f64>>, epsilon: f64) -> Result<Self> {
        let report = validate_cloud(&points, epsilon);
        if !report.is_valid() {
            return Err(Error::InvalidCloud(report.summary()));
        }
        let dim = points[0].len();
        let coords = points.into_iter().flatten().collect();
        Ok(PointCloud {
            coords,
            dim,
            epsilon,
        })
    }

    pub fn from_flat(coords: Vec<f64>, dim: usize, epsilon: f64) -> Result<Self> {
        if dim == 0 || !coords.len().is_multiple_of(dim) {
            return Err(Error::InvalidCloud(format!(
                "{} coordinates do not divide into points of dimension {dim}",
                coords.len()
            )));
        }
        let points = coords.chunks(dim).map(<[f64]>::to_vec).collect();
        PointCloud::new(points, epsilon)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidCloud("epsilon must be positive".into()));
        }
        self.epsilon = epsilon;
        Ok(self)
    }

    /// A new cloud holding the given points of `self`, in the given order.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointCloud {
            coords,
            dim: self.dim,
            epsilon: self.epsilon,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    /// Reported but does not invalidate the cloud.
    Warning,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Finding {
    pub severity: Severity,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.findings.iter().all(|f| f.severity != Severity::Error)
    }

    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings
            .iter()
            .filter(|f| f.severity == Severity::Error)
    }

    pub fn summary(&self) -> String {
        self.errors()
            .map(|f| f.message.as_str())
            .collect::<Vec<_>>()
            .join("; ")
    }

    fn error(&mut self, message: String) {
        self.findings.push(Finding {
            severity: Severity::Error,
            message,
        });
    }

    fn warning(&mut self, message: String) {
        self.findings.push(Finding {
            severity: Severity::Warning,
            message,
        });
    }
}

/// Checks raw cloud input against the [`PointCloud`] invariants.
///
/// Duplicate points are reported as warnings: they are legal input and become
/// mutually adjacent in every neighborhood graph.
pub fn validate_cloud(points: &[Vec<f64>], epsilon: f64) -> ValidationReport {
    let mut report = ValidationReport::default();
    if !epsilon.is_finite() || epsilon <= 0.0 {
        report.error("epsilon must be positive".into());
    }
    let Some(first) = points.first() else {
        report.error("cloud is empty".into());
        return report;
    };
    let dim = first.len();
    if dim == 0 {
        report.error("point 0 has no coordinates".into());
    }
    let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        if p.len() != dim {
            report.error(format!(
                "point {i} has {} coordinates, expected {dim}",
                p.len()
            ));
            continue;
        }
        if p.iter().any(|c| !c.is_finite()) {
            report.error(format!("non-finite coordinate at index {i}"));
            continue;
        }
        // -0.0 and 0.0 are the same location
        let key = p.iter().map(|c| (c + 0.0).to_bits()).collect();
        if let Some(&j) = seen.get(&key) {
            report.warning(format!("point {i} duplicates point {j}"));
        } else {
            seen.insert(key, i);
        }
    }
    report
}

/// Vertex count plus a list of unordered edges, stored with `i < j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbstractGraph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
}

impl AbstractGraph {
    pub fn new(vertex_count: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut normalized = Vec::with_capacity(edges.len());
        for (i, j) in edges {
            if i >= vertex_count || j >= vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({i}, {j}) references a vertex outside 0..{vertex_count}"
                )));
            }
            if i == j {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {i}")));
            }
            let e = (i.min(j), i.max(j));
            if !seen.insert(e) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    e.0, e.1
                )));
            }
            normalized.push(e);
        }
        Ok(AbstractGraph {
            vertex_count,
            edges: normalized,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.vertex_count];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    pub fn adjacency_matrix(&self) -> Vec<Vec<bool>> {
        let n = self.vertex_count;
        let mut adj = vec![vec![false; n]; n];
        for &(i, j) in &self.edges {
            adj[i][j] = true;
            adj[j][i] = true;
        }
        adj
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut nbrs = vec![Vec::new(); self.vertex_count];
        for &(i, j) in &self.edges {
            nbrs[i].push(j);
            nbrs[j].push(i);
        }
        for n in &mut nbrs {
            n.sort_unstable();
        }
        nbrs
    }
}

impl fmt::Display for AbstractGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let noun = |n: usize, one: &str, many: &str| {
            format!("{n} {}", if n == 1 { one } else { many })
        };
        write!(
            f,
            "{}, {}",
            noun(self.vertex_count, "vertex", "vertices"),
            noun(self.edges.len(), "edge", "edges")
        )
    }
}

/// An abstract graph with one position per vertex; edges are straight segments.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedGraph {
    graph: AbstractGraph,
    positions: Vec<Vec<f64>>,
}

impl EmbeddedGraph {
    pub fn new(graph: AbstractGraph, positions: Vec<Vec<f64>>) -> Result<Self> {
        if positions.len() != graph.vertex_count() {
            return Err(Error::InvalidGraph(format!(
                "{} positions for {} vertices",
                positions.len(),
                graph.vertex_count()
            )));
        }
        if let Some(first) = positions.first() {
            let dim = first.len();
            if dim == 0 {
                return Err(Error::InvalidGraph("vertex 0 has no coordinates".into()));
            }
            for (i, p) in positions.iter().enumerate() {
                if p.len() != dim {
                    return Err(Error::InvalidGraph(format!(
                        "vertex {i} has {} coordinates, expected {dim}",
                        p.len()
                    )));
                }
                if p.iter().any(|c| !c.is_finite()) {
                    return Err(Error::InvalidGraph(format!(
                        "non-finite coordinate at vertex {i}"
                    )));
                }
            }
            let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
            for (i, p) in positions.iter().enumerate() {
                let key = p.iter().map(|c| (c + 0.0).to_bits()).collect();
                if let Some(j) = seen.insert(key, i) {
                    return Err(Error::InvalidGraph(format!(
                        "vertices {j} and {i} share a position"
                    )));
                }
            }
        }
        Ok(EmbeddedGraph { graph, positions })
    }

    /// Convenience constructor from raw vertex positions and edge pairs.
    pub fn from_parts(positions: Vec<Vec<f64>>, edges: Vec<(usize, usize)>) -> Result<Self> {
        let graph = AbstractGraph::new(positions.len(), edges)?;
        EmbeddedGraph::new(graph, positions)
    }

    pub fn graph(&self) -> &AbstractGraph {
        &self.graph
    }

    pub fn positions(&self) -> &[Vec<f64>] {
        &self.positions
    }

    pub fn position(&self, v: usize) -> &[f64] {
        &self.positions[v]
    }

    /// Ambient dimension, or `None` for a graph without vertices.
    pub fn dim(&self) -> Option<usize> {
        self.positions.first().map(Vec::len)
    }

    pub fn segments(&self) -> impl Iterator<Item = (&[f64], &[f64])> + '_ {
        self.graph
            .edges()
            .iter()
            .map(|&(i, j)| (self.positions[i].as_slice(), self.positions[j].as_slice()))
    }

    pub fn map_positions(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let positions = self.positions.iter().map(|p| f(p)).collect();
        EmbeddedGraph::new(self.graph.clone(), positions)
    }
}

/// Per-point local dimension: 0 near a vertex, 1 near an edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DimensionLabels(pub Vec<u8>);

impl DimensionLabels {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices_with(&self, label: u8) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Partition of the sample into vertex and edge clusters, with the two
/// bounding vertex clusters of every edge cluster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stratification {
    pub labels: DimensionLabels,
    pub vertex_clusters: Vec<Vec<usize>>,
    pub edge_clusters: Vec<Vec<usize>>,
    pub incidence: Vec<(usize, usize)>,
}

impl Stratification {
    /// Checks the partition and incidence invariants against a cloud of `n` points.
    pub fn validate(&self, n: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidStratification(m));
        if self.labels.len() != n {
            return bad(format!("{} labels for {n} points", self.labels.len()));
        }
        if self.labels.0.iter().any(|&l| l > 1) {
            return bad("labels must be 0 or 1".into());
        }
        if self.incidence.len() != self.edge_clusters.len() {
            return bad(format!(
                "{} incidence pairs for {} edge clusters",
                self.incidence.len(),
                self.edge_clusters.len()
            ));
        }
        let mut owner = vec![false; n];
        for (dim, clusters) in [(0u8, &self.vertex_clusters), (1u8, &self.edge_clusters)] {
            for (c, members) in clusters.iter().enumerate() {
                if members.is_empty() {
                    return bad(format!("dimension-{dim} cluster {c} is empty"));
                }
                for &i in members {
                    if i >= n {
                        return bad(format!("cluster member {i} out of range"));
                    }
                    if owner[i] {
                        return bad(format!("point {i} belongs to two clusters"));
                    }
                    if self.labels.0[i] != dim {
                        return bad(format!(
                            "point {i} labeled {} but placed in a dimension-{dim} cluster",
                            self.labels.0[i]
                        ));
                    }
                    owner[i] = true;
                }
            }
        }
        if let Some(i) = owner.iter().position(|&o| !o) {
            return bad(format!("point {i} belongs to no cluster"));
        }
        let k = self.vertex_clusters.len();
        for (e, &(a, b)) in self.incidence.iter().enumerate() {
            if a >= k || b >= k || a == b {
                return bad(format!("edge cluster {e} has invalid incidence ({a}, {b})"));
            }
        }
        Ok(())
    }

    pub fn abstract_graph(&self) -> Result<AbstractGraph> {
        AbstractGraph::new(self.vertex_clusters.len(), self.incidence.clone())
    }

    /// Cluster id of every point within its own dimension class.
    pub fn cluster_of(&self) -> Vec<usize> {
        let n = self.labels.len();
        let mut out = vec![usize::MAX; n];
        for clusters in [&self.vertex_clusters, &self.edge_clusters] {
            for (c, members) in clusters.iter().enumerate() {
                for &i in members {
                    out[i] = c;
                }
            }
        }
        out
    }
}
