//! Scoring a reconstruction: Hausdorff distances, abstract-graph
//! isomorphism, and vertex position error under the best matching.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::project_to_segment;
use crate::geometry::{dist, dist_sq};
use crate::spatial::{GridIndex, SpatialIndex};
use crate::types::{AbstractGraph, EmbeddedGraph, PointCloud};

/// Largest graph [`graph_isomorphic`] will search.
pub const MAX_ISOMORPHISM_VERTICES: usize = 12;

/// Veto hook `(map, depth, v, w)` for extending a partial mapping with `v ↦ w`.
type StepFn<'s> = dyn FnMut(&[usize], usize, usize, usize) -> bool + 's;

fn directed(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .map(|p| {
            b.iter()
                .map(|q| dist_sq(p, q))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
        .sqrt()
}

/// Hausdorff distance between two finite point sets.
pub fn hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<f64> {
    let (Some(pa), Some(pb)) = (a.first(), b.first()) else {
        return Err(Error::InvalidParameter("hausdorff of an empty set".into()));
    };
    let dim = pa.len();
    if let Some(p) = a.iter().chain(b).find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: p.len(),
        });
    }
    debug_assert_eq!(pb.len(), dim);
    Ok(directed(a, b).max(directed(b, a)))
}

/// Both directed distances between a sample and an embedded graph.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GraphDistance {
    /// Exact: max over samples of the distance to the nearest vertex or edge.
    pub sample_to_graph: f64,
    /// Max over a net of spacing ≤ δ on the graph of the distance to the
    /// nearest sample, plus δ/2; never below the true value.
    pub graph_to_sample: f64,
}

pub fn hausdorff_to_graph(cloud: &PointCloud, graph: &EmbeddedGraph, delta: f64) -> Result<GraphDistance> {
    let dim = graph
        .dim()
        .ok_or_else(|| Error::InvalidGraph("graph has no vertices".into()))?;
    if cloud.is_empty() {
        return Err(Error::InvalidCloud("cloud is empty".into()));
    }
    if dim != cloud.dim() {
        return Err(Error::DimensionMismatch {
            expected: cloud.dim(),
            actual: dim,
        });
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter("net resolution must be positive".into()));
    }

    let mut sample_to_graph: f64 = 0.0;
    for p in cloud.points() {
        let mut best = graph
            .positions()
            .iter()
            .map(|v| dist_sq(p, v))
            .fold(f64::INFINITY, f64::min);
        for (a, b) in graph.segments() {
            best = best.min(project_to_segment(p, a, b).dist_sq);
        }
        sample_to_graph = sample_to_graph.max(best);
    }
    let sample_to_graph = sample_to_graph.sqrt();

    let reach = cloud.epsilon();
    let index = GridIndex::new(cloud, reach);
    let nearest = |q: &[f64]| -> f64 {
        let local = index.within(q, reach);
        let candidates: Box<dyn Iterator<Item = usize>> = if local.is_empty() {
            Box::new(0..cloud.len())
        } else {
            Box::new(local.into_iter())
        };
        candidates
            .map(|i| dist_sq(cloud.point(i), q))
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    };
    let mut net_max: f64 = 0.0;
    for v in graph.positions() {
        net_max = net_max.max(nearest(v));
    }
    let mut has_edges = false;
    for (a, b) in graph.segments() {
        has_edges = true;
        let m = (dist(a, b) / delta).ceil().max(1.0) as usize;
        for k in 1..m {
            let t = k as f64 / m as f64;
            let q: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
            net_max = net_max.max(nearest(&q));
        }
    }
    let graph_to_sample = if has_edges { net_max + delta / 2.0 } else { net_max };
    Ok(GraphDistance {
        sample_to_graph,
        graph_to_sample,
    })
}

struct IsoSearch<'g> {
    adj1: Vec<Vec<bool>>,
    adj2: Vec<Vec<bool>>,
    deg1: Vec<usize>,
    deg2: Vec<usize>,
    order: Vec<usize>,
    g2: &'g AbstractGraph,
}

impl<'g> IsoSearch<'g> {
    /// `None` when the degree sequences already rule out an isomorphism.
    fn new(g1: &AbstractGraph, g2: &'g AbstractGraph) -> Result<Option<Self>> {
        for g in [g1, g2] {
            if g.vertex_count() > MAX_ISOMORPHISM_VERTICES {
                return Err(Error::UnsupportedSize(g.vertex_count()));
            }
        }
        if g1.vertex_count() != g2.vertex_count() || g1.edges().len() != g2.edges().len() {
            return Ok(None);
        }
        let (deg1, deg2) = (g1.degrees(), g2.degrees());
        let (mut s1, mut s2) = (deg1.clone(), deg2.clone());
        s1.sort_unstable();
        s2.sort_unstable();
        if s1 != s2 {
            return Ok(None);
        }
        let mut order: Vec<usize> = (0..g1.vertex_count()).collect();
        order.sort_by_key(|&v| (std::cmp::Reverse(deg1[v]), v));
        Ok(Some(IsoSearch {
            adj1: g1.adjacency_matrix(),
            adj2: g2.adjacency_matrix(),
            deg1,
            deg2,
            order,
            g2,
        }))
    }

    fn consistent(&self, map: &[usize], depth: usize, v: usize, w: usize) -> bool {
        self.deg1[v] == self.deg2[w]
            && self.order[..depth]
                .iter()
                .all(|&u| self.adj1[v][u] == self.adj2[w][map[u]])
    }

    /// Depth-first enumeration. `step(map, depth, v, w)` may veto extending
    /// the partial mapping with `v ↦ w`; `done` sees each full mapping and
    /// returns `false` to stop the search.
    fn run(
        &self,
        step: &mut StepFn<'_>,
        done: &mut dyn FnMut(&[usize]) -> bool,
    ) {
        let n = self.order.len();
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; self.g2.vertex_count()];
        self.recurse(0, &mut map, &mut used, step, done);
    }

    fn recurse(
        &self,
        depth: usize,
        map: &mut Vec<usize>,
        used: &mut Vec<bool>,
        step: &mut StepFn<'_>,
        done: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        if depth == self.order.len() {
            return done(map);
        }
        let v = self.order[depth];
        for w in 0..used.len() {
            if used[w] || !self.consistent(map, depth, v, w) || !step(map, depth, v, w) {
                continue;
            }
            map[v] = w;
            used[w] = true;
            let keep_going = self.recurse(depth + 1, map, used, step, done);
            used[w] = false;
            map[v] = usize::MAX;
            if !keep_going {
                return false;
            }
        }
        true
    }
}

fn verify_mapping(g1: &AbstractGraph, g2: &AbstractGraph, map: &[usize]) -> bool {
    let adj2 = g2.adjacency_matrix();
    g1.edges().iter().all(|&(i, j)| adj2[map[i]][map[j]])
        && g1.edges().len() == g2.edges().len()
}

/// An adjacency-preserving bijection `g1 → g2`, if one exists.
pub fn graph_isomorphic(g1: &AbstractGraph, g2: &AbstractGraph) -> Result<Option<Vec<usize>>> {
    let Some(search) = IsoSearch::new(g1, g2)? else {
        return Ok(None);
    };
    let mut found = None;
    search.run(&mut |_, _, _, _| true, &mut |map| {
        found = Some(map.to_vec());
        false
    });
    if let Some(map) = &found {
        assert!(verify_mapping(g1, g2, map), "isomorphism search returned a bad mapping");
    }
    Ok(found)
}

/// Every isomorphism `g1 → g2`.
pub fn all_isomorphisms(g1: &AbstractGraph, g2: &AbstractGraph) -> Result<Vec<Vec<usize>>> {
    let Some(search) = IsoSearch::new(g1, g2)? else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    search.run(&mut |_, _, _, _| true, &mut |map| {
        out.push(map.to_vec());
        true
    });
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct VertexError {
    pub max: f64,
    pub mean: f64,
    /// `mapping[t]` is the fitted vertex matched to truth vertex `t`.
    pub mapping: Vec<usize>,
    /// Distance for each truth vertex.
    pub per_vertex: Vec<f64>,
}

/// Position error under the isomorphism that minimizes the maximum error
/// (ties broken by the total error).
pub fn vertex_error(fitted: &EmbeddedGraph, truth: &EmbeddedGraph) -> Result<VertexError> {
    if let (Some(a), Some(b)) = (fitted.dim(), truth.dim()) {
        if a != b {
            return Err(Error::DimensionMismatch {
                expected: b,
                actual: a,
            });
        }
    }
    let Some(search) = IsoSearch::new(truth.graph(), fitted.graph())? else {
        return Err(Error::NotIsomorphic);
    };
    let n = truth.graph().vertex_count();
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|t| {
            (0..n)
                .map(|f| dist(truth.position(t), fitted.position(f)))
                .collect()
        })
        .collect();

    // running (max, sum) per depth of the partial mapping, and the best
    // complete (max, sum, mapping) seen so far
    let partial = RefCell::new(vec![(0.0f64, 0.0f64); n + 1]);
    let best: RefCell<Option<(f64, f64, Vec<usize>)>> = RefCell::new(None);
    search.run(
        &mut |_, depth, v, w| {
            let mut partial = partial.borrow_mut();
            let (pm, ps) = partial[depth];
            let c = cost[v][w];
            let next = (pm.max(c), ps + c);
            if let Some((bm, bs, _)) = &*best.borrow() {
                if next.0 > *bm || (next.0 == *bm && next.1 >= *bs) {
                    return false;
                }
            }
            partial[depth + 1] = next;
            true
        },
        &mut |map| {
            let (m, s) = partial.borrow()[n];
            *best.borrow_mut() = Some((m, s, map.to_vec()));
            true
        },
    );
    let best = best.into_inner();
    let (max, sum, mapping) = best.ok_or(Error::NotIsomorphic)?;
    let per_vertex = (0..n).map(|t| cost[t][mapping[t]]).collect();
    Ok(VertexError {
        max,
        mean: if n == 0 { 0.0 } else { sum / n as f64 },
        mapping,
        per_vertex,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub isomorphic: bool,
    pub max_vertex_error: Option<f64>,
    pub mean_vertex_error: Option<f64>,
    pub hausdorff_sample_to_model: Option<f64>,
}

/// Scores a fitted graph against the truth; non-isomorphic graphs are a
/// finding, not an error.
pub fn evaluate(
    fitted: &EmbeddedGraph,
    truth: &EmbeddedGraph,
    cloud: Option<&PointCloud>,
) -> Result<EvaluationReport> {
    let err = match vertex_error(fitted, truth) {
        Ok(e) => Some(e),
        Err(Error::NotIsomorphic) => None,
        Err(e) => return Err(e),
    };
    let hausdorff_sample_to_model = match cloud {
        Some(c) => {
            let d = hausdorff_to_graph(c, fitted, c.epsilon() / 100.0)?;
            Some(d.sample_to_graph.max(d.graph_to_sample))
        }
        None => None,
    };
    Ok(EvaluationReport {
        isomorphic: err.is_some(),
        max_vertex_error: err.as_ref().map(|e| e.max),
        mean_vertex_error: err.as_ref().map(|e| e.mean),
        hausdorff_sample_to_model,
    })
}
