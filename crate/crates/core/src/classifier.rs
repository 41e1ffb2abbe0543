//! Local dimension of each sample: 0 when its neighborhood looks like a
//! vertex, 1 when it looks like the interior of an edge.
//!
//! For a query point `q` the classifier looks at the ball `B` of radius
//! `local_radius` around it:
//!
//! 1. if `B` is disconnected at `ball_edge_threshold`, `q` sits beside an
//!    acute corner with one edge passing through → 1;
//! 2. otherwise the annulus `A ⊂ B` of points with
//!    `annulus_inner ≤ d(p, q) ≤ annulus_outer` is split into components at
//!    `annulus_edge_threshold`; anything other than two components → 0;
//! 3. with two components, the angle at `q` between their centroids decides:
//!    strictly below `angle_threshold` → 0, else 1.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{angle_between, centroid, dist_sq, norm, sub};
use crate::neighborhood::NeighborhoodGraph;
use crate::types::{DimensionLabels, PointCloud};

/// Centroids closer than this to `q` make the angle undefined.
const DEGENERATE_CENTROID: f64 = 1e-12;

/// Radii and thresholds used by the classifier, in absolute units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifierParams {
    pub local_radius: f64,
    pub annulus_inner: f64,
    pub annulus_outer: f64,
    pub ball_edge_threshold: f64,
    pub annulus_edge_threshold: f64,
    /// Radians.
    pub angle_threshold: f64,
}

impl ClassifierParams {
    /// 10ε ball, [8ε, 10ε] annulus, 2ε / 3ε linking, 2·arccos(1/4) angle.
    pub fn from_epsilon(epsilon: f64) -> Self {
        ClassifierParams {
            local_radius: 10.0 * epsilon,
            annulus_inner: 8.0 * epsilon,
            annulus_outer: 10.0 * epsilon,
            ball_edge_threshold: 2.0 * epsilon,
            annulus_edge_threshold: 3.0 * epsilon,
            angle_threshold: default_angle_threshold(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        let radii = [
            self.local_radius,
            self.annulus_inner,
            self.annulus_outer,
            self.ball_edge_threshold,
            self.annulus_edge_threshold,
        ];
        if radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return bad("classifier radii must be positive and finite");
        }
        if self.annulus_inner >= self.annulus_outer {
            return bad("annulus inner radius must be below the outer radius");
        }
        if self.annulus_outer != self.local_radius {
            return bad("annulus outer radius must equal the local radius");
        }
        if !(self.angle_threshold > 0.0 && self.angle_threshold <= std::f64::consts::PI) {
            return bad("angle threshold must lie in (0, π]");
        }
        Ok(())
    }

    /// The graph handed to the classifier must contain every edge either
    /// component pass needs.
    pub fn required_graph_radius(&self) -> f64 {
        self.ball_edge_threshold.max(self.annulus_edge_threshold)
    }
}

/// 2·arccos(1/4) ≈ 2.6362 rad.
pub fn default_angle_threshold() -> f64 {
    2.0 * 0.25f64.acos()
}

/// Decides between a straight pass-through (1) and a bend (0) from the two
/// annulus components seen from `q`.
pub fn angle_test<'a>(
    q: &[f64],
    comp_a: impl IntoIterator<Item = &'a [f64]>,
    comp_b: impl IntoIterator<Item = &'a [f64]>,
    angle_threshold: f64,
) -> u8 {
    let va = sub(&centroid(comp_a), q);
    let vb = sub(&centroid(comp_b), q);
    if norm(&va) <= DEGENERATE_CENTROID || norm(&vb) <= DEGENERATE_CENTROID {
        return 0;
    }
    if angle_between(&va, &vb) < angle_threshold {
        0
    } else {
        1
    }
}

pub fn classify_point(graph: &NeighborhoodGraph<'_>, q_index: usize, params: &ClassifierParams) -> Result<u8> {
    check(graph, params)?;
    let n = graph.cloud().len();
    if q_index >= n {
        return Err(Error::IndexOutOfRange { index: q_index, len: n });
    }
    Ok(classify_unchecked(graph, q_index, params))
}

fn check(graph: &NeighborhoodGraph<'_>, params: &ClassifierParams) -> Result<()> {
    params.validate()?;
    if params.required_graph_radius() > graph.radius() {
        return Err(Error::InvalidParameter(format!(
            "classifier needs a graph of radius ≥ {}, got {}",
            params.required_graph_radius(),
            graph.radius()
        )));
    }
    Ok(())
}

fn classify_unchecked(graph: &NeighborhoodGraph<'_>, q_index: usize, params: &ClassifierParams) -> u8 {
    let cloud: &PointCloud = graph.cloud();
    let q = cloud.point(q_index);
    let ball = graph
        .radius_neighbors(q, params.local_radius)
        .expect("query point has the cloud's dimension");

    let ball_parts = graph
        .components(&ball, params.ball_edge_threshold)
        .expect("thresholds checked against the graph radius");
    if ball_parts.component_count != 1 {
        return 1;
    }

    let inner2 = params.annulus_inner * params.annulus_inner;
    let annulus: Vec<usize> = ball
        .iter()
        .copied()
        .filter(|&p| dist_sq(cloud.point(p), q) >= inner2)
        .collect();
    let annulus_parts = graph
        .components(&annulus, params.annulus_edge_threshold)
        .expect("thresholds checked against the graph radius");
    if annulus_parts.component_count != 2 {
        return 0;
    }

    let groups = annulus_parts.groups(&annulus);
    angle_test(
        q,
        groups[0].iter().map(|&i| cloud.point(i)),
        groups[1].iter().map(|&i| cloud.point(i)),
        params.angle_threshold,
    )
}

/// Labels every point, evaluating in parallel.
pub fn classify_all(graph: &NeighborhoodGraph<'_>, params: &ClassifierParams) -> Result<DimensionLabels> {
    check(graph, params)?;
    let labels = (0..graph.cloud().len())
        .into_par_iter()
        .map(|i| classify_unchecked(graph, i, params))
        .collect();
    Ok(DimensionLabels(labels))
}

/// Same as [`classify_all`] on the calling thread only.
pub fn classify_all_serial(graph: &NeighborhoodGraph<'_>, params: &ClassifierParams) -> Result<DimensionLabels> {
    check(graph, params)?;
    let labels = (0..graph.cloud().len())
        .map(|i| classify_unchecked(graph, i, params))
        .collect();
    Ok(DimensionLabels(labels))
}
