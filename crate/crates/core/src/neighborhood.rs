//! Threshold graphs on a point cloud and their connected components.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::dist_sq;
use crate::spatial::{IndexRegistry, SpatialIndex};
use crate::types::PointCloud;
use crate::union_find::UnionFind;

pub const DEFAULT_INDEX: &str = "grid";

/// Graph joining every pair of points at distance `≤ radius`.
pub struct NeighborhoodGraph<'a> {
    cloud: &'a PointCloud,
    radius: f64,
    adjacency: Vec<Vec<usize>>,
    index: Box<dyn SpatialIndex + 'a>,
}

/// Component ids for the positions of a queried subset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentLabeling {
    /// `labels[k]` is the component of `subset[k]`; ids count up in order of
    /// first appearance along the subset.
    pub labels: Vec<usize>,
    pub component_count: usize,
}

impl ComponentLabeling {
    /// Members of each component, as original point indices.
    pub fn groups(&self, subset: &[usize]) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.component_count];
        for (&i, &l) in subset.iter().zip(&self.labels) {
            groups[l].push(i);
        }
        groups
    }
}

pub fn build_graph(cloud: &PointCloud, radius: f64) -> Result<NeighborhoodGraph<'_>> {
    build_graph_with(cloud, radius, &IndexRegistry::builtin(), DEFAULT_INDEX)
}

pub fn build_graph_with<'a>(
    cloud: &'a PointCloud,
    radius: f64,
    registry: &IndexRegistry,
    index_name: &str,
) -> Result<NeighborhoodGraph<'a>> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "graph radius must be positive, got {radius}"
        )));
    }
    if cloud.is_empty() {
        return Err(Error::InvalidCloud("cloud is empty".into()));
    }
    let index = registry.build(index_name, cloud, radius)?;
    let adjacency = (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let mut nbrs = index.within(cloud.point(i), radius);
            nbrs.retain(|&j| j != i);
            nbrs
        })
        .collect();
    Ok(NeighborhoodGraph {
        cloud,
        radius,
        adjacency,
        index,
    })
}

impl<'a> NeighborhoodGraph<'a> {
    pub fn cloud(&self) -> &'a PointCloud {
        self.cloud
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Sorted indices within `r` of `q`, for any `r`.
    pub fn radius_neighbors(&self, q: &[f64], r: f64) -> Result<Vec<usize>> {
        if q.len() != self.cloud.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.cloud.dim(),
                actual: q.len(),
            });
        }
        Ok(self.index.within(q, r))
    }

    /// Connected components of `subset`, joining only graph edges of length
    /// `≤ max_edge`.
    pub fn components(&self, subset: &[usize], max_edge: f64) -> Result<ComponentLabeling> {
        if max_edge > self.radius {
            return Err(Error::InvalidParameter(format!(
                "component threshold {max_edge} exceeds graph radius {}",
                self.radius
            )));
        }
        let n = self.cloud.len();
        if let Some(&bad) = subset.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange { index: bad, len: n });
        }
        let local: HashMap<usize, usize> =
            subset.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let max2 = max_edge * max_edge;
        let mut uf = UnionFind::new(subset.len());
        for (k, &i) in subset.iter().enumerate() {
            let p = self.cloud.point(i);
            for j in &self.adjacency[i] {
                if let Some(&m) = local.get(j) {
                    if m > k && dist_sq(p, self.cloud.point(*j)) <= max2 {
                        uf.union(k, m);
                    }
                }
            }
        }
        Ok(ComponentLabeling {
            component_count: uf.set_count(),
            labels: uf.canonical_labels(),
        })
    }
}

/// Sorted indices of `cloud` within `r` of `q`, using a throwaway grid.
pub fn radius_neighbors(cloud: &PointCloud, q: &[f64], r: f64) -> Result<Vec<usize>> {
    if q.len() != cloud.dim() {
        return Err(Error::DimensionMismatch {
            expected: cloud.dim(),
            actual: q.len(),
        });
    }
    let cell = if r > 0.0 { r } else { cloud.epsilon() };
    Ok(IndexRegistry::builtin()
        .build(DEFAULT_INDEX, cloud, cell)?
        .within(q, r))
}

/// Connected components of `subset` at an arbitrary distance threshold,
/// independent of any prebuilt graph. Groups are returned as sorted point
/// indices, ordered by their smallest member.
pub fn threshold_components(
    cloud: &PointCloud,
    subset: &[usize],
    threshold: f64,
    registry: &IndexRegistry,
    index_name: &str,
) -> Result<Vec<Vec<usize>>> {
    if subset.is_empty() {
        return Ok(Vec::new());
    }
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "threshold must be positive, got {threshold}"
        )));
    }
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&bad) = sorted.last().filter(|&&i| i >= cloud.len()) {
        return Err(Error::IndexOutOfRange {
            index: bad,
            len: cloud.len(),
        });
    }
    let sub = cloud.select(&sorted);
    let index = registry.build(index_name, &sub, threshold)?;
    let mut uf = UnionFind::new(sorted.len());
    for k in 0..sorted.len() {
        for m in index.within(sub.point(k), threshold) {
            if m > k {
                uf.union(k, m);
            }
        }
    }
    let labels = uf.canonical_labels();
    let mut groups = vec![Vec::new(); uf.set_count()];
    for (k, l) in labels.into_iter().enumerate() {
        groups[l].push(sorted[k]);
    }
    Ok(groups)
}
