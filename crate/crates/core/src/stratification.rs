//! Turns dimension labels into vertex clusters, edge clusters and the
//! abstract graph that links them.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::neighborhood::{threshold_components, NeighborhoodGraph};
use crate::spatial::IndexRegistry;
use crate::types::{AbstractGraph, DimensionLabels, Stratification};

/// Distances used to group labeled points, in absolute units.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClusterParams {
    pub vertex_threshold: f64,
    pub edge_threshold: f64,
    pub link_threshold: f64,
}

impl ClusterParams {
    /// 10ε between vertex samples, 3ε between edge samples and across the
    /// vertex/edge boundary.
    pub fn from_epsilon(epsilon: f64) -> Self {
        ClusterParams {
            vertex_threshold: 10.0 * epsilon,
            edge_threshold: 3.0 * epsilon,
            link_threshold: 3.0 * epsilon,
        }
    }
}

fn clusters_with_label(
    graph: &NeighborhoodGraph<'_>,
    labels: &DimensionLabels,
    label: u8,
    threshold: f64,
    registry: &IndexRegistry,
    index_name: &str,
) -> Result<Vec<Vec<usize>>> {
    let cloud = graph.cloud();
    if labels.len() != cloud.len() {
        return Err(Error::InvalidStratification(format!(
            "{} labels for {} points",
            labels.len(),
            cloud.len()
        )));
    }
    let subset = labels.indices_with(label);
    if threshold <= graph.radius() {
        let parts = graph.components(&subset, threshold)?;
        // subset is ascending, so first-appearance order is smallest-member order
        Ok(parts.groups(&subset))
    } else {
        threshold_components(cloud, &subset, threshold, registry, index_name)
    }
}

/// Groups dimension-0 points that are chained by gaps `≤ threshold`.
pub fn cluster_vertices(
    graph: &NeighborhoodGraph<'_>,
    labels: &DimensionLabels,
    threshold: f64,
    registry: &IndexRegistry,
    index_name: &str,
) -> Result<Vec<Vec<usize>>> {
    clusters_with_label(graph, labels, 0, threshold, registry, index_name)
}

/// Groups dimension-1 points that are chained by gaps `≤ threshold`.
pub fn cluster_edges(
    graph: &NeighborhoodGraph<'_>,
    labels: &DimensionLabels,
    threshold: f64,
    registry: &IndexRegistry,
    index_name: &str,
) -> Result<Vec<Vec<usize>>> {
    clusters_with_label(graph, labels, 1, threshold, registry, index_name)
}

/// For every edge cluster, finds the vertex clusters holding a point within
/// `link_threshold` of one of its points. Exactly two are required.
pub fn assign_incidence(
    graph: &NeighborhoodGraph<'_>,
    vertex_clusters: &[Vec<usize>],
    edge_clusters: &[Vec<usize>],
    link_threshold: f64,
) -> Result<(AbstractGraph, Vec<(usize, usize)>)> {
    let cloud = graph.cloud();
    let mut vertex_of: HashMap<usize, usize> = HashMap::new();
    for (c, members) in vertex_clusters.iter().enumerate() {
        for &i in members {
            vertex_of.insert(i, c);
        }
    }

    let mut incidence = Vec::with_capacity(edge_clusters.len());
    let mut first_use: HashMap<(usize, usize), usize> = HashMap::new();
    for (e, members) in edge_clusters.iter().enumerate() {
        let mut touching = BTreeSet::new();
        for &i in members {
            let near = if link_threshold <= graph.radius() {
                let p = cloud.point(i);
                let r2 = link_threshold * link_threshold;
                graph
                    .neighbors(i)
                    .iter()
                    .copied()
                    .filter(|&j| crate::geometry::dist_sq(p, cloud.point(j)) <= r2)
                    .collect()
            } else {
                graph.radius_neighbors(cloud.point(i), link_threshold)?
            };
            touching.extend(near.iter().filter_map(|j| vertex_of.get(j)));
        }
        let touching: Vec<usize> = touching.into_iter().collect();
        let &[a, b] = touching.as_slice() else {
            return Err(Error::Incidence {
                edge_cluster: e,
                touching,
            });
        };
        if let Some(&first) = first_use.get(&(a, b)) {
            return Err(Error::ParallelEdges {
                first,
                second: e,
                vertices: (a, b),
            });
        }
        first_use.insert((a, b), e);
        incidence.push((a, b));
    }
    let abstract_graph = AbstractGraph::new(vertex_clusters.len(), incidence.clone())?;
    Ok((abstract_graph, incidence))
}

/// Runs vertex clustering, edge clustering and incidence assignment.
pub fn stratify(
    graph: &NeighborhoodGraph<'_>,
    labels: DimensionLabels,
    params: &ClusterParams,
    registry: &IndexRegistry,
    index_name: &str,
) -> Result<(Stratification, AbstractGraph)> {
    let vertex_clusters =
        cluster_vertices(graph, &labels, params.vertex_threshold, registry, index_name)?;
    let edge_clusters = cluster_edges(graph, &labels, params.edge_threshold, registry, index_name)?;
    let (abstract_graph, incidence) =
        assign_incidence(graph, &vertex_clusters, &edge_clusters, params.link_threshold)?;
    let strat = Stratification {
        labels,
        vertex_clusters,
        edge_clusters,
        incidence,
    };
    debug_assert!(strat.validate(graph.cloud().len()).is_ok());
    Ok((strat, abstract_graph))
}
