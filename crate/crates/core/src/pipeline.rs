//! Structure recovery end to end: neighborhood graph, dimension labels,
//! clusters and incidence, optionally followed by the embedding fit.

use crate::classifier::{classify_all, ClassifierParams};
use crate::error::Result;
use crate::fit::{fit, FitOptions, FitProblem, FitResult};
use crate::neighborhood::{build_graph_with, DEFAULT_INDEX};
use crate::spatial::IndexRegistry;
use crate::stratification::{stratify, ClusterParams};
use crate::types::{AbstractGraph, EmbeddedGraph, PointCloud, Stratification};

#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructOptions {
    pub classifier: ClassifierParams,
    pub clusters: ClusterParams,
    /// Spatial index backend, by registry name.
    pub index: String,
}

impl ReconstructOptions {
    pub fn from_epsilon(epsilon: f64) -> Self {
        ReconstructOptions {
            classifier: ClassifierParams::from_epsilon(epsilon),
            clusters: ClusterParams::from_epsilon(epsilon),
            index: DEFAULT_INDEX.to_string(),
        }
    }

    /// Radius of the shared neighborhood graph: large enough for every
    /// component pass that can reuse it.
    pub fn graph_radius(&self) -> f64 {
        self.classifier
            .required_graph_radius()
            .max(self.clusters.edge_threshold)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Reconstruction {
    pub stratification: Stratification,
    pub graph: AbstractGraph,
}

pub fn reconstruct(
    cloud: &PointCloud,
    options: &ReconstructOptions,
    registry: &IndexRegistry,
) -> Result<Reconstruction> {
    let graph = build_graph_with(cloud, options.graph_radius(), registry, &options.index)?;
    let labels = classify_all(&graph, &options.classifier)?;
    let (stratification, abstract_graph) =
        stratify(&graph, labels, &options.clusters, registry, &options.index)?;
    Ok(Reconstruction {
        stratification,
        graph: abstract_graph,
    })
}

/// A reconstruction together with its fitted embedding.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    pub reconstruction: Reconstruction,
    pub fit: FitResult,
    pub embedded: EmbeddedGraph,
}

pub fn reconstruct_and_fit(
    cloud: &PointCloud,
    options: &ReconstructOptions,
    fit_options: &FitOptions,
    registry: &IndexRegistry,
) -> Result<Model> {
    let reconstruction = reconstruct(cloud, options, registry)?;
    let problem = FitProblem::new(cloud, &reconstruction.stratification)?;
    let result = fit(&problem, fit_options)?;
    let embedded = result.embedded_graph(&reconstruction.graph)?;
    Ok(Model {
        reconstruction,
        fit: result,
        embedded,
    })
}
