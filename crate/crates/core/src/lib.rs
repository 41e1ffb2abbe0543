//! Reconstruction of linearly embedded graphs from noisy ε-samples.
//!
//! The pipeline runs in three stages:
//!
//! 1. [`neighborhood`] builds threshold graphs over the sample and counts
//!    connected components.
//! 2. [`classifier`] labels each sample as vertex-like (0) or edge-like (1),
//!    and [`stratification`] clusters the labels into an abstract graph.
//! 3. [`fit`] recovers vertex coordinates by constrained least squares.
//!
//! [`sampler`] solves the direct problem (certified ε-samples of a known
//! embedding) and [`metrics`] scores a reconstruction against ground truth.

pub mod bias;
pub mod classifier;
pub mod error;
pub mod fit;
pub mod geometry;
pub mod io;
pub mod metrics;
pub mod neighborhood;
pub mod pipeline;
pub mod sampler;
pub mod spatial;
pub mod stratification;
pub mod types;
pub mod union_find;

pub use error::{Error, Result};
pub use types::{
    validate_cloud, AbstractGraph, DimensionLabels, EmbeddedGraph, Finding, PointCloud, Severity,
    Stratification, ValidationReport,
};
