use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::failure::{Failure, Stage};

/// Ties a pipeline run to its input, seed, parameters and outputs. Holds no
/// timestamps, so identical runs produce identical manifests.
#[derive(Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub input: Artifact,
    pub seed: u64,
    pub parameters: Parameters,
    pub converged: bool,
    pub isomorphic: bool,
    pub artifacts: Vec<Artifact>,
}

#[derive(Serialize)]
pub struct Parameters {
    pub epsilon: f64,
    pub noise_radius: f64,
    pub spacing: f64,
    pub vertex_sites: bool,
    pub vertex_threshold: f64,
    pub edge_threshold: f64,
    pub link_threshold: f64,
    pub index: String,
    pub max_iters: usize,
}

#[derive(Serialize)]
pub struct Artifact {
    pub name: String,
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

impl Artifact {
    pub fn of(name: &str, file: &str, path: &Path) -> Result<Self, Failure> {
        let data = std::fs::read(path)
            .map_err(|e| Failure::new(Stage::Io, format!("{}: {e}", path.display())))?;
        Ok(Artifact {
            name: name.into(),
            file: file.into(),
            sha256: hex::encode(Sha256::digest(&data)),
            bytes: data.len() as u64,
        })
    }
}
