//! File formats.
//!
//! * point cloud CSV: one point per line, comma-separated coordinates, no header
//! * point cloud JSON: `{"epsilon": ε, "points": [[...], ...]}`
//! * embedded graph JSON: `{"vertices": [[...], ...], "edges": [[i, j], ...]}`
//! * stratification JSON: `{"labels", "vertex_clusters", "edge_clusters", "incidence"}`
//!
//! JSON floats round-trip bit-exactly; CSV uses the shortest representation
//! that parses back to the same `f64`.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{DimensionLabels, EmbeddedGraph, PointCloud, Stratification};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CloudFormat {
    Csv,
    Json,
}

impl CloudFormat {
    /// `.csv` selects CSV; anything else is JSON.
    pub fn from_path(path: &Path) -> CloudFormat {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("csv") => CloudFormat::Csv,
            _ => CloudFormat::Json,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CloudJson {
    epsilon: f64,
    points: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<Vec<f64>>,
    edges: Vec<[usize; 2]>,
}

#[derive(Serialize, Deserialize)]
struct StratificationJson {
    labels: Vec<u8>,
    vertex_clusters: Vec<Vec<usize>>,
    edge_clusters: Vec<Vec<usize>>,
    incidence: Vec<[usize; 2]>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn json_err(location: &str, e: serde_json::Error) -> Error {
    Error::parse(
        format!("{location} line {} column {}", e.line(), e.column()),
        e.to_string(),
    )
}

/// Parses CSV coordinates. Row numbers in errors are 1-based.
pub fn parse_cloud_csv<R: Read>(reader: R, epsilon: f64) -> Result<PointCloud> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut points: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (row, record) in rdr.records().enumerate() {
        let row = row + 1;
        let record = record.map_err(|e| Error::parse(format!("row {row}"), e.to_string()))?;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let expected = *width.get_or_insert(record.len());
        if record.len() != expected {
            return Err(Error::parse(
                format!("row {row}"),
                format!("{} fields, expected {expected}", record.len()),
            ));
        }
        let p = record
            .iter()
            .enumerate()
            .map(|(field, s)| {
                s.parse::<f64>().map_err(|e| {
                    Error::parse(format!("row {row} field {}", field + 1), format!("{s:?}: {e}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        points.push(p);
    }
    PointCloud::new(points, epsilon)
}

pub fn write_cloud_csv<W: Write>(cloud: &PointCloud, writer: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(writer);
    for p in cloud.points() {
        w.write_record(p.iter().map(f64::to_string))
            .map_err(|e| Error::parse("csv output", e.to_string()))?;
    }
    w.flush().map_err(|e| Error::parse("csv output", e.to_string()))?;
    Ok(())
}

pub fn cloud_to_json(cloud: &PointCloud) -> String {
    serde_json::to_string(&CloudJson {
        epsilon: cloud.epsilon(),
        points: cloud.to_vecs(),
    })
    .expect("finite values serialize")
}

pub fn cloud_from_json(text: &str) -> Result<PointCloud> {
    let raw: CloudJson = serde_json::from_str(text).map_err(|e| json_err("cloud", e))?;
    PointCloud::new(raw.points, raw.epsilon)
}

pub fn graph_to_json(graph: &EmbeddedGraph) -> String {
    serde_json::to_string(&GraphJson {
        vertices: graph.positions().to_vec(),
        edges: graph.graph().edges().iter().map(|&(i, j)| [i, j]).collect(),
    })
    .expect("finite values serialize")
}

pub fn graph_from_json(text: &str) -> Result<EmbeddedGraph> {
    let raw: GraphJson = serde_json::from_str(text).map_err(|e| json_err("graph", e))?;
    EmbeddedGraph::from_parts(
        raw.vertices,
        raw.edges.into_iter().map(|[i, j]| (i, j)).collect(),
    )
}

pub fn stratification_to_json(s: &Stratification) -> String {
    serde_json::to_string(&StratificationJson {
        labels: s.labels.0.clone(),
        vertex_clusters: s.vertex_clusters.clone(),
        edge_clusters: s.edge_clusters.clone(),
        incidence: s.incidence.iter().map(|&(a, b)| [a, b]).collect(),
    })
    .expect("integers serialize")
}

/// Parses a stratification; structural checks need the cloud size, see
/// [`Stratification::validate`].
pub fn stratification_from_json(text: &str) -> Result<Stratification> {
    let raw: StratificationJson =
        serde_json::from_str(text).map_err(|e| json_err("stratification", e))?;
    Ok(Stratification {
        labels: DimensionLabels(raw.labels),
        vertex_clusters: raw.vertex_clusters,
        edge_clusters: raw.edge_clusters,
        incidence: raw.incidence.into_iter().map(|[a, b]| (a, b)).collect(),
    })
}

/// Reads a cloud; `epsilon` is required for CSV and overrides the JSON value.
pub fn read_cloud(path: &Path, format: CloudFormat, epsilon: Option<f64>) -> Result<PointCloud> {
    match format {
        CloudFormat::Csv => {
            let eps = epsilon.ok_or_else(|| {
                Error::InvalidParameter(format!("{}: CSV clouds need an epsilon", path.display()))
            })?;
            let file = fs::File::open(path).map_err(io_err(path))?;
            parse_cloud_csv(file, eps).map_err(|e| locate(path, e))
        }
        CloudFormat::Json => {
            let cloud = cloud_from_json(&read_text(path)?).map_err(|e| locate(path, e))?;
            match epsilon {
                Some(eps) => cloud.with_epsilon(eps),
                None => Ok(cloud),
            }
        }
    }
}

pub fn write_cloud(path: &Path, format: CloudFormat, cloud: &PointCloud) -> Result<()> {
    match format {
        CloudFormat::Csv => {
            let file = fs::File::create(path).map_err(io_err(path))?;
            write_cloud_csv(cloud, std::io::BufWriter::new(file))
        }
        CloudFormat::Json => write_text(path, &cloud_to_json(cloud)),
    }
}

pub fn read_embedded_graph(path: &Path) -> Result<EmbeddedGraph> {
    graph_from_json(&read_text(path)?).map_err(|e| locate(path, e))
}

pub fn write_embedded_graph(path: &Path, graph: &EmbeddedGraph) -> Result<()> {
    write_text(path, &graph_to_json(graph))
}

pub fn read_stratification(path: &Path) -> Result<Stratification> {
    stratification_from_json(&read_text(path)?).map_err(|e| locate(path, e))
}

pub fn write_stratification(path: &Path, s: &Stratification) -> Result<()> {
    write_text(path, &stratification_to_json(s))
}

/// Writes any serializable report as pretty JSON.
pub fn write_report<T: Serialize>(path: &Path, report: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| Error::parse(path.display().to_string(), e.to_string()))?;
    write_text(path, &text)
}

pub fn read_report<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| json_err(&path.display().to_string(), e))
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(io_err(path))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(io_err(path))
}

fn locate(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse { location, message } => Error::Parse {
            location: format!("{} {location}", path.display()),
            message,
        },
        other => other,
    }
}
