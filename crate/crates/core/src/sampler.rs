//! Certified ε-samples of a known embedded graph, and the geometric
//! assumptions under which reconstruction is expected to succeed.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{angle_between, dist, sub};
use crate::metrics::{hausdorff_to_graph, GraphDistance};
use crate::types::{EmbeddedGraph, PointCloud};

/// Smallest angle allowed between two edges at a shared vertex.
pub const MIN_INCIDENT_ANGLE: f64 = PI / 6.0;
/// Shortest edge, in units of ε.
pub const MIN_EDGE_LENGTH: f64 = 30.0;
/// Closest pair of vertices, in units of ε.
pub const MIN_VERTEX_SEPARATION: f64 = 20.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleOptions {
    /// Radius ρ of the uniform noise ball, `0 ≤ ρ < ε`.
    pub noise_radius: f64,
    /// Maximum gap `s` between consecutive unperturbed sites on an edge.
    pub spacing: f64,
    pub seed: u64,
    pub include_vertices: bool,
}

impl SampleOptions {
    /// ρ = s = ε/2.
    pub fn for_epsilon(epsilon: f64, seed: u64) -> Self {
        SampleOptions {
            noise_radius: epsilon / 2.0,
            spacing: epsilon / 2.0,
            seed,
            include_vertices: true,
        }
    }

    pub fn validate(&self, epsilon: f64) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return bad("epsilon must be positive".into());
        }
        if self.noise_radius.is_nan() || self.noise_radius < 0.0 {
            return bad("noise_radius must be non-negative".into());
        }
        if self.noise_radius >= epsilon {
            return bad("noise_radius must be < epsilon".into());
        }
        if !(self.spacing > 0.0 && self.spacing.is_finite()) {
            return bad("spacing must be positive".into());
        }
        if self.spacing > 2.0 * (epsilon - self.noise_radius) {
            return bad(format!(
                "spacing {} exceeds 2·(epsilon − noise_radius) = {}",
                self.spacing,
                2.0 * (epsilon - self.noise_radius)
            ));
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream per (seed, tag, a, b), so site noise does not depend on
/// the order in which vertices or edges are visited.
pub(crate) fn derive_seed(seed: u64, tag: u64, a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(splitmix64(seed) ^ tag) ^ a) ^ b)
}

fn uniform_in_ball(rng: &mut ChaCha8Rng, dim: usize, radius: f64) -> Vec<f64> {
    loop {
        let dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            let r = radius * rng.gen::<f64>().powf(1.0 / dim as f64);
            return dir.into_iter().map(|x| x / norm * r).collect();
        }
    }
}

fn perturb(site: Vec<f64>, rng: &mut ChaCha8Rng, radius: f64) -> Vec<f64> {
    if radius == 0.0 {
        return site;
    }
    let offset = uniform_in_ball(rng, site.len(), radius);
    site.iter().zip(offset).map(|(x, o)| x + o).collect()
}

/// Places sites on every vertex (isolated vertices always) and along every
/// edge, then perturbs each one inside a ball of radius ρ. Coverage is
/// `s/2 + ρ ≤ ε` by construction.
pub fn sample_graph(graph: &EmbeddedGraph, epsilon: f64, options: &SampleOptions) -> Result<PointCloud> {
    options.validate(epsilon)?;
    let dim = graph
        .dim()
        .ok_or_else(|| Error::InvalidGraph("graph has no vertices".into()))?;
    let mut points = Vec::new();
    let degrees = graph.graph().degrees();
    for (v, pos) in graph.positions().iter().enumerate() {
        // an isolated vertex has no edge sites to cover it
        if options.include_vertices || degrees[v] == 0 {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(options.seed, 0, v as u64, 0));
            points.push(perturb(pos.clone(), &mut rng, options.noise_radius));
        }
    }
    for &(i, j) in graph.graph().edges() {
        let (a, b) = (graph.position(i), graph.position(j));
        let len = dist(a, b);
        if len == 0.0 {
            return Err(Error::InvalidGraph(format!("edge ({i}, {j}) has zero length")));
        }
        let m = ((len / options.spacing) - 1e-9).ceil().max(1.0) as usize;
        let offsets: Vec<f64> = if options.include_vertices {
            (1..m).map(|k| k as f64 / m as f64).collect()
        } else {
            (0..m).map(|k| (k as f64 + 0.5) / m as f64).collect()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(options.seed, 1, i as u64, j as u64));
        for t in offsets {
            let site: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
            points.push(perturb(site, &mut rng, options.noise_radius));
        }
    }
    debug_assert!(points.iter().all(|p| p.len() == dim));
    PointCloud::new(points, epsilon)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonCertificate {
    pub is_valid: bool,
    /// Exact max distance from a sample to the graph.
    pub sample_to_graph: f64,
    /// Upper bound on the max distance from the graph to the sample.
    pub graph_to_sample: f64,
    pub hausdorff: f64,
}

/// Checks that every sample is within ε of the graph and every point of the
/// graph is within ε of a sample. `resolution` is the net spacing used for
/// the second direction; `None` means ε/100.
pub fn validate_epsilon_sample(
    cloud: &PointCloud,
    graph: &EmbeddedGraph,
    epsilon: f64,
    resolution: Option<f64>,
) -> Result<EpsilonCertificate> {
    let delta = resolution.unwrap_or(epsilon / 100.0);
    let GraphDistance {
        sample_to_graph,
        graph_to_sample,
    } = hausdorff_to_graph(cloud, graph, delta)?;
    let hausdorff = sample_to_graph.max(graph_to_sample);
    Ok(EpsilonCertificate {
        is_valid: sample_to_graph <= epsilon && graph_to_sample <= epsilon,
        sample_to_graph,
        graph_to_sample,
        hausdorff,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssumptionReport {
    /// Radians; `None` when no vertex has two incident edges.
    pub min_incident_angle: Option<f64>,
    /// In units of ε; `None` without edges.
    pub min_edge_length: Option<f64>,
    /// In units of ε; `None` with fewer than two vertices.
    pub min_vertex_separation: Option<f64>,
    pub pass: bool,
    pub violations: Vec<String>,
    pub notes: Vec<String>,
}

pub fn check_assumptions(graph: &EmbeddedGraph, epsilon: f64) -> Result<AssumptionReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let mut violations = Vec::new();
    let mut notes = Vec::new();

    let mut min_angle: Option<(f64, usize)> = None;
    for (v, nbrs) in graph.graph().neighbors().iter().enumerate() {
        if nbrs.is_empty() {
            notes.push(format!("vertex {v} has degree 0; no incident angle"));
            continue;
        }
        let origin = graph.position(v);
        let dirs: Vec<Vec<f64>> = nbrs.iter().map(|&u| sub(graph.position(u), origin)).collect();
        for x in 0..dirs.len() {
            for y in x + 1..dirs.len() {
                let ang = angle_between(&dirs[x], &dirs[y]);
                if min_angle.is_none_or(|(m, _)| ang < m) {
                    min_angle = Some((ang, v));
                }
            }
        }
    }
    if let Some((ang, v)) = min_angle {
        if ang < MIN_INCIDENT_ANGLE {
            violations.push(format!(
                "edges at vertex {v} meet at {ang:.4} rad, below π/6"
            ));
        }
    }

    let min_edge = graph
        .graph()
        .edges()
        .iter()
        .map(|&(i, j)| (dist(graph.position(i), graph.position(j)) / epsilon, (i, j)))
        .min_by(|a, b| a.0.total_cmp(&b.0));
    if let Some((len, (i, j))) = min_edge {
        if len < MIN_EDGE_LENGTH {
            violations.push(format!(
                "edge ({i}, {j}) has length {len:.3}ε, below {MIN_EDGE_LENGTH}ε"
            ));
        }
    }

    let k = graph.graph().vertex_count();
    let mut min_sep: Option<(f64, usize, usize)> = None;
    for i in 0..k {
        for j in i + 1..k {
            let d = dist(graph.position(i), graph.position(j)) / epsilon;
            if min_sep.is_none_or(|(m, _, _)| d < m) {
                min_sep = Some((d, i, j));
            }
        }
    }
    if let Some((d, i, j)) = min_sep {
        if d < MIN_VERTEX_SEPARATION {
            violations.push(format!(
                "vertices {i} and {j} are {d:.3}ε apart, below {MIN_VERTEX_SEPARATION}ε"
            ));
        }
    }

    Ok(AssumptionReport {
        min_incident_angle: min_angle.map(|(a, _)| a),
        min_edge_length: min_edge.map(|(l, _)| l),
        min_vertex_separation: min_sep.map(|(d, _, _)| d),
        pass: violations.is_empty(),
        violations,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::project_to_segment;

    fn segment() -> EmbeddedGraph {
        EmbeddedGraph::from_parts(vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![(0, 1)]).unwrap()
    }

    fn opts(noise: f64, spacing: f64, seed: u64) -> SampleOptions {
        SampleOptions {
            noise_radius: noise,
            spacing,
            seed,
            include_vertices: true,
        }
    }

    #[test]
    fn noiseless_segment_sample() {
        let cloud = sample_graph(&segment(), 0.1, &opts(0.0, 0.05, 1)).unwrap();
        assert_eq!(cloud.len(), 21);
        let mut xs: Vec<f64> = cloud.points().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        for (k, x) in xs.iter().enumerate() {
            assert!((x - 0.05 * k as f64).abs() < 1e-12);
        }
        assert!(cloud.points().all(|p| p[1] == 0.0));
        let cert = validate_epsilon_sample(&cloud, &segment(), 0.1, None).unwrap();
        assert!(cert.is_valid);
        assert!(cert.sample_to_graph <= 1e-15);
        // true coverage radius 0.025, plus at most δ/2 = 0.0005
        assert!(cert.graph_to_sample >= 0.025 - 1e-12 && cert.graph_to_sample <= 0.0255 + 1e-12);
    }

    #[test]
    fn noisy_segment_sample() {
        let g = segment();
        let cloud = sample_graph(&g, 0.1, &opts(0.05, 0.05, 9)).unwrap();
        for p in cloud.points() {
            let d = project_to_segment(p, &[0.0, 0.0], &[1.0, 0.0]).dist_sq.sqrt();
            assert!(d <= 0.05 + 1e-15);
        }
        let cert = validate_epsilon_sample(&cloud, &g, 0.1, None).unwrap();
        assert!(cert.is_valid);
        assert!(cert.hausdorff <= 0.075 + 0.0005);
    }

    #[test]
    fn sampling_is_seeded() {
        let g = segment();
        let a = sample_graph(&g, 0.1, &opts(0.05, 0.05, 42)).unwrap();
        let b = sample_graph(&g, 0.1, &opts(0.05, 0.05, 42)).unwrap();
        let c = sample_graph(&g, 0.1, &opts(0.05, 0.05, 43)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn without_vertex_sites_midpoints_cover() {
        let cloud = sample_graph(
            &segment(),
            0.1,
            &SampleOptions {
                include_vertices: false,
                ..opts(0.0, 0.05, 0)
            },
        )
        .unwrap();
        assert_eq!(cloud.len(), 20);
        assert!(validate_epsilon_sample(&cloud, &segment(), 0.1, None).unwrap().is_valid);
    }

    #[test]
    fn isolated_vertex_is_sampled_without_vertex_sites() {
        let g = EmbeddedGraph::from_parts(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 5.0]],
            vec![(0, 1)],
        )
        .unwrap();
        let options = SampleOptions {
            include_vertices: false,
            ..opts(0.0, 0.05, 0)
        };
        let cloud = sample_graph(&g, 0.1, &options).unwrap();
        assert_eq!(cloud.len(), 21);
        assert_eq!(cloud.point(0), &[5.0, 5.0]);
        assert!(validate_epsilon_sample(&cloud, &g, 0.1, None).unwrap().is_valid);
    }

    #[test]
    fn option_invariants() {
        let g = segment();
        let err = sample_graph(&g, 0.1, &opts(0.1, 0.01, 0)).unwrap_err();
        assert_eq!(err.to_string(), "invalid parameter: noise_radius must be < epsilon");
        assert!(sample_graph(&g, 0.1, &opts(0.05, 0.11, 0)).is_err());
        assert!(sample_graph(&g, 0.1, &opts(-0.01, 0.05, 0)).is_err());
    }

    #[test]
    fn triangle_midpoints_are_valid() {
        let s = 0.1;
        let h = s * 3f64.sqrt() / 2.0;
        let g = EmbeddedGraph::from_parts(
            vec![vec![0.0, 0.0], vec![s, 0.0], vec![s / 2.0, h]],
            vec![(0, 1), (1, 2), (0, 2)],
        )
        .unwrap();
        let mut pts = g.positions().to_vec();
        for (a, b) in g.segments() {
            pts.push(a.iter().zip(b).map(|(x, y)| (x + y) / 2.0).collect());
        }
        let cloud = PointCloud::new(pts, 0.1).unwrap();
        let cert = validate_epsilon_sample(&cloud, &g, 0.1, None).unwrap();
        assert!(cert.is_valid);
        assert_eq!(cert.sample_to_graph, 0.0);
    }

    #[test]
    fn single_sample_cannot_cover_long_graph() {
        let g = EmbeddedGraph::from_parts(vec![vec![-1.0, 0.0], vec![1.0, 0.0]], vec![(0, 1)]).unwrap();
        let cloud = PointCloud::new(vec![vec![0.0, 0.0]], 0.1).unwrap();
        let cert = validate_epsilon_sample(&cloud, &g, 0.1, None).unwrap();
        assert!(!cert.is_valid);
        assert!(cert.graph_to_sample > 0.1);
    }

    #[test]
    fn unit_square_passes() {
        let g = EmbeddedGraph::from_parts(
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]],
            vec![(0, 1), (1, 2), (2, 3), (3, 0)],
        )
        .unwrap();
        let r = check_assumptions(&g, 0.01).unwrap();
        assert!(r.pass, "{:?}", r.violations);
        assert!((r.min_incident_angle.unwrap() - PI / 2.0).abs() < 1e-12);
        assert!((r.min_edge_length.unwrap() - 100.0).abs() < 1e-9);
    }

    #[test]
    fn narrow_angle_fails() {
        let a = 10f64.to_radians();
        let g = EmbeddedGraph::from_parts(
            vec![vec![0.0, 0.0], vec![10.0, 0.0], vec![10.0 * a.cos(), 10.0 * a.sin()]],
            vec![(0, 1), (0, 2)],
        )
        .unwrap();
        let r = check_assumptions(&g, 0.1).unwrap();
        assert!(!r.pass);
        assert!((r.min_incident_angle.unwrap() - 0.1745).abs() < 1e-4);
        assert!(r.violations.iter().any(|v| v.contains("π/6")));
    }

    #[test]
    fn isolated_vertex_is_noted() {
        let g = EmbeddedGraph::from_parts(vec![vec![0.0], vec![5.0], vec![10.0]], vec![(0, 1)]).unwrap();
        let r = check_assumptions(&g, 0.1).unwrap();
        assert!(r.pass);
        assert_eq!(r.notes.len(), 1);
        assert!(r.min_incident_angle.is_none());
    }
}
