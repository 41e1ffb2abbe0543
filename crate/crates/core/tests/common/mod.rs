//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::VecDeque;

use stratagraph::fit::{objective, FitProblem, Stratum};
use stratagraph::types::{AbstractGraph, EmbeddedGraph, PointCloud};

pub const EPS: f64 = 0.1;

/// Edges of the five-vertex test graph: a triangle 1-2-3, a pendant edge
/// 0-1 and an isolated vertex 4.
pub const TEST_EDGES: [(usize, usize); 4] = [(0, 1), (1, 2), (2, 3), (3, 1)];

pub fn test_graph_2d() -> EmbeddedGraph {
    let s3 = 3f64.sqrt();
    EmbeddedGraph::from_parts(
        vec![
            vec![-2.0 * s3, -2.0],
            vec![0.0, 0.0],
            vec![4.0, 0.0],
            vec![2.0, 2.0 * s3],
            vec![6.0, 3.0],
        ],
        TEST_EDGES.to_vec(),
    )
    .unwrap()
}

pub fn test_graph_3d() -> EmbeddedGraph {
    EmbeddedGraph::from_parts(
        vec![
            vec![-2.0, -2.0, -2.5],
            vec![0.0, 0.0, 0.0],
            vec![4.0, 0.0, 0.0],
            vec![1.0, 3.0, 2.0],
            vec![4.0, 4.0, -2.0],
        ],
        TEST_EDGES.to_vec(),
    )
    .unwrap()
}

/// Hub at the origin with three spokes of unequal length.
pub fn hub_and_spoke() -> EmbeddedGraph {
    let spoke = |deg: f64, len: f64| {
        let r = deg.to_radians();
        vec![len * r.cos(), len * r.sin()]
    };
    EmbeddedGraph::from_parts(
        vec![vec![0.0, 0.0], spoke(90.0, 4.0), spoke(210.0, 5.0), spoke(330.0, 6.0)],
        vec![(0, 1), (0, 2), (0, 3)],
    )
    .unwrap()
}

/// Path a - v - b with the interior angle at v given in degrees.
pub fn corner(angle_deg: f64, arm: f64) -> EmbeddedGraph {
    let r = angle_deg.to_radians();
    EmbeddedGraph::from_parts(
        vec![vec![arm, 0.0], vec![0.0, 0.0], vec![arm * r.cos(), arm * r.sin()]],
        vec![(0, 1), (1, 2)],
    )
    .unwrap()
}

/// Star with `arms` equally spaced spokes around vertex 0.
pub fn star(arms: usize, arm: f64) -> EmbeddedGraph {
    let mut pos = vec![vec![0.0, 0.0]];
    let mut edges = Vec::new();
    for k in 0..arms {
        let r = std::f64::consts::TAU * k as f64 / arms as f64 + 0.3;
        pos.push(vec![arm * r.cos(), arm * r.sin()]);
        edges.push((0, k + 1));
    }
    EmbeddedGraph::from_parts(pos, edges).unwrap()
}

pub fn segment(len: f64) -> EmbeddedGraph {
    EmbeddedGraph::from_parts(vec![vec![0.0, 0.0], vec![len, 0.0]], vec![(0, 1)]).unwrap()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Neighbor lists by comparing every pair.
pub fn all_pairs_neighbors(cloud: &PointCloud, r: f64) -> Vec<Vec<usize>> {
    (0..cloud.len())
        .map(|i| {
            (0..cloud.len())
                .filter(|&j| {
                    j != i && {
                        let d2: f64 = cloud
                            .point(i)
                            .iter()
                            .zip(cloud.point(j))
                            .map(|(x, y)| (x - y) * (x - y))
                            .sum();
                        d2 <= r * r
                    }
                })
                .collect()
        })
        .collect()
}

/// Component groups of `subset` under edges of length ≤ r, by BFS,
/// ordered by smallest member.
pub fn bfs_components(cloud: &PointCloud, subset: &[usize], r: f64) -> Vec<Vec<usize>> {
    let mut seen = vec![false; subset.len()];
    let mut out = Vec::new();
    for start in 0..subset.len() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut group = vec![subset[start]];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for v in 0..subset.len() {
                if !seen[v] && dist(cloud.point(subset[u]), cloud.point(subset[v])) <= r {
                    seen[v] = true;
                    group.push(subset[v]);
                    queue.push_back(v);
                }
            }
        }
        group.sort_unstable();
        out.push(group);
    }
    out.sort();
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Every vertex bijection g1 → g2 that maps the edge set exactly.
pub fn brute_isomorphisms(g1: &AbstractGraph, g2: &AbstractGraph) -> Vec<Vec<usize>> {
    if g1.vertex_count() != g2.vertex_count() || g1.edges().len() != g2.edges().len() {
        return Vec::new();
    }
    let adj = g2.adjacency_matrix();
    let mut out: Vec<Vec<usize>> = permutations(g1.vertex_count())
        .into_iter()
        .filter(|p| g1.edges().iter().all(|&(a, b)| adj[p[a]][p[b]]))
        .collect();
    out.sort();
    out
}

pub fn brute_hausdorff(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let directed = |x: &[Vec<f64>], y: &[Vec<f64>]| {
        x.iter()
            .map(|p| y.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// Central-difference gradient of Φ over vertex coordinates and thetas,
/// with theta components projected onto the box [0, 1].
pub fn fd_projected_gradient(
    problem: &FitProblem<'_>,
    positions: &[Vec<f64>],
    thetas: &[f64],
    h: f64,
) -> f64 {
    let phi = |x: &[Vec<f64>], t: &[f64]| objective(problem, x, t).unwrap();
    let mut sq = 0.0;
    for j in 0..positions.len() {
        for d in 0..positions[j].len() {
            let mut up = positions.to_vec();
            let mut dn = positions.to_vec();
            up[j][d] += h;
            dn[j][d] -= h;
            let g = (phi(&up, thetas) - phi(&dn, thetas)) / (2.0 * h);
            sq += g * g;
        }
    }
    for (i, &t) in thetas.iter().enumerate() {
        if matches!(problem.assignment()[i], Stratum::Vertex(_)) {
            continue;
        }
        let lo = (t - h).max(0.0);
        let hi = (t + h).min(1.0);
        let mut tu = thetas.to_vec();
        let mut td = thetas.to_vec();
        tu[i] = hi;
        td[i] = lo;
        let g = (phi(positions, &tu) - phi(positions, &td)) / (hi - lo);
        let blocked = (t <= 0.0 && g > 0.0) || (t >= 1.0 && g < 0.0);
        if !blocked {
            sq += g * g;
        }
    }
    sq.sqrt()
}
