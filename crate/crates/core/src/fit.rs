//! Least-squares placement of the vertices of a recovered graph.
//!
//! Every sample contributes one squared residual: to its vertex position if
//! it was labeled 0, or to the point `θ·x_a + (1 − θ)·x_b` of its edge if it
//! was labeled 1, with `θ ∈ [0, 1]` a free local coordinate. The objective
//! is minimized by alternating two exact steps:
//!
//! * **x-step**: with every θ fixed the objective is quadratic in the vertex
//!   positions, and its normal equations share one `k × k` matrix across all
//!   ambient coordinates;
//! * **θ-step**: with positions fixed each θ is the clamped projection of its
//!   sample onto the segment.
//!
//! Neither step can increase the objective, so the trace is monotone.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{centroid, dist_sq, dot, lerp, sub};
use crate::types::{AbstractGraph, EmbeddedGraph, PointCloud, Stratification};

/// Closest point of the segment `θ·a + (1 − θ)·b`, θ ∈ [0, 1], to a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub theta: f64,
    pub dist_sq: f64,
    /// `a == b`; θ is reported as 0.
    pub degenerate: bool,
}

pub fn project_to_segment(p: &[f64], a: &[f64], b: &[f64]) -> Projection {
    let ab = sub(a, b);
    let len2 = dot(&ab, &ab);
    if len2 == 0.0 {
        return Projection {
            theta: 0.0,
            dist_sq: dist_sq(p, b),
            degenerate: true,
        };
    }
    let theta = (dot(&sub(p, b), &ab) / len2).clamp(0.0, 1.0);
    let dist_sq = p
        .iter()
        .zip(a.iter().zip(b))
        .map(|(pi, (ai, bi))| {
            let d = pi - (theta * ai + (1.0 - theta) * bi);
            d * d
        })
        .sum();
    Projection {
        theta,
        dist_sq,
        degenerate: false,
    }
}

/// Which stratum a sample is scored against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stratum {
    Vertex(usize),
    /// Endpoints `(j₁, j₂)`; θ = 1 sits on `j₁`.
    Edge(usize, usize),
}

/// A cloud plus the fixed assignment of every sample to a stratum.
#[derive(Clone, Debug)]
pub struct FitProblem<'a> {
    cloud: &'a PointCloud,
    assignment: Vec<Stratum>,
    vertex_count: usize,
    vertex_members: Vec<Vec<usize>>,
}

impl<'a> FitProblem<'a> {
    pub fn new(cloud: &'a PointCloud, strat: &Stratification) -> Result<Self> {
        strat.validate(cloud.len())?;
        let mut assignment = vec![Stratum::Vertex(0); cloud.len()];
        for (j, members) in strat.vertex_clusters.iter().enumerate() {
            for &i in members {
                assignment[i] = Stratum::Vertex(j);
            }
        }
        for (e, members) in strat.edge_clusters.iter().enumerate() {
            let (a, b) = strat.incidence[e];
            for &i in members {
                assignment[i] = Stratum::Edge(a, b);
            }
        }
        Ok(FitProblem {
            cloud,
            assignment,
            vertex_count: strat.vertex_clusters.len(),
            vertex_members: strat.vertex_clusters.clone(),
        })
    }

    /// Builds a problem from an explicit per-sample assignment. Vertices
    /// without a dimension-0 sample start at the origin.
    pub fn from_assignment(
        cloud: &'a PointCloud,
        assignment: Vec<Stratum>,
        vertex_count: usize,
    ) -> Result<Self> {
        if assignment.len() != cloud.len() {
            return Err(Error::InvalidStratification(format!(
                "{} assignments for {} points",
                assignment.len(),
                cloud.len()
            )));
        }
        let mut vertex_members = vec![Vec::new(); vertex_count];
        for (i, s) in assignment.iter().enumerate() {
            let ok = match *s {
                Stratum::Vertex(j) => {
                    if j < vertex_count {
                        vertex_members[j].push(i);
                    }
                    j < vertex_count
                }
                Stratum::Edge(a, b) => a < vertex_count && b < vertex_count && a != b,
            };
            if !ok {
                return Err(Error::InvalidStratification(format!(
                    "point {i} has invalid stratum {s:?}"
                )));
            }
        }
        Ok(FitProblem {
            cloud,
            assignment,
            vertex_count,
            vertex_members,
        })
    }

    pub fn cloud(&self) -> &PointCloud {
        self.cloud
    }

    pub fn assignment(&self) -> &[Stratum] {
        &self.assignment
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    fn check(&self, positions: &[Vec<f64>], thetas: &[f64]) -> Result<()> {
        if positions.len() != self.vertex_count {
            return Err(Error::InvalidParameter(format!(
                "{} positions for {} vertices",
                positions.len(),
                self.vertex_count
            )));
        }
        if let Some(p) = positions.iter().find(|p| p.len() != self.cloud.dim()) {
            return Err(Error::DimensionMismatch {
                expected: self.cloud.dim(),
                actual: p.len(),
            });
        }
        if thetas.len() != self.cloud.len() {
            return Err(Error::InvalidParameter(format!(
                "{} thetas for {} points",
                thetas.len(),
                self.cloud.len()
            )));
        }
        if let Some(i) = thetas.iter().position(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidParameter(format!(
                "theta {i} = {} lies outside [0, 1]",
                thetas[i]
            )));
        }
        Ok(())
    }
}

/// Φ = Σᵢ φᵢ, summed in point order.
pub fn objective(problem: &FitProblem<'_>, positions: &[Vec<f64>], thetas: &[f64]) -> Result<f64> {
    problem.check(positions, thetas)?;
    Ok(objective_unchecked(problem, positions, thetas))
}

fn objective_unchecked(problem: &FitProblem<'_>, positions: &[Vec<f64>], thetas: &[f64]) -> f64 {
    let mut total = 0.0;
    for (i, s) in problem.assignment.iter().enumerate() {
        let p = problem.cloud.point(i);
        total += match *s {
            Stratum::Vertex(j) => dist_sq(p, &positions[j]),
            Stratum::Edge(a, b) => {
                let t = thetas[i];
                p.iter()
                    .zip(positions[a].iter().zip(&positions[b]))
                    .map(|(pi, (ai, bi))| {
                        let d = pi - t * ai - (1.0 - t) * bi;
                        d * d
                    })
                    .sum()
            }
        };
    }
    total
}

/// Exact θ minimizers for fixed positions; 0 for vertex samples.
pub fn theta_step(problem: &FitProblem<'_>, positions: &[Vec<f64>]) -> Vec<f64> {
    problem
        .assignment
        .iter()
        .enumerate()
        .map(|(i, s)| match *s {
            Stratum::Vertex(_) => 0.0,
            Stratum::Edge(a, b) => {
                project_to_segment(problem.cloud.point(i), &positions[a], &positions[b]).theta
            }
        })
        .collect()
}

/// Centroid of each vertex cluster and the matching projections.
pub fn initialize(problem: &FitProblem<'_>) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let dim = problem.cloud.dim();
    let mut positions = Vec::with_capacity(problem.vertex_count);
    for (j, members) in problem.vertex_members.iter().enumerate() {
        if members.is_empty() {
            if problem
                .assignment
                .iter()
                .any(|s| matches!(*s, Stratum::Edge(a, b) if a == j || b == j))
            {
                return Err(Error::InvalidStratification(format!(
                    "vertex cluster {j} is empty"
                )));
            }
            positions.push(vec![0.0; dim]);
            continue;
        }
        positions.push(centroid(members.iter().map(|&i| problem.cloud.point(i))));
    }
    let thetas = theta_step(problem, &positions);
    Ok((positions, thetas))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitOptions {
    pub max_iters: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iters: 200,
            rel_tol: 1e-10,
            abs_tol: 1e-14,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    #[serde(rename = "vertices")]
    pub vertex_positions: Vec<Vec<f64>>,
    pub thetas: Vec<f64>,
    /// Φ before the first sweep, then after every sweep.
    #[serde(rename = "objective")]
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Vertices whose position was held fixed because no sample constrained it.
    pub pinned: Vec<usize>,
}

impl FitResult {
    pub fn final_objective(&self) -> f64 {
        *self.objective_trace.last().expect("trace holds the initial value")
    }

    pub fn embedded_graph(&self, graph: &AbstractGraph) -> Result<EmbeddedGraph> {
        EmbeddedGraph::new(graph.clone(), self.vertex_positions.clone())
    }
}

/// Minimizes Φ over vertex positions with every θ clamped to [0, 1].
pub fn fit(problem: &FitProblem<'_>, options: &FitOptions) -> Result<FitResult> {
    let (positions, thetas) = initialize(problem)?;
    fit_from(problem, positions, thetas, options)
}

/// [`fit`] from a caller-supplied starting point.
pub fn fit_from(
    problem: &FitProblem<'_>,
    mut positions: Vec<Vec<f64>>,
    mut thetas: Vec<f64>,
    options: &FitOptions,
) -> Result<FitResult> {
    if problem.vertex_count == 0 {
        return Err(Error::InvalidStratification("no vertices to fit".into()));
    }
    problem.check(&positions, &thetas)?;
    let mut phi = objective_unchecked(problem, &positions, &thetas);
    let mut trace = vec![phi];
    let mut pinned = vec![false; problem.vertex_count];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < options.max_iters {
        iterations += 1;
        let new_positions = x_step(problem, &positions, &thetas, &mut pinned);
        let new_thetas = theta_step(problem, &new_positions);
        let new_phi = objective_unchecked(problem, &new_positions, &new_thetas);
        if new_phi > phi {
            // rounding noise at a fixed point; keep the better iterate
            trace.push(phi);
            converged = true;
            break;
        }
        let decrease = phi - new_phi;
        positions = new_positions;
        thetas = new_thetas;
        phi = new_phi;
        trace.push(phi);
        if decrease <= options.abs_tol || decrease <= options.rel_tol * trace[trace.len() - 2] {
            converged = true;
            break;
        }
    }

    Ok(FitResult {
        vertex_positions: positions,
        thetas,
        objective_trace: trace,
        iterations,
        converged,
        pinned: (0..pinned.len()).filter(|&j| pinned[j]).collect(),
    })
}

/// Solves the normal equations of Φ in the vertex positions for fixed θ.
pub fn x_step(
    problem: &FitProblem<'_>,
    positions: &[Vec<f64>],
    thetas: &[f64],
    pinned: &mut [bool],
) -> Vec<Vec<f64>> {
    let k = problem.vertex_count;
    let n = problem.cloud.dim();
    let mut m = DMatrix::<f64>::zeros(k, k);
    let mut rhs = DMatrix::<f64>::zeros(k, n);
    for (i, s) in problem.assignment.iter().enumerate() {
        let p = problem.cloud.point(i);
        match *s {
            Stratum::Vertex(j) => {
                m[(j, j)] += 1.0;
                for (d, x) in p.iter().enumerate() {
                    rhs[(j, d)] += x;
                }
            }
            Stratum::Edge(a, b) => {
                let t = thetas[i];
                let u = 1.0 - t;
                m[(a, a)] += t * t;
                m[(b, b)] += u * u;
                m[(a, b)] += t * u;
                m[(b, a)] += t * u;
                for (d, x) in p.iter().enumerate() {
                    rhs[(a, d)] += t * x;
                    rhs[(b, d)] += u * x;
                }
            }
        }
    }
    for j in 0..k {
        if m[(j, j)] == 0.0 {
            // a zero diagonal means the whole row is zero: Φ ignores x_j
            pinned[j] = true;
            m[(j, j)] = 1.0;
            for d in 0..n {
                rhs[(j, d)] = positions[j][d];
            }
        }
    }
    let solution = match m.clone().cholesky() {
        Some(chol) => chol.solve(&rhs),
        None => {
            // rank-deficient coupling: add a proximal term around the current
            // positions, which keeps the step a descent step
            let lambda = 1e-10 * (m.trace() / k as f64).max(1.0);
            let mut reg = m;
            let mut reg_rhs = rhs;
            for j in 0..k {
                reg[(j, j)] += lambda;
                for d in 0..n {
                    reg_rhs[(j, d)] += lambda * positions[j][d];
                }
            }
            reg.cholesky()
                .expect("proximal regularization makes the system positive definite")
                .solve(&reg_rhs)
        }
    };
    (0..k)
        .map(|j| (0..n).map(|d| solution[(j, d)]).collect())
        .collect()
}

/// Norm of the gradient of Φ, with θ components projected onto the feasible
/// directions of the box [0, 1].
pub fn projected_gradient_norm(
    problem: &FitProblem<'_>,
    positions: &[Vec<f64>],
    thetas: &[f64],
) -> Result<f64> {
    problem.check(positions, thetas)?;
    let n = problem.cloud.dim();
    let mut gx = vec![vec![0.0; n]; problem.vertex_count];
    let mut sq = 0.0;
    for (i, s) in problem.assignment.iter().enumerate() {
        let p = problem.cloud.point(i);
        match *s {
            Stratum::Vertex(j) => {
                for d in 0..n {
                    gx[j][d] -= 2.0 * (p[d] - positions[j][d]);
                }
            }
            Stratum::Edge(a, b) => {
                let t = thetas[i];
                let s_pt = lerp(&positions[a], &positions[b], t);
                let r = sub(p, &s_pt);
                let mut g_theta = 0.0;
                for d in 0..n {
                    gx[a][d] -= 2.0 * t * r[d];
                    gx[b][d] -= 2.0 * (1.0 - t) * r[d];
                    g_theta -= 2.0 * r[d] * (positions[a][d] - positions[b][d]);
                }
                let blocked = (t <= 0.0 && g_theta > 0.0) || (t >= 1.0 && g_theta < 0.0);
                if !blocked {
                    sq += g_theta * g_theta;
                }
            }
        }
    }
    sq += gx.iter().flatten().map(|g| g * g).sum::<f64>();
    Ok(sq.sqrt())
}
