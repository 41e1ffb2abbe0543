//! Acceptance suite. Prints one PASS/FAIL/WARN line per criterion and exits
//! non-zero when any hard criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use stratagraph::bias::{estimate_bias, BiasOptions};
use stratagraph::classifier::{classify_all, ClassifierParams};
use stratagraph::fit::{fit, project_to_segment, FitOptions, FitProblem};
use stratagraph::metrics::{graph_isomorphic, hausdorff, vertex_error};
use stratagraph::neighborhood::build_graph;
use stratagraph::pipeline::{reconstruct, reconstruct_and_fit, ReconstructOptions};
use stratagraph::sampler::{check_assumptions, sample_graph, validate_epsilon_sample, SampleOptions};
use stratagraph::spatial::IndexRegistry;
use stratagraph::types::{AbstractGraph, EmbeddedGraph, PointCloud};

enum Verdict {
    Pass,
    Fail,
    Warn,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        let verdict = if ok { Verdict::Pass } else { Verdict::Fail };
        Outcome { verdict, detail }
    }
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("reproduction 2D", || reproduction(&test_graph_2d())),
        ("reproduction 3D", || reproduction(&test_graph_3d())),
        ("noiseless exactness", noiseless_exactness),
        ("classifier guarantees", classifier_guarantees),
        ("optimizer properties", optimizer_properties),
        ("oracle equivalences", oracle_equivalences),
        ("sampler certification", sampler_certification),
        ("fit scaling", fit_scaling),
        ("bias report", bias_report),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let out = run();
        let tag = match out.verdict {
            Verdict::Pass => "PASS",
            Verdict::Warn => "WARN",
            Verdict::Fail => {
                failed += 1;
                "FAIL"
            }
        };
        println!("{tag} criterion {} ({name}): {}", k + 1, out.detail);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}

fn reproduction(truth: &EmbeddedGraph) -> Outcome {
    let report = check_assumptions(truth, EPS).unwrap();
    if !report.pass {
        return Outcome::check(false, format!("embedding fails assumptions: {:?}", report.violations));
    }
    let registry = IndexRegistry::builtin();
    let opts = ReconstructOptions::from_epsilon(EPS);
    let start = Instant::now();
    let mut successes = 0;
    let mut max_err: f64 = 0.0;
    for seed in 0..100 {
        let cloud = sample_graph(truth, EPS, &SampleOptions::for_epsilon(EPS, seed)).unwrap();
        let Ok(model) = reconstruct_and_fit(&cloud, &opts, &FitOptions::default(), &registry) else {
            continue;
        };
        if let Ok(err) = vertex_error(&model.embedded, truth) {
            successes += 1;
            max_err = max_err.max(err.max);
        }
    }
    let elapsed = start.elapsed();
    Outcome::check(
        successes >= 95 && max_err <= 5.0 * EPS && elapsed <= Duration::from_secs(10),
        format!(
            "{successes}/100 isomorphic, max vertex error {:.4} = {:.2}ε (limit 5ε), {:.2}s (limit 10s)",
            max_err,
            max_err / EPS,
            elapsed.as_secs_f64()
        ),
    )
}

fn noiseless_exactness() -> Outcome {
    let registry = IndexRegistry::builtin();
    let opts = ReconstructOptions::from_epsilon(EPS);
    let mut runs = 0;
    let mut iso = 0;
    let mut max_phi: f64 = 0.0;
    let mut max_err: f64 = 0.0;
    let graphs = [test_graph_2d(), test_graph_3d(), hub_and_spoke()];
    for seed in 0..100u64 {
        let truth = &graphs[seed as usize % graphs.len()];
        let options = SampleOptions {
            noise_radius: 0.0,
            ..SampleOptions::for_epsilon(EPS, seed)
        };
        let cloud = sample_graph(truth, EPS, &options).unwrap();
        runs += 1;
        let Ok(model) = reconstruct_and_fit(&cloud, &opts, &FitOptions::default(), &registry) else {
            continue;
        };
        if let Ok(err) = vertex_error(&model.embedded, truth) {
            iso += 1;
            max_err = max_err.max(err.max);
            max_phi = max_phi.max(model.fit.final_objective());
        }
    }
    Outcome::check(
        iso == runs && max_phi <= 1e-12 && max_err <= 1e-6,
        format!(
            "{iso}/{runs} isomorphic, max final objective {max_phi:.3e} (limit 1e-12), \
             max vertex error {max_err:.3e} (limit 1e-6)"
        ),
    )
}

/// Checks the three labeling guarantees on one sampled configuration and
/// returns the number of violations.
fn classifier_violations(truth: &EmbeddedGraph, cloud: &PointCloud, sharp: &[usize]) -> usize {
    let params = ClassifierParams::from_epsilon(EPS);
    let graph = build_graph(cloud, params.required_graph_radius()).unwrap();
    let labels = classify_all(&graph, &params).unwrap();
    let degrees = truth.graph().degrees();
    let mut bad = 0;
    for (i, p) in cloud.points().enumerate() {
        let nearest = truth
            .positions()
            .iter()
            .map(|v| dist(p, v))
            .fold(f64::INFINITY, f64::min);
        if nearest >= 15.0 * EPS && labels.0[i] != 1 {
            bad += 1;
        }
        for (v, pos) in truth.positions().iter().enumerate() {
            let must_be_vertex = degrees[v] >= 3 || sharp.contains(&v);
            if must_be_vertex && dist(p, pos) <= 2.0 * EPS && labels.0[i] != 0 {
                bad += 1;
            }
        }
    }
    bad
}

fn classifier_guarantees() -> Outcome {
    let mut configs: Vec<(String, EmbeddedGraph, Vec<usize>)> = vec![
        ("line".into(), segment(6.0), vec![]),
        ("star3".into(), star(3, 4.0), vec![]),
        ("star4".into(), star(4, 4.0), vec![]),
        ("star5".into(), star(5, 4.0), vec![]),
    ];
    for angle in [30.0, 45.0, 60.0, 75.0, 90.0] {
        configs.push((format!("corner{angle}"), corner(angle, 4.0), vec![1]));
    }
    let mut checked = 0;
    let mut failures = Vec::new();
    for (name, truth, sharp) in &configs {
        for (rho, seeds) in [(0.0, 0..1u64), (EPS / 2.0, 0..5u64)] {
            for seed in seeds {
                for spacing in [EPS / 2.0, EPS / 4.0] {
                    let options = SampleOptions {
                        noise_radius: rho,
                        spacing,
                        seed,
                        include_vertices: true,
                    };
                    let cloud = sample_graph(truth, EPS, &options).unwrap();
                    checked += cloud.len();
                    let bad = classifier_violations(truth, &cloud, sharp);
                    if bad > 0 {
                        failures.push(format!("{name} ρ={rho} seed {seed} s={spacing}: {bad}"));
                    }
                }
            }
        }
    }
    Outcome::check(
        failures.is_empty(),
        format!(
            "{} configurations, {checked} labeled points, violations: {}",
            configs.len(),
            if failures.is_empty() { "none".to_string() } else { failures.join(", ") }
        ),
    )
}

fn optimizer_properties() -> Outcome {
    let registry = IndexRegistry::builtin();
    let opts = ReconstructOptions::from_epsilon(EPS);
    let mut instances = 0;
    let mut monotone = true;
    let mut bounds = true;
    let mut worst_ratio: f64 = 0.0;
    for truth in &[test_graph_2d(), test_graph_3d(), hub_and_spoke()] {
        for seed in 0..4u64 {
            let cloud = sample_graph(truth, EPS, &SampleOptions::for_epsilon(EPS, 100 + seed)).unwrap();
            let Ok(recon) = reconstruct(&cloud, &opts, &registry) else {
                continue;
            };
            let problem = FitProblem::new(&cloud, &recon.stratification).unwrap();
            let result = fit(&problem, &FitOptions::default()).unwrap();
            instances += 1;
            monotone &= result.objective_trace.windows(2).all(|w| w[1] <= w[0]);
            bounds &= result.thetas.iter().all(|t| (0.0..=1.0).contains(t));
            let g = fd_projected_gradient(&problem, &result.vertex_positions, &result.thetas, 1e-6);
            let ratio = g / (1.0 + result.final_objective());
            worst_ratio = worst_ratio.max(ratio);
        }
    }
    Outcome::check(
        instances > 0 && monotone && bounds && worst_ratio <= 1e-4,
        format!(
            "{instances} instances, trace non-increasing: {monotone}, θ within [0,1]: {bounds}, \
             max |∇Φ|/(1+Φ) by finite differences {worst_ratio:.3e} (limit 1e-4)"
        ),
    )
}

fn random_cloud(rng: &mut ChaCha8Rng, n: usize, dim: usize, extent: f64) -> PointCloud {
    let pts = (0..n)
        .map(|_| (0..dim).map(|_| rng.gen_range(0.0..extent)).collect())
        .collect();
    PointCloud::new(pts, EPS).unwrap()
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> AbstractGraph {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.gen_bool(0.5) {
                edges.push((a, b));
            }
        }
    }
    AbstractGraph::new(n, edges).unwrap()
}

fn oracle_equivalences() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut problems = Vec::new();

    let cloud = random_cloud(&mut rng, 2000, 2, 6.0);
    let graph = build_graph(&cloud, 3.0 * EPS).unwrap();
    let oracle = all_pairs_neighbors(&cloud, 3.0 * EPS);
    if graph.adjacency() != oracle.as_slice() {
        problems.push("neighborhood graph".to_string());
    }

    let subset: Vec<usize> = (0..cloud.len()).filter(|i| i % 3 != 0).collect();
    let labeling = graph.components(&subset, 2.0 * EPS).unwrap();
    let mut groups = labeling.groups(&subset);
    groups.sort();
    if groups != bfs_components(&cloud, &subset, 2.0 * EPS) {
        problems.push("components".to_string());
    }

    let mut worst_projection: f64 = 0.0;
    for _ in 0..200 {
        let mut v = || (0..3).map(|_| rng.gen_range(0.0..1.0)).collect::<Vec<f64>>();
        let (p, a, b) = (v(), v(), v());
        let proj = project_to_segment(&p, &a, &b);
        let grid = (0..=1000)
            .map(|k| {
                let t = k as f64 / 1000.0;
                let s: Vec<f64> = a.iter().zip(&b).map(|(x, y)| t * x + (1.0 - t) * y).collect();
                dist(&p, &s).powi(2)
            })
            .fold(f64::INFINITY, f64::min);
        worst_projection = worst_projection.max(grid - proj.dist_sq);
        if proj.dist_sq > grid + 1e-12 || grid - proj.dist_sq > 1e-6 {
            problems.push("projection".to_string());
            break;
        }
    }

    for _ in 0..300 {
        let n = rng.gen_range(1..=5);
        let g1 = random_graph(&mut rng, n);
        let g2 = if rng.gen_bool(0.5) {
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                perm.swap(i, rng.gen_range(0..=i));
            }
            let edges = g1.edges().iter().map(|&(a, b)| (perm[a], perm[b])).collect();
            AbstractGraph::new(n, edges).unwrap()
        } else {
            random_graph(&mut rng, n)
        };
        let found = graph_isomorphic(&g1, &g2).unwrap();
        let oracle = brute_isomorphisms(&g1, &g2);
        let consistent = match &found {
            Some(m) => oracle.contains(m),
            None => oracle.is_empty(),
        };
        if !consistent {
            problems.push(format!("isomorphism on {g1} vs {g2}"));
            break;
        }
    }

    for _ in 0..200 {
        let mut set = || {
            let n = rng.gen_range(1..12);
            (0..n)
                .map(|_| (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect())
                .collect::<Vec<Vec<f64>>>()
        };
        let (a, b, c) = (set(), set(), set());
        let ab = hausdorff(&a, &b).unwrap();
        let bc = hausdorff(&b, &c).unwrap();
        let ac = hausdorff(&a, &c).unwrap();
        if ac > ab + bc + 1e-12 || (ab - brute_hausdorff(&a, &b)).abs() > 1e-12 {
            problems.push("hausdorff".to_string());
            break;
        }
    }

    Outcome::check(
        problems.is_empty(),
        format!(
            "2000-point neighborhood graph, BFS components, 200 projections (max grid gap {worst_projection:.2e}), \
             300 isomorphism pairs, 200 Hausdorff triples; mismatches: {}",
            if problems.is_empty() { "none".to_string() } else { problems.join(", ") }
        ),
    )
}

fn sampler_certification() -> Outcome {
    let graphs = [test_graph_2d(), test_graph_3d(), hub_and_spoke(), star(4, 4.0)];
    let mut valid = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let truth = &graphs[seed as usize % graphs.len()];
        let noise_radius = EPS * [0.0, 0.25, 0.5, 0.9][(seed / 4) as usize % 4];
        let options = SampleOptions {
            noise_radius,
            // fractions of the largest spacing the noise level allows
            spacing: 2.0 * (EPS - noise_radius) * [0.99, 0.5, 0.25][seed as usize % 3],
            seed,
            include_vertices: seed % 5 != 0,
        };
        let cloud = sample_graph(truth, EPS, &options).unwrap();
        let cert = validate_epsilon_sample(&cloud, truth, cloud.epsilon(), None).unwrap();
        worst = worst.max(cert.hausdorff);
        if cert.is_valid {
            valid += 1;
        }
    }
    Outcome::check(
        valid == 100,
        format!("{valid}/100 samples certified, worst Hausdorff distance {worst:.4} (ε = {EPS})"),
    )
}

fn timed_fit(cloud: &PointCloud) -> f64 {
    let registry = IndexRegistry::builtin();
    let recon = reconstruct(cloud, &ReconstructOptions::from_epsilon(EPS), &registry).unwrap();
    let problem = FitProblem::new(cloud, &recon.stratification).unwrap();
    (0..5)
        .map(|_| {
            let start = Instant::now();
            fit(&problem, &FitOptions::default()).unwrap();
            start.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

fn fit_scaling() -> Outcome {
    let truth = test_graph_2d();
    let sample = |spacing: f64| {
        let options = SampleOptions {
            noise_radius: EPS / 4.0,
            spacing,
            seed: 3,
            include_vertices: true,
        };
        sample_graph(&truth, EPS, &options).unwrap()
    };
    let base = sample(EPS / 2.0);
    let large = sample(EPS / 20.0);
    let (t_base, t_large) = (timed_fit(&base), timed_fit(&large));
    let ratio = t_large / t_base;
    Outcome {
        verdict: if ratio <= 20.0 { Verdict::Pass } else { Verdict::Warn },
        detail: format!(
            "{} points in {:.2}ms, {} points in {:.2}ms, ratio {ratio:.1} (soft limit 20)",
            base.len(),
            t_base * 1e3,
            large.len(),
            t_large * 1e3
        ),
    }
}

fn bias_report() -> Outcome {
    let truth = hub_and_spoke();
    let options = BiasOptions::for_epsilon(EPS);
    let full = estimate_bias(&truth, EPS, 100, 11, &options).unwrap();
    let again = estimate_bias(&truth, EPS, 100, 11, &options).unwrap();
    let half = estimate_bias(&truth, EPS, 50, 11, &options).unwrap();
    let reproducible = full == again && half.per_trial[..] == full.per_trial[..50];
    let hub = &full.vertices[0];
    let spokes: Vec<String> = full.vertices[1..]
        .iter()
        .map(|v| format!("v{} |mean| {:.3}", v.vertex, v.mean_norm))
        .collect();
    Outcome::check(
        reproducible && full.trials == 100 && full.vertices.len() == truth.graph().vertex_count(),
        format!(
            "{} trials, {} successes, reproducible: {reproducible}; hub (degree {}) mean displacement \
             [{:.3}, {:.3}] |mean| {:.3}; {}",
            full.trials,
            full.successes,
            hub.degree,
            hub.mean[0],
            hub.mean[1],
            hub.mean_norm,
            spokes.join(", ")
        ),
    )
}
