use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use stratagraph::fit::{self as fitting, FitOptions, FitProblem, FitResult};
use stratagraph::io::{self, CloudFormat};
use stratagraph::metrics::evaluate as score;
use stratagraph::pipeline::{self, ReconstructOptions, Reconstruction};
use stratagraph::sampler::{check_assumptions, sample_graph, validate_epsilon_sample, SampleOptions};
use stratagraph::spatial::IndexRegistry;
use stratagraph::types::{EmbeddedGraph, PointCloud, Stratification};

use crate::failure::{Failure, Stage};
use crate::manifest::{Artifact, Manifest, Parameters};
use crate::{
    EmitPlotArgs, EvaluateArgs, FitArgs, GenerateArgs, PipelineArgs, ReconstructArgs, SamplingArgs,
    StructureArgs,
};

type Outcome<T = ()> = Result<T, Failure>;

const OUT_DIR_VAR: &str = "STRATAGRAPH_OUT_DIR";

fn positive(name: &str, value: f64) -> Outcome<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Failure::options(format!("{name} must be a positive number, got {value}")))
    }
}

fn load_cloud(path: &Path, epsilon: Option<f64>) -> Outcome<PointCloud> {
    let format = CloudFormat::from_path(path);
    if format == CloudFormat::Csv && epsilon.is_none() {
        return Err(Failure::options(format!(
            "--epsilon is required for CSV cloud {}",
            path.display()
        )));
    }
    if let Some(eps) = epsilon {
        positive("--epsilon", eps)?;
    }
    io::read_cloud(path, format, epsilon).map_err(Failure::input)
}

fn load_graph(path: &Path) -> Outcome<EmbeddedGraph> {
    io::read_embedded_graph(path).map_err(Failure::input)
}

fn load_stratification(path: &Path, cloud: &PointCloud) -> Outcome<Stratification> {
    let s = io::read_stratification(path).map_err(Failure::input)?;
    s.validate(cloud.len()).map_err(Failure::input)?;
    Ok(s)
}

fn sample_options(epsilon: f64, args: &SamplingArgs) -> SampleOptions {
    let defaults = SampleOptions::for_epsilon(epsilon, args.seed);
    SampleOptions {
        noise_radius: args.noise.unwrap_or(defaults.noise_radius),
        spacing: args.spacing.unwrap_or(defaults.spacing),
        seed: args.seed,
        include_vertices: !args.no_vertex_sites,
    }
}

fn reconstruct_options(epsilon: f64, args: &StructureArgs) -> Outcome<ReconstructOptions> {
    let mut options = ReconstructOptions::from_epsilon(epsilon);
    if let Some(t) = args.vertex_threshold {
        options.clusters.vertex_threshold = positive("--vertex-threshold", t)?;
    }
    options.index = args.index.clone();
    IndexRegistry::builtin().get(&options.index)?;
    Ok(options)
}

/// Samples and certifies; the certificate line is printed either way.
fn sample_certified(graph: &EmbeddedGraph, epsilon: f64, options: &SampleOptions) -> Outcome<PointCloud> {
    positive("--epsilon", epsilon)?;
    let report = check_assumptions(graph, epsilon).map_err(Failure::input)?;
    if !report.pass {
        eprintln!("warning: graph violates sampling assumptions: {}", report.violations.join("; "));
    }
    let cloud = sample_graph(graph, epsilon, options)?;
    let cert = validate_epsilon_sample(&cloud, graph, epsilon, None)?;
    let verdict = if cert.is_valid { "ok" } else { "FAILED" };
    println!(
        "d_H ≤ {epsilon}: {verdict} (d_H = {:.6}, sample→graph {:.6}, graph→sample {:.6})",
        cert.hausdorff, cert.sample_to_graph, cert.graph_to_sample
    );
    if !cert.is_valid {
        return Err(Failure::new(
            Stage::Reconstruct,
            format!("sample is not an {epsilon}-sample: d_H = {}", cert.hausdorff),
        ));
    }
    Ok(cloud)
}

fn run_reconstruct(cloud: &PointCloud, options: &ReconstructOptions) -> Outcome<Reconstruction> {
    let recon = pipeline::reconstruct(cloud, options, &IndexRegistry::builtin())?;
    let s = &recon.stratification;
    println!(
        "{} vertex clusters, {} edge clusters: {}",
        s.vertex_clusters.len(),
        s.edge_clusters.len(),
        recon.graph
    );
    Ok(recon)
}

fn run_fit(cloud: &PointCloud, s: &Stratification, max_iters: usize) -> Outcome<(FitResult, EmbeddedGraph)> {
    let problem = FitProblem::new(cloud, s).map_err(Failure::input)?;
    let options = FitOptions {
        max_iters,
        ..FitOptions::default()
    };
    let result = fitting::fit(&problem, &options).map_err(|e| Failure::new(Stage::Fit, e.to_string()))?;
    let graph = s.abstract_graph().map_err(Failure::input)?;
    let embedded = result
        .embedded_graph(&graph)
        .map_err(|e| Failure::new(Stage::Fit, e.to_string()))?;
    println!(
        "objective {:.6e} after {} iterations ({})",
        result.final_objective(),
        result.iterations,
        if result.converged { "converged" } else { "not converged" }
    );
    if !result.pinned.is_empty() {
        eprintln!("warning: vertices {:?} had no data and were held in place", result.pinned);
    }
    Ok((result, embedded))
}

fn not_converged(result: &FitResult) -> Failure {
    Failure::new(
        Stage::Fit,
        format!(
            "fit did not converge within {} iterations (objective {:e})",
            result.iterations,
            result.final_objective()
        ),
    )
}

pub fn generate(args: &GenerateArgs) -> Outcome {
    let graph = load_graph(&args.graph)?;
    let options = sample_options(args.epsilon, &args.sampling);
    let cloud = sample_certified(&graph, args.epsilon, &options)?;
    io::write_cloud(&args.out, CloudFormat::from_path(&args.out), &cloud)?;
    println!("wrote {} points to {}", cloud.len(), args.out.display());
    Ok(())
}

pub fn reconstruct(args: &ReconstructArgs) -> Outcome {
    let options = reconstruct_options(positive("--epsilon", args.epsilon)?, &args.structure)?;
    let cloud = load_cloud(&args.cloud, Some(args.epsilon))?;
    let recon = run_reconstruct(&cloud, &options)?;
    io::write_stratification(&args.out, &recon.stratification)?;
    Ok(())
}

pub fn fit(args: &FitArgs) -> Outcome {
    let cloud = load_cloud(&args.cloud, args.epsilon)?;
    let s = load_stratification(&args.stratification, &cloud)?;
    let (result, embedded) = run_fit(&cloud, &s, args.max_iters)?;
    io::write_report(&args.out, &result)?;
    if let Some(path) = &args.graph_out {
        io::write_embedded_graph(path, &embedded)?;
    }
    if result.converged {
        Ok(())
    } else {
        Err(not_converged(&result))
    }
}

pub fn evaluate(args: &EvaluateArgs) -> Outcome {
    let fitted = load_graph(&args.fitted)?;
    let truth = load_graph(&args.truth)?;
    let cloud = match &args.cloud {
        Some(path) => Some(load_cloud(path, args.epsilon)?),
        None => None,
    };
    if fitted.dim() != truth.dim() {
        return Err(Failure::new(Stage::Io, "fitted and true graphs differ in dimension"));
    }
    let report = score(&fitted, &truth, cloud.as_ref())?;
    io::write_report(&args.out, &report)?;
    match report.max_vertex_error {
        Some(max) => println!(
            "isomorphic: true, max vertex error {max:.6}, mean {:.6}",
            report.mean_vertex_error.unwrap_or(0.0)
        ),
        None => println!("isomorphic: false"),
    }
    Ok(())
}

fn out_dir(args: &PipelineArgs) -> Outcome<PathBuf> {
    match &args.out_dir {
        Some(dir) => Ok(dir.clone()),
        None => std::env::var_os(OUT_DIR_VAR)
            .map(PathBuf::from)
            .ok_or_else(|| Failure::options(format!("--out-dir not given and {OUT_DIR_VAR} unset"))),
    }
}

pub fn pipeline(args: &PipelineArgs) -> Outcome {
    let dir = out_dir(args)?;
    let epsilon = positive("--epsilon", args.epsilon)?;
    let recon_options = reconstruct_options(epsilon, &args.structure)?;
    let sample_opts = sample_options(epsilon, &args.sampling);
    let truth = load_graph(&args.graph)?;
    fs::create_dir_all(&dir).map_err(|e| Failure::new(Stage::Io, format!("{}: {e}", dir.display())))?;

    let cloud = sample_certified(&truth, epsilon, &sample_opts)?;
    let mut artifacts = Vec::new();
    let mut save = |name: &str, file: &str, write: &dyn Fn(&Path) -> stratagraph::Result<()>| -> Outcome {
        let path = dir.join(file);
        write(&path)?;
        artifacts.push(Artifact::of(name, file, &path)?);
        Ok(())
    };
    save("cloud", "cloud.json", &|p| io::write_cloud(p, CloudFormat::Json, &cloud))?;
    let recon = run_reconstruct(&cloud, &recon_options)?;
    save("stratification", "stratification.json", &|p| {
        io::write_stratification(p, &recon.stratification)
    })?;
    let (result, fitted) = run_fit(&cloud, &recon.stratification, args.max_iters)?;
    save("fit", "fit.json", &|p| io::write_report(p, &result))?;
    save("fitted_graph", "fitted_graph.json", &|p| io::write_embedded_graph(p, &fitted))?;
    let report = score(&fitted, &truth, Some(&cloud))?;
    save("evaluation", "evaluation.json", &|p| io::write_report(p, &report))?;

    let manifest = Manifest {
        tool: "stratagraph".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        input: Artifact::of("graph", &args.graph.display().to_string(), &args.graph)?,
        seed: args.sampling.seed,
        parameters: Parameters {
            epsilon,
            noise_radius: sample_opts.noise_radius,
            spacing: sample_opts.spacing,
            vertex_sites: sample_opts.include_vertices,
            vertex_threshold: recon_options.clusters.vertex_threshold,
            edge_threshold: recon_options.clusters.edge_threshold,
            link_threshold: recon_options.clusters.link_threshold,
            index: recon_options.index.clone(),
            max_iters: args.max_iters,
        },
        converged: result.converged,
        isomorphic: report.isomorphic,
        artifacts,
    };
    io::write_report(&dir.join("manifest.json"), &manifest)?;
    println!(
        "isomorphic: {}; wrote {} artifacts and manifest.json to {}",
        report.isomorphic,
        manifest.artifacts.len(),
        dir.display()
    );
    if result.converged {
        Ok(())
    } else {
        Err(not_converged(&result))
    }
}

fn push_coords(row: &mut String, coords: &[f64]) {
    for x in coords {
        write!(row, "{x},").expect("writing to a String");
    }
}

pub fn emit_plot(args: &EmitPlotArgs) -> Outcome {
    if args.stratification.is_none() && args.fitted.is_none() {
        return Err(Failure::options("emit-plot needs --stratification, --fitted or both"));
    }
    let cloud = load_cloud(&args.cloud, args.epsilon)?;
    let strat = match &args.stratification {
        Some(path) => Some(load_stratification(path, &cloud)?),
        None => None,
    };
    let fitted = match &args.fitted {
        Some(path) => Some(load_graph(path)?),
        None => None,
    };
    if let Some(g) = &fitted {
        if g.dim().is_some_and(|d| d != cloud.dim()) {
            return Err(Failure::new(Stage::Io, "fitted graph and cloud differ in dimension"));
        }
    }

    let mut text = String::from("kind,");
    for d in 0..cloud.dim() {
        write!(text, "x{d},").expect("writing to a String");
    }
    text.push_str("label,cluster\n");
    let cluster_of = strat.as_ref().map(Stratification::cluster_of);
    for (i, p) in cloud.points().enumerate() {
        text.push_str("point,");
        push_coords(&mut text, p);
        match (&strat, &cluster_of) {
            (Some(s), Some(c)) => writeln!(text, "{},{}", s.labels.0[i], c[i]),
            _ => writeln!(text, ","),
        }
        .expect("writing to a String");
    }
    if let Some(g) = &fitted {
        for (v, p) in g.positions().iter().enumerate() {
            text.push_str("fitted_vertex,");
            push_coords(&mut text, p);
            writeln!(text, "0,{v}").expect("writing to a String");
        }
    }
    io::write_text(&args.out, &text)?;
    println!(
        "wrote {} point rows and {} vertex rows to {}",
        cloud.len(),
        fitted.as_ref().map_or(0, |g| g.graph().vertex_count()),
        args.out.display()
    );
    Ok(())
}
