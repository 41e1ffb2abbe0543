//! `stratagraph`: sample, reconstruct, fit and score linearly embedded graphs.

mod commands;
mod failure;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use failure::Failure;

#[derive(Parser)]
#[command(name = "stratagraph", version, about = "Reconstruct embedded graphs from noisy samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a point cloud from an embedded graph and certify it.
    Generate(GenerateArgs),
    /// Label, cluster and link a cloud into a stratification.
    Reconstruct(ReconstructArgs),
    /// Fit vertex positions to a stratified cloud.
    Fit(FitArgs),
    /// Score a fitted graph against the true one.
    Evaluate(EvaluateArgs),
    /// Run every stage into one directory with a manifest.
    Pipeline(PipelineArgs),
    /// Write per-point CSV for plotting.
    EmitPlot(EmitPlotArgs),
}

#[derive(Args)]
pub struct SamplingArgs {
    /// Noise radius ρ; defaults to ε/2.
    #[arg(long)]
    pub noise: Option<f64>,
    /// Maximum gap between sample sites along an edge; defaults to ε/2.
    #[arg(long)]
    pub spacing: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Do not place a sample on every vertex.
    #[arg(long)]
    pub no_vertex_sites: bool,
}

#[derive(Args)]
pub struct StructureArgs {
    /// Distance joining dimension-0 samples into one vertex; defaults to 10ε.
    #[arg(long)]
    pub vertex_threshold: Option<f64>,
    /// Spatial index backend.
    #[arg(long, default_value = stratagraph::neighborhood::DEFAULT_INDEX)]
    pub index: String,
}

#[derive(Args)]
pub struct GenerateArgs {
    /// Embedded graph JSON.
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    /// Output cloud; `.csv` for CSV, anything else for JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ReconstructArgs {
    #[arg(long)]
    pub cloud: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    #[command(flatten)]
    pub structure: StructureArgs,
    /// Output stratification JSON.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct FitArgs {
    #[arg(long)]
    pub cloud: PathBuf,
    /// Needed when the cloud is CSV.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub stratification: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    /// Output fit result JSON.
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the fitted embedded graph.
    #[arg(long)]
    pub graph_out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Fitted embedded graph JSON.
    #[arg(long)]
    pub fitted: PathBuf,
    /// True embedded graph JSON.
    #[arg(long)]
    pub truth: PathBuf,
    /// Cloud for the sample-to-model Hausdorff distance.
    #[arg(long)]
    pub cloud: Option<PathBuf>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub epsilon: f64,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[command(flatten)]
    pub structure: StructureArgs,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    /// Output directory; falls back to $STRATAGRAPH_OUT_DIR.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Args)]
pub struct EmitPlotArgs {
    #[arg(long)]
    pub cloud: PathBuf,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub stratification: Option<PathBuf>,
    /// Fitted embedded graph JSON; adds one row per vertex.
    #[arg(long)]
    pub fitted: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let text = e.to_string();
            let message: Vec<&str> = text
                .lines()
                .map(str::trim)
                .take_while(|l| !l.starts_with("Usage:"))
                .filter(|l| !l.is_empty())
                .collect();
            let message = message.join(" ");
            let message = message.strip_prefix("error: ").unwrap_or(&message);
            eprintln!("{}", Failure::options(message));
            return ExitCode::from(failure::Stage::Options.code());
        }
    };
    let result = match cli.command {
        Command::Generate(a) => commands::generate(&a),
        Command::Reconstruct(a) => commands::reconstruct(&a),
        Command::Fit(a) => commands::fit(&a),
        Command::Evaluate(a) => commands::evaluate(&a),
        Command::Pipeline(a) => commands::pipeline(&a),
        Command::EmitPlot(a) => commands::emit_plot(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.stage.code())
        }
    }
}
