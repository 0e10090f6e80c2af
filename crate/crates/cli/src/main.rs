use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ditmo_core::inpaint::conformance::{self, Outcome};
use ditmo_core::inpaint::HttpBackend;
use ditmo_core::masking::SemanticClass;
use ditmo_core::pipeline::{
    graph_build, run, BackendConfig, PipelineConfig, PipelineError, RunOptions, Stage, EXIT_BACKEND,
    EXIT_CONFIG,
};

#[derive(Parser)]
#[command(name = "ditmo", version, about = "Semantic inverse tone mapping of single SDR images")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct an HDR image from one SDR image.
    Run(RunArgs),
    /// Ordering graph tools.
    Graph {
        #[command(subcommand)]
        command: GraphCommand,
    },
    /// Check an inference server against the wire protocol.
    Conformance(ConformanceArgs),
}

#[derive(Subcommand)]
enum GraphCommand {
    /// Build the ordering graph from a directory of .hdr files with label sidecars.
    Build(GraphBuildArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendKind {
    Mock,
    Http,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// JSON config; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long, value_enum)]
    backend: Option<BackendKind>,
    #[arg(long)]
    backend_url: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sat_threshold: Option<f32>,
    #[arg(long)]
    exposure_percentile: Option<f64>,
    /// Erosion radius for every class (overrides the pair table).
    #[arg(long)]
    alpha: Option<u32>,
    /// Dilation radius for every class (overrides the pair table).
    #[arg(long)]
    beta: Option<u32>,
    /// Fixed prompt for a class, e.g. `sky=stormy clouds`. Repeatable.
    #[arg(long, value_parser = parse_override)]
    prompt_override: Vec<(SemanticClass, String)>,
    /// Write masks, patches and brackets to this directory.
    #[arg(long)]
    dump_debug: Option<PathBuf>,
    /// Print the output's dynamic range in stops as one JSON line.
    #[arg(long)]
    report_dr: bool,
}

#[derive(Args)]
struct GraphBuildArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    albedo: Option<PathBuf>,
    #[arg(long)]
    prompts: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ConformanceArgs {
    #[arg(long)]
    url: String,
    /// Server's maximum image dimension; enables the 413 check.
    #[arg(long)]
    max_dimension: Option<usize>,
}

fn parse_override(s: &str) -> Result<(SemanticClass, String), String> {
    let (class, text) = s
        .split_once('=')
        .ok_or_else(|| format!("expected <class>=<text>, got {s:?}"))?;
    Ok((class.trim().parse()?, text.to_string()))
}

fn load_config(path: &Path) -> Result<PipelineConfig, PipelineError> {
    let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(Stage::Config, path, e))?;
    PipelineConfig::from_json(&text)
}

fn build_config(a: &RunArgs) -> Result<PipelineConfig, PipelineError> {
    let mut cfg = match &a.config {
        Some(p) => load_config(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(g) = &a.graph {
        cfg.graph = Some(g.clone());
    }
    match (a.backend, &a.backend_url) {
        (Some(BackendKind::Mock), _) => cfg.backend = BackendConfig::default(),
        (Some(BackendKind::Http), Some(url)) => cfg.backend = BackendConfig::http(url),
        (Some(BackendKind::Http), None) => match &cfg.backend {
            BackendConfig::Http { .. } => {}
            BackendConfig::Mock { .. } => {
                return Err(PipelineError::config("--backend http requires --backend-url"))
            }
        },
        (None, Some(url)) => match &mut cfg.backend {
            BackendConfig::Http { url: u, .. } => *u = url.clone(),
            BackendConfig::Mock { .. } => {
                return Err(PipelineError::config("--backend-url requires --backend http"))
            }
        },
        (None, None) => {}
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(t) = a.sat_threshold {
        cfg.sat_threshold = t;
    }
    if let Some(p) = a.exposure_percentile {
        cfg.exposure_percentile = p;
    }
    if a.alpha.is_some() {
        cfg.opening.alpha = a.alpha;
    }
    if a.beta.is_some() {
        cfg.opening.beta = a.beta;
    }
    for (class, text) in &a.prompt_override {
        cfg.prompt_overrides.insert(*class, text.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(a: RunArgs) -> Result<(), PipelineError> {
    let cfg = build_config(&a)?;
    let report = run(
        &a.input,
        &a.output,
        &cfg,
        &RunOptions {
            dump_debug: a.dump_debug.clone(),
        },
    )?;
    log::info!(
        "wrote {} and {}",
        report.output.display(),
        report.manifest_path.display()
    );
    if a.report_dr {
        let line = serde_json::json!({
            "dynamic_range_stops": report.manifest.dynamic_range,
            "input_dynamic_range_stops": report.manifest.input_dynamic_range,
        });
        println!("{line}");
    }
    Ok(())
}

fn cmd_graph_build(a: GraphBuildArgs) -> Result<(), PipelineError> {
    let report = graph_build(&a.dataset, a.albedo.as_deref(), a.prompts.as_deref(), &a.out)?;
    println!(
        "{} images used, {} skipped",
        report.used.len(),
        report.skipped.len()
    );
    for e in &report.edges {
        println!("{} -> {}\tweight {:.6}\tcount {}", e.from, e.to, e.weight, e.count);
    }
    Ok(())
}

fn cmd_conformance(a: ConformanceArgs) -> ExitCode {
    let backend = match HttpBackend::new(&a.url) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let report = conformance::run(
        &backend,
        &conformance::Options {
            max_dimension: a.max_dimension,
        },
    );
    for c in &report.checks {
        match &c.outcome {
            Outcome::Pass => println!("PASS {}", c.name),
            Outcome::Fail(why) => println!("FAIL {}: {why}", c.name),
            Outcome::Skipped(why) => println!("SKIP {}: {why}", c.name),
        }
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_BACKEND as u8)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Graph {
            command: GraphCommand::Build(a),
        } => cmd_graph_build(a),
        Command::Conformance(a) => return cmd_conformance(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
