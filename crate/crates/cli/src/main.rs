//! Command-line entry point: generate or convert datasets, run
//! experiments, and compute one-off graph distances, all driven by a
//! single TOML configuration file. Flags only override seed, output
//! directory, and repetition count.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use protostream_core::config::RunConfigFile;
use protostream_core::error::Error;
use protostream_core::experiment::{execute_run, exit_code, write_dataset_files};
use protostream_core::ged::{distance, EdgeSubstMetric, GedCostModel, GedPolicy, NodeSubstMetric};
use protostream_core::io::gxl::{parse_gxl, AttributeSchema};

#[derive(Parser)]
#[command(
    name = "protostream",
    version,
    about = "Streaming graph classification harness"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Path to the run configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Override the configured output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the configured base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the configured repetition count.
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the configured synthetic dataset as stream files.
    Generate(ConfigArgs),
    /// Convert the configured GXL/CXL corpus into stream files.
    Convert(ConfigArgs),
    /// Execute the configured experiment and write result CSVs.
    Run(ConfigArgs),
    /// Compute the edit distance between two GXL graphs.
    Ged(GedArgs),
}

#[derive(Args)]
struct GedArgs {
    /// First GXL file.
    graph_a: PathBuf,
    /// Second GXL file.
    graph_b: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    node_insert: f64,
    #[arg(long, default_value_t = 1.0)]
    node_delete: f64,
    #[arg(long, default_value_t = 1.0)]
    edge_insert: f64,
    #[arg(long, default_value_t = 1.0)]
    edge_delete: f64,
    /// Node substitution metric: euclidean, discrete, or a scale factor.
    #[arg(long, default_value = "euclidean")]
    node_subst: String,
    /// Edge substitution metric: euclidean, angle, discrete, or zero.
    #[arg(long, default_value = "zero")]
    edge_subst: String,
    /// Exact search is used when both graphs have at most this many nodes.
    #[arg(long, default_value_t = 10)]
    exact_below: usize,
    /// State-expansion budget for the exact search.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
}

fn load_config(args: &ConfigArgs) -> Result<RunConfigFile, Error> {
    let mut cfg = RunConfigFile::load(&args.config)?;
    if let Some(out) = &args.out {
        cfg.output_dir = out.clone();
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(reps) = args.reps {
        cfg.repetitions = reps;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_generate(args: &ConfigArgs) -> Result<(), Error> {
    let cfg = load_config(args)?;
    if cfg.dataset.synthetic.is_none() {
        return Err(Error::Config(
            "generate needs a [dataset.synthetic] section".into(),
        ));
    }
    let (warm, stream) = write_dataset_files(&cfg)?;
    println!("wrote {}", warm.display());
    println!("wrote {}", stream.display());
    Ok(())
}

fn cmd_convert(args: &ConfigArgs) -> Result<(), Error> {
    let cfg = load_config(args)?;
    if cfg.dataset.gxl.is_none() {
        return Err(Error::Config(
            "convert needs a [dataset.gxl] section".into(),
        ));
    }
    let (warm, stream) = write_dataset_files(&cfg)?;
    println!("wrote {}", warm.display());
    println!("wrote {}", stream.display());
    Ok(())
}

fn cmd_run(args: &ConfigArgs) -> Result<(), Error> {
    let cfg = load_config(args)?;
    let artifacts = execute_run(&cfg)?;
    println!("wrote {}", artifacts.steps_csv.display());
    println!("wrote {}", artifacts.aggregate_csv.display());
    println!("wrote {}", artifacts.metadata.display());
    Ok(())
}

fn parse_node_metric(text: &str) -> Result<NodeSubstMetric, Error> {
    match text {
        "euclidean" => Ok(NodeSubstMetric::Euclidean),
        "discrete" => Ok(NodeSubstMetric::Discrete),
        other => other
            .parse::<f64>()
            .map(NodeSubstMetric::ScaledEuclidean)
            .map_err(|_| Error::Config(format!("unknown node substitution metric '{other}'"))),
    }
}

fn parse_edge_metric(text: &str) -> Result<EdgeSubstMetric, Error> {
    match text {
        "euclidean" => Ok(EdgeSubstMetric::Euclidean),
        "angle" => Ok(EdgeSubstMetric::AbsoluteAngleDifference),
        "discrete" => Ok(EdgeSubstMetric::Discrete),
        "zero" => Ok(EdgeSubstMetric::Zero),
        other => Err(Error::Config(format!(
            "unknown edge substitution metric '{other}'"
        ))),
    }
}

fn cmd_ged(args: &GedArgs) -> Result<(), Error> {
    let read = |path: &PathBuf| -> Result<String, Error> {
        std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })
    };
    let schema = AttributeSchema::default();
    let a = parse_gxl(&read(&args.graph_a)?, &schema)?;
    let b = parse_gxl(&read(&args.graph_b)?, &schema)?;
    let cm = GedCostModel {
        node_insert_cost: args.node_insert,
        node_delete_cost: args.node_delete,
        edge_insert_cost: args.edge_insert,
        edge_delete_cost: args.edge_delete,
        node_subst_metric: parse_node_metric(&args.node_subst)?,
        edge_subst_metric: parse_edge_metric(&args.edge_subst)?,
    };
    let policy = GedPolicy {
        exact_below_n_nodes: args.exact_below,
        budget: args.budget,
    };
    let result = distance(&a, &b, &cm, &policy)?;
    println!(
        "distance {} exact {} expanded_states {}",
        result.distance, result.exact, result.expanded_states
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Convert(args) => cmd_convert(args),
        Command::Run(args) => cmd_run(args),
        Command::Ged(args) => cmd_ged(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
