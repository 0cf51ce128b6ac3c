use std::path::PathBuf;
use std::process::ExitCode;

use bma_cluster::{generate_clusters, index_scan, Algorithm, WeightMode};
use bma_cluster_cli::config::{BuiltinSpec, FileSpec};
use bma_cluster_cli::{configure_threads, io, pipeline, svg, CliError, Config, ModelSpec, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bma-cluster",
    version,
    about = "Bayesian model averaging of clusterings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Average several clusterings into one probabilistic allocation.
    Run(RunArgs),
    /// Tabulate validity indices for one algorithm over a range of k.
    Scan(ScanArgs),
    /// Draw Gaussian clusters with a given separation.
    Simulate(SimulateArgs),
    /// Render a matrix CSV as an SVG heatmap.
    Heatmap(HeatmapArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Feature data CSV.
    #[arg(long)]
    data: Option<PathBuf>,
    /// Allocation CSV (`c1..cK` or `label` header). Repeatable.
    #[arg(long = "alloc")]
    allocs: Vec<PathBuf>,
    /// Built-in model as `algorithm:k[:seed]`, e.g. `kmeans:3`. Repeatable.
    #[arg(long = "model")]
    models: Vec<BuiltinSpec>,
    #[arg(long)]
    k_bma: Option<usize>,
    /// standard, literal or bic.
    #[arg(long)]
    weights_mode: Option<WeightMode>,
    /// Comma-separated prior model probabilities.
    #[arg(long, value_delimiter = ',')]
    prior: Option<Vec<f64>>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    data: PathBuf,
    /// kmeans, hclust or gmm.
    #[arg(long)]
    algorithm: Algorithm,
    #[arg(long, default_value_t = 2)]
    k_min: usize,
    #[arg(long)]
    k_max: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 100)]
    n_per_cluster: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Separation index in [-1, 1).
    #[arg(long, allow_negative_numbers = true)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV; standard output if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HeatmapArgs {
    /// Headerless square CSV with values in [0, 1].
    #[arg(long)]
    matrix: PathBuf,
    /// allocations.csv whose modal labels set the row and column order.
    #[arg(long)]
    order: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|()| dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Run(args) => {
            let out = pipeline::run(&run_config(args)?)?;
            eprintln!(
                "wrote {} files to {}",
                out.files.len(),
                out.out_dir.display()
            );
            Ok(())
        }
        Command::Scan(args) => {
            let data = io::read_dataset(&args.data)?;
            let clusterer = args.algorithm.with_seed(args.seed);
            let rows = index_scan(&data.features, &clusterer, args.k_min..=args.k_max)?;
            emit(args.out, io::scan_csv(&rows))
        }
        Command::Simulate(args) => {
            let sim = generate_clusters(
                args.n_per_cluster,
                args.k,
                args.d,
                args.separation,
                args.seed,
            )?;
            emit(args.out, io::dataset_csv(&sim.features, &sim.labels))
        }
        Command::Heatmap(args) => {
            let m = io::read_matrix(&args.matrix)?;
            let order = args
                .order
                .map(|p| pipeline::read_modal_labels(&p).map(|l| svg::order_by_cluster(&l)))
                .transpose()?;
            io::write_file(&args.out, &svg::heatmap(&m, order.as_deref())?)
        }
    }
}

fn emit(out: Option<PathBuf>, contents: String) -> Result<()> {
    match out {
        Some(path) => io::write_file(&path, &contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

fn run_config(args: RunArgs) -> Result<Config> {
    let mut cfg = match &args.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if args.data.is_some() {
        cfg.data = args.data;
    }
    if !args.allocs.is_empty() || !args.models.is_empty() {
        cfg.models = args
            .allocs
            .into_iter()
            .map(|file| ModelSpec::File(FileSpec { file, id: None }))
            .chain(args.models.into_iter().map(ModelSpec::Builtin))
            .collect();
    }
    if args.k_bma.is_some() {
        cfg.k_bma = args.k_bma;
    }
    if let Some(mode) = args.weights_mode {
        cfg.weights.mode = mode;
    }
    if args.prior.is_some() {
        cfg.weights.prior = args.prior;
    }
    if let Some(v) = args.lambda {
        cfg.ssmf.lambda = v;
    }
    if let Some(v) = args.restarts {
        cfg.ssmf.restarts = v;
    }
    if let Some(v) = args.max_iter {
        cfg.ssmf.max_iter = v;
    }
    if let Some(v) = args.tol {
        cfg.ssmf.tol = v;
    }
    if let Some(v) = args.seed {
        cfg.seed = v;
    }
    if let Some(v) = args.out {
        cfg.out = v;
    }
    if cfg.data.is_none() {
        return Err(CliError::Config(
            "`--data` or a config `data` key is required".into(),
        ));
    }
    Ok(cfg)
}
