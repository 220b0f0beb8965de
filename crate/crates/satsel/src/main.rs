use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use satsel::commands::{self, SynthParams};
use satsel::config::{self, ConfigOverlay, RunConfig};
use satsel::CliError;

/// Solver portfolio selection: preprocessing, forest training,
/// cross-validation, and active-learning experiments.
#[derive(Parser)]
#[command(name = "satsel", version, about, max_term_width = 100)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Master seed; every randomized step derives from it.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// JSON config file; explicit flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (created if absent).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Portfolio: preset3, preset6, preset10, or a comma-separated list
    /// of solver column names. Default keeps all runtime columns.
    #[arg(long, global = true)]
    portfolio: Option<String>,

    /// Censoring cutoff in seconds [default: 1200].
    #[arg(long, global = true)]
    cutoff: Option<f64>,

    /// Query strategy: margin, maxunc, entropy, or passive [default: margin].
    #[arg(long, global = true)]
    strategy: Option<String>,

    /// Number of trees in the forest [default: 99].
    #[arg(long, global = true)]
    trees: Option<usize>,

    /// Initial labeled batch as a fraction of the pool [default: 0.1].
    #[arg(long = "b0-fraction", global = true)]
    b0_fraction: Option<f64>,

    /// Queries per active-learning iteration [default: 25].
    #[arg(long = "batch-size", global = true)]
    batch_size: Option<usize>,

    /// Neighbours for imputation [default: 3].
    #[arg(long, global = true)]
    knn: Option<usize>,

    /// Cross-validation folds [default: 10].
    #[arg(long, global = true)]
    folds: Option<usize>,

    /// Total labels the query loop may spend [default: the whole pool].
    #[arg(long = "label-budget", global = true)]
    label_budget: Option<usize>,

    /// Held-out fraction for learning curves [default: 0.2].
    #[arg(long = "test-fraction", global = true)]
    test_fraction: Option<f64>,

    /// Number of consecutive seeds for learning curves [default: 5].
    #[arg(long = "curve-seeds", global = true)]
    curve_seeds: Option<usize>,

    /// Strategies for `curve`: comma-separated names or `all`
    /// [default: margin,passive].
    #[arg(long, global = true)]
    strategies: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Clean a dataset and write the cleaned files plus a report.
    Preprocess {
        /// Feature CSV (`instance,<feature>,...`).
        #[arg(long)]
        features: PathBuf,
        /// Runtime CSV (`instance,<solver>,...`).
        #[arg(long)]
        runtimes: PathBuf,
    },
    /// Cross-validate a forest; writes metrics as JSON and a table row.
    Cv {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        runtimes: PathBuf,
    },
    /// Run active-learning curves; writes curve and query-log CSVs.
    Curve {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        runtimes: PathBuf,
    },
    /// Extract structural features from DIMACS CNF files.
    Extract {
        /// CNF files; unparseable ones are skipped with a warning.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Generate a synthetic clustered dataset.
    Synth {
        /// Instances.
        #[arg(long, default_value_t = 600)]
        n: usize,
        /// Features.
        #[arg(long, default_value_t = 20)]
        k: usize,
        /// Solvers (= clusters).
        #[arg(long, default_value_t = 3)]
        classes: usize,
        /// Cluster separation; 0 means no signal.
        #[arg(long, default_value_t = 6.0)]
        separation: f64,
        /// Fraction of feature cells masked as missing.
        #[arg(long = "missing-rate", default_value_t = 0.1)]
        missing_rate: f64,
        /// Base runtime scale in seconds.
        #[arg(long = "runtime-scale", default_value_t = 100.0)]
        runtime_scale: f64,
    },
    /// Impute a bare feature matrix and report what was filled in.
    ImputeReport {
        #[arg(long)]
        features: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => Some(config::load_config_file(path)?),
        None => None,
    };
    let flags = ConfigOverlay {
        seed: cli.seed,
        portfolio: cli.portfolio.clone(),
        cutoff_s: cli.cutoff,
        strategy: cli.strategy.clone(),
        trees: cli.trees,
        b0_fraction: cli.b0_fraction,
        batch_size: cli.batch_size,
        knn: cli.knn,
        folds: cli.folds,
        label_budget: cli.label_budget,
        test_fraction: cli.test_fraction,
        curve_seeds: cli.curve_seeds,
        strategies: cli.strategies.clone(),
    };
    let cfg = RunConfig::resolve(file, flags);
    match &cli.command {
        Command::Preprocess { features, runtimes } => {
            commands::cmd_preprocess(features, runtimes, &cli.out, &cfg)
        }
        Command::Cv { features, runtimes } => commands::cmd_cv(features, runtimes, &cli.out, &cfg),
        Command::Curve { features, runtimes } => {
            commands::cmd_curve(features, runtimes, &cli.out, &cfg)
        }
        Command::Extract { inputs } => commands::cmd_extract(inputs, &cli.out, &cfg),
        Command::Synth {
            n,
            k,
            classes,
            separation,
            missing_rate,
            runtime_scale,
        } => {
            let params = SynthParams {
                n: *n,
                k: *k,
                classes: *classes,
                separation: *separation,
                missing_rate: *missing_rate,
                runtime_scale: *runtime_scale,
            };
            commands::cmd_synth(&params, &cli.out, &cfg)
        }
        Command::ImputeReport { features } => {
            commands::cmd_impute_report(features, &cli.out, &cfg)
        }
    }
}
