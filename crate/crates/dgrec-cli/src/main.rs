//! Command-line entry point for the diversified recommender pipeline.

mod commands;
mod config;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use dgrec::dataset::{SplitStrategy, SyntheticSpec};

#[derive(Parser)]
#[command(name = "dgrec", version, about = "Diversified graph-based recommender pipeline")]
struct Cli {
    /// Cap the number of worker threads (default: machine parallelism).
    /// Results are identical regardless of the thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ingest or synthesize interactions, k-core filter, split, write artifacts.
    Prepare(PrepareArgs),
    /// Train a model on a prepared split and save the best checkpoint.
    Train(TrainArgs),
    /// Evaluate a checkpoint (or the popularity baseline) on the test split.
    Evaluate(EvaluateArgs),
    /// Train and evaluate across a list of values for one hyper-parameter.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct PrepareArgs {
    /// Interactions file: `user_id<TAB>item_id` per line.
    #[arg(long, conflicts_with = "synthetic")]
    interactions: Option<PathBuf>,
    /// Categories file: `item_id<TAB>category_id` per line.
    #[arg(long)]
    categories: Option<PathBuf>,

    /// Generate a synthetic long-tail dataset instead of reading files.
    #[arg(long)]
    synthetic: bool,
    #[arg(long, default_value_t = 5_000)]
    users: usize,
    #[arg(long, default_value_t = 3_000)]
    items: usize,
    #[arg(long = "category-count", default_value_t = 40)]
    category_count: usize,
    #[arg(long, default_value_t = 1.2)]
    zipf: f64,
    #[arg(long = "majority-prob", default_value_t = 0.8)]
    majority_prob: f64,
    #[arg(long = "interactions-per-user", default_value_t = 20)]
    interactions_per_user: usize,

    /// Keep only users and items with at least this many interactions.
    #[arg(long = "k-core", default_value_t = 10)]
    k_core: usize,
    /// Train, validation, test fractions.
    #[arg(long, default_value = "0.6,0.2,0.2")]
    split: String,
    /// `per-user` keeps train history for every evaluated user; `global`
    /// shuffles the whole log once.
    #[arg(long = "split-strategy", default_value = "per-user")]
    split_strategy: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Directory produced by `prepare`.
    #[arg(long)]
    split: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Model preset: dgrec, lightgcn, or mf-bpr.
    #[arg(long, default_value = "dgrec")]
    preset: String,
    /// Config file of `key = value` lines overriding the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Individual overrides, e.g. `--set beta=0.95`; apply after the file.
    #[arg(long = "set")]
    overrides: Vec<String>,
    /// Shorthand for `--set seed=N`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, required_unless_present = "popularity")]
    checkpoint: Option<PathBuf>,
    /// Evaluate the non-personalized popularity baseline instead.
    #[arg(long)]
    popularity: bool,
    #[arg(long)]
    split: PathBuf,
    #[arg(long, default_value = "100,300")]
    cutoffs: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    split: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// One of: beta, k, sigma_squared, L.
    #[arg(long)]
    param: String,
    /// Comma-separated values, e.g. `0,0.5,0.9,0.95`.
    #[arg(long)]
    values: String,
    #[arg(long, default_value_t = 100)]
    cutoff: usize,
    #[arg(long, default_value = "dgrec")]
    preset: String,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "set")]
    overrides: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
}

fn run(cli: Cli) -> Result<()> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Prepare(args) => {
            let synthetic = if args.synthetic {
                Some(SyntheticSpec {
                    user_count: args.users,
                    item_count: args.items,
                    category_count: args.category_count,
                    zipf_exponent: args.zipf,
                    majority_interest_prob: args.majority_prob,
                    interactions_per_user: args.interactions_per_user,
                    seed: args.seed,
                })
            } else {
                None
            };
            let strategy = match args.split_strategy.as_str() {
                "per-user" => SplitStrategy::PerUser,
                "global" => SplitStrategy::Global,
                other => anyhow::bail!("unknown split strategy {other}"),
            };
            commands::cmd_prepare(&commands::PrepareOptions {
                interactions: args.interactions,
                categories: args.categories,
                synthetic,
                k_core: args.k_core,
                ratios: pipeline::parse_ratios(&args.split)?,
                strategy,
                seed: args.seed,
                out: args.out,
            })
        }
        Command::Train(args) => commands::cmd_train(&commands::TrainOptions {
            split_dir: args.split,
            out: args.out,
            preset: config::Preset::parse(&args.preset)?,
            config_file: args.config,
            overrides: args.overrides,
            seed: args.seed,
        }),
        Command::Evaluate(args) => commands::cmd_evaluate(&commands::EvaluateOptions {
            checkpoint: args.checkpoint,
            popularity: args.popularity,
            split_dir: args.split,
            cutoffs: pipeline::parse_cutoffs(&args.cutoffs)?,
            out: args.out,
        }),
        Command::Sweep(args) => {
            let values: Vec<f64> = args
                .values
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .with_context(|| format!("cannot parse --values {:?}", args.values))?;
            commands::cmd_sweep(&commands::SweepOptions {
                split_dir: args.split,
                out: args.out,
                param: args.param,
                values,
                cutoff: args.cutoff,
                preset: config::Preset::parse(&args.preset)?,
                config_file: args.config,
                overrides: args.overrides,
                seed: args.seed,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
