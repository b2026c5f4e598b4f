//! The four operator commands: prepare, train, evaluate, sweep.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use dgrec::dataset::{self, CategoryAssignment, InteractionLog, SplitStrategy, SyntheticSpec};
use dgrec::evaluation::{self, Scorer};
use dgrec::graph::SelectedNeighborhoods;
use dgrec::model::{self, forward, Checkpoint};
use dgrec::training::{fit, refresh_neighborhoods, TrainConfig};

use crate::config::{self, Preset};
use crate::pipeline::{self, BuiltGraph, OutputGuard};

pub struct PrepareOptions {
    pub interactions: Option<PathBuf>,
    pub categories: Option<PathBuf>,
    pub synthetic: Option<SyntheticSpec>,
    pub k_core: usize,
    pub ratios: (f64, f64, f64),
    pub strategy: SplitStrategy,
    pub seed: u64,
    pub out: PathBuf,
}

/// Ingest (or synthesize), k-core filter, split, and write the dataset
/// artifacts. Prints the dataset statistics table.
pub fn cmd_prepare(opts: &PrepareOptions) -> Result<()> {
    let (log, assignment) = match (&opts.synthetic, &opts.interactions) {
        (Some(spec), None) => dataset::generate_synthetic(spec)?,
        (None, Some(interactions)) => {
            let categories = opts
                .categories
                .as_ref()
                .context("--categories is required with --interactions")?;
            dataset::ingest(interactions, categories)?
        }
        (Some(_), Some(_)) => bail!("--synthetic and --interactions are mutually exclusive"),
        (None, None) => bail!("either --synthetic or --interactions is required"),
    };

    let filtered = dataset::k_core_filter(&log, opts.k_core)?;
    let bundle = dataset::split_with(&filtered, opts.ratios, opts.seed, opts.strategy)?;

    // Keep category entries only for items that survived filtering.
    let kept_items: HashSet<&str> = filtered.records.iter().map(|(_, i)| i.as_str()).collect();
    let assignment: CategoryAssignment = assignment
        .into_iter()
        .filter(|(item, _)| kept_items.contains(item.as_str()))
        .collect();

    let mut guard = OutputGuard::new();
    let dir = &opts.out;
    write_log(&mut guard, &dir.join(pipeline::TRAIN_FILE), &bundle.train)?;
    write_log(
        &mut guard,
        &dir.join(pipeline::VALIDATION_FILE),
        &bundle.validation,
    )?;
    write_log(&mut guard, &dir.join(pipeline::TEST_FILE), &bundle.test)?;
    let mut categories_text = String::new();
    let mut entries: Vec<(&String, &String)> = assignment.iter().collect();
    entries.sort_unstable();
    for (item, cat) in entries {
        let _ = writeln!(categories_text, "{item}\t{cat}");
    }
    guard.write(&dir.join(pipeline::CATEGORIES_FILE), &categories_text)?;
    guard.write(
        &dir.join(pipeline::MANIFEST_FILE),
        &dataset::render_manifest(&bundle, &assignment),
    )?;
    guard.finish();

    let (users, items) = filtered.entity_counts();
    let category_count = assignment
        .values()
        .collect::<HashSet<_>>()
        .len();
    println!("dataset statistics ({}):", dir.display());
    println!("  users                 {users}");
    println!("  items                 {items}");
    println!("  interactions          {}", filtered.len());
    println!("  categories            {category_count}");
    println!(
        "  average category size {:.3}",
        items as f64 / category_count.max(1) as f64
    );
    Ok(())
}

fn write_log(guard: &mut OutputGuard, path: &Path, log: &InteractionLog) -> Result<()> {
    let mut text = String::with_capacity(log.len() * 16);
    for (u, i) in &log.records {
        let _ = writeln!(text, "{u}\t{i}");
    }
    guard.write(path, &text)
}

pub struct TrainOptions {
    pub split_dir: PathBuf,
    pub out: PathBuf,
    pub preset: Preset,
    pub config_file: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub seed: Option<u64>,
}

/// Train on a prepared split and write the best checkpoint plus the log.
pub fn cmd_train(opts: &TrainOptions) -> Result<()> {
    let mut overrides = opts.overrides.clone();
    if let Some(seed) = opts.seed {
        overrides.push(format!("seed={seed}"));
    }
    let cfg = config::resolve_train_config(opts.preset, opts.config_file.as_deref(), &overrides)?;

    let split = pipeline::load_split(&opts.split_dir)?;
    let built = pipeline::build_from_split(&split)?;
    let validation = built.maps.map_log(&split.validation);

    let out = fit(&built.graph, &built.categories, &validation, &cfg)?;

    let checkpoint = Checkpoint {
        params: out.params,
        user_count: built.graph.user_count(),
        item_count: built.graph.item_count(),
        seed: cfg.seed,
        generation: out.generation,
        config_pairs: cfg.to_pairs(),
    };

    let mut guard = OutputGuard::new();
    let ckpt_path = opts.out.join(pipeline::CHECKPOINT_FILE);
    guard.write(&ckpt_path, &model::render_checkpoint(&checkpoint))?;
    guard.write(
        &opts.out.join(pipeline::TRAINING_LOG_FILE),
        &out.log.to_csv(),
    )?;
    guard.finish();

    if let Some(last) = out.log.entries.last() {
        println!(
            "trained {} epochs; best val recall@{} snapshot saved to {}",
            last.epoch,
            cfg.val_cutoff,
            ckpt_path.display()
        );
    } else {
        println!("no epochs run; initial parameters saved to {}", ckpt_path.display());
    }
    Ok(())
}

pub struct EvaluateOptions {
    pub checkpoint: Option<PathBuf>,
    pub popularity: bool,
    pub split_dir: PathBuf,
    pub cutoffs: Vec<usize>,
    pub out: PathBuf,
}

/// Score the held-out test set and write `metrics.csv`.
pub fn cmd_evaluate(opts: &EvaluateOptions) -> Result<()> {
    let split = pipeline::load_split(&opts.split_dir)?;
    let built = pipeline::build_from_split(&split)?;
    let test_sets = evaluation::group_by_user(&built.maps.map_log(&split.test));

    let report = if opts.popularity {
        ensure!(
            opts.checkpoint.is_none(),
            "--popularity does not take a checkpoint"
        );
        let scores = evaluation::popularity_scores(&built.graph);
        evaluation::evaluate(
            &Scorer::ItemScores(&scores),
            &built.graph,
            &test_sets,
            &built.categories,
            &opts.cutoffs,
        )?
    } else {
        let path = opts
            .checkpoint
            .as_ref()
            .context("--checkpoint is required unless --popularity is set")?;
        let checkpoint = model::load_checkpoint(path)?;
        ensure!(
            checkpoint.user_count == built.graph.user_count()
                && checkpoint.item_count == built.graph.item_count(),
            "checkpoint shape ({} users, {} items) does not match split ({} users, {} items)",
            checkpoint.user_count,
            checkpoint.item_count,
            built.graph.user_count(),
            built.graph.item_count()
        );
        let cfg = TrainConfig::from_pairs(&checkpoint.config_pairs)?;
        let neighborhoods = rebuild_neighborhoods(&built, &checkpoint, &cfg)?;
        let fwd = forward(
            &built.graph,
            &neighborhoods,
            &checkpoint.params,
            &cfg.forward_config(),
        );
        evaluation::evaluate(
            &Scorer::DotProduct(&fwd.final_embeddings),
            &built.graph,
            &test_sets,
            &built.categories,
            &opts.cutoffs,
        )?
        .with_metadata(config::config_hash(&cfg), cfg.seed)
    };

    let mut guard = OutputGuard::new();
    guard.write(&opts.out.join(pipeline::METRICS_FILE), &report.to_csv())?;
    guard.finish();
    print!("{}", report.render_table());
    Ok(())
}

/// Selection is a function of the trained parameters, so evaluation rebuilds
/// the selected neighborhoods the checkpoint would use.
fn rebuild_neighborhoods(
    built: &BuiltGraph,
    checkpoint: &Checkpoint,
    cfg: &TrainConfig,
) -> Result<SelectedNeighborhoods> {
    let previous =
        SelectedNeighborhoods::full(&built.graph, checkpoint.generation.saturating_sub(1));
    if !cfg.use_selection {
        return Ok(SelectedNeighborhoods::full(&built.graph, checkpoint.generation));
    }
    Ok(refresh_neighborhoods(
        &built.graph,
        &built.categories,
        &checkpoint.params,
        &previous,
        cfg,
    )?)
}

pub struct SweepOptions {
    pub split_dir: PathBuf,
    pub out: PathBuf,
    pub param: String,
    pub values: Vec<f64>,
    pub cutoff: usize,
    pub preset: Preset,
    pub config_file: Option<PathBuf>,
    pub overrides: Vec<String>,
    pub seed: Option<u64>,
}

/// Train and evaluate once per parameter value, emitting one CSV row each.
pub fn cmd_sweep(opts: &SweepOptions) -> Result<()> {
    ensure!(!opts.values.is_empty(), "--values must list at least one value");
    let mut overrides = opts.overrides.clone();
    if let Some(seed) = opts.seed {
        overrides.push(format!("seed={seed}"));
    }
    let base = config::resolve_train_config(opts.preset, opts.config_file.as_deref(), &overrides)?;

    let split = pipeline::load_split(&opts.split_dir)?;
    let built = pipeline::build_from_split(&split)?;
    let validation = built.maps.map_log(&split.validation);
    let test_sets = evaluation::group_by_user(&built.maps.map_log(&split.test));

    let mut csv = String::from("value,recall,hit_ratio,coverage\n");
    for &value in &opts.values {
        let mut cfg = base.clone();
        apply_sweep_value(&mut cfg, &opts.param, value)?;
        cfg.validate()?;
        let out = fit(&built.graph, &built.categories, &validation, &cfg)?;
        let neighborhoods = if cfg.use_selection {
            refresh_neighborhoods(
                &built.graph,
                &built.categories,
                &out.params,
                &SelectedNeighborhoods::full(&built.graph, out.generation),
                &cfg,
            )?
        } else {
            SelectedNeighborhoods::full(&built.graph, out.generation)
        };
        let fwd = forward(&built.graph, &neighborhoods, &out.params, &cfg.forward_config());
        let report = evaluation::evaluate(
            &Scorer::DotProduct(&fwd.final_embeddings),
            &built.graph,
            &test_sets,
            &built.categories,
            &[opts.cutoff],
        )?;
        let _ = writeln!(
            csv,
            "{},{:.6},{:.6},{:.6}",
            value,
            report.recall(opts.cutoff),
            report.hit_ratio(opts.cutoff),
            report.coverage(opts.cutoff)
        );
        println!(
            "{} = {}: recall@{} {:.4}, hit_ratio {:.4}, coverage {:.4}",
            opts.param,
            value,
            opts.cutoff,
            report.recall(opts.cutoff),
            report.hit_ratio(opts.cutoff),
            report.coverage(opts.cutoff)
        );
    }

    let mut guard = OutputGuard::new();
    let path = opts.out.join(format!("sweep_{}.csv", opts.param));
    guard.write(&path, &csv)?;
    guard.finish();
    println!("sweep written to {}", path.display());
    Ok(())
}

fn apply_sweep_value(cfg: &mut TrainConfig, param: &str, value: f64) -> Result<()> {
    match param {
        "beta" => cfg.beta = value,
        "k" => {
            ensure!(value >= 1.0 && value.fract() == 0.0, "k must be a positive integer");
            cfg.neighbor_budget = value as usize;
        }
        "sigma_squared" => cfg.sigma_squared = value,
        "L" => {
            ensure!(value >= 0.0 && value.fract() == 0.0, "L must be a non-negative integer");
            cfg.layers = value as usize;
        }
        other => bail!("unknown sweep parameter {other} (expected beta, k, sigma_squared, or L)"),
    }
    Ok(())
}
