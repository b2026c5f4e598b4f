//! Shared plumbing for the commands: split-directory layout, loading, and
//! cleanup of partial outputs on failure.

use std::path::{Path, PathBuf};

use anyhow::{ensure, Context, Result};
use dgrec::dataset::{self, CategoryAssignment, InteractionLog};
use dgrec::graph::{build_graph, BipartiteGraph, CategoryMap, IdMaps};

pub const TRAIN_FILE: &str = "train.tsv";
pub const VALIDATION_FILE: &str = "validation.tsv";
pub const TEST_FILE: &str = "test.tsv";
pub const CATEGORIES_FILE: &str = "categories.tsv";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const CHECKPOINT_FILE: &str = "checkpoint.txt";
pub const TRAINING_LOG_FILE: &str = "training_log.csv";
pub const METRICS_FILE: &str = "metrics.csv";

/// A split directory loaded back into memory.
pub struct LoadedSplit {
    pub train: InteractionLog,
    pub validation: InteractionLog,
    pub test: InteractionLog,
    pub assignment: CategoryAssignment,
}

pub fn load_split(dir: &Path) -> Result<LoadedSplit> {
    let train = dataset::parse_interactions(&dir.join(TRAIN_FILE))
        .with_context(|| format!("loading {} from {}", TRAIN_FILE, dir.display()))?;
    // Validation and test may legitimately be empty on tiny corpora; any
    // other parse failure still propagates.
    let read_optional = |name: &str| match dataset::parse_interactions(&dir.join(name)) {
        Ok(log) => Ok(log),
        Err(dgrec::Error::EmptyDataset(_)) => Ok(dgrec::InteractionLog::default()),
        Err(err) => {
            Err(err).with_context(|| format!("loading {} from {}", name, dir.display()))
        }
    };
    let validation = read_optional(VALIDATION_FILE)?;
    let test = read_optional(TEST_FILE)?;
    let assignment = dataset::parse_categories(&dir.join(CATEGORIES_FILE))
        .with_context(|| format!("loading categories from {}", dir.display()))?;
    Ok(LoadedSplit {
        train,
        validation,
        test,
        assignment,
    })
}

/// Graph-side artifacts rebuilt deterministically from a split.
pub struct BuiltGraph {
    pub graph: BipartiteGraph,
    pub maps: IdMaps,
    pub categories: CategoryMap,
}

pub fn build_from_split(split: &LoadedSplit) -> Result<BuiltGraph> {
    let (graph, maps) = build_graph(&split.train)?;
    let mut assignment = split.assignment.clone();
    for item in &maps.item_names {
        assignment
            .entry(item.clone())
            .or_insert_with(|| dataset::UNKNOWN_CATEGORY.to_string());
    }
    let categories = CategoryMap::build(&assignment, &maps)?;
    Ok(BuiltGraph {
        graph,
        maps,
        categories,
    })
}

/// Records files as they are written; if the command fails before `finish`,
/// everything written so far is removed so no partial output survives.
pub struct OutputGuard {
    written: Vec<PathBuf>,
    armed: bool,
}

impl OutputGuard {
    pub fn new() -> Self {
        OutputGuard {
            written: Vec::new(),
            armed: true,
        }
    }

    pub fn write(&mut self, path: &Path, contents: &str) -> Result<()> {
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)
                .with_context(|| format!("creating {}", parent.display()))?;
        }
        self.written.push(path.to_path_buf());
        std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
    }

    pub fn finish(mut self) {
        self.armed = false;
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if self.armed {
            for path in &self.written {
                let _ = std::fs::remove_file(path);
            }
        }
    }
}

/// Parse "0.6,0.2,0.2" into split ratios.
pub fn parse_ratios(text: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("cannot parse split ratios {text:?}"))?;
    ensure!(parts.len() == 3, "expected three ratios, got {}", parts.len());
    Ok((parts[0], parts[1], parts[2]))
}

/// Parse "100,300" into cutoffs.
pub fn parse_cutoffs(text: &str) -> Result<Vec<usize>> {
    let cutoffs: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("cannot parse cutoffs {text:?}"))?;
    ensure!(!cutoffs.is_empty(), "need at least one cutoff");
    ensure!(cutoffs.iter().all(|&k| k > 0), "cutoffs must be positive");
    Ok(cutoffs)
}
