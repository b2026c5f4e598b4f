//! Run configuration: preset expansion, config-file parsing, and overrides.
//!
//! Precedence, lowest to highest: preset defaults, then the config file,
//! then command-line `--set key=value` overrides. Unknown keys are rejected
//! wherever they appear.

use std::path::Path;

use anyhow::{bail, Context, Result};
use dgrec::TrainConfig;

/// Model presets named on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Dgrec,
    Lightgcn,
    MfBpr,
    Popularity,
}

impl Preset {
    pub fn parse(name: &str) -> Result<Preset> {
        match name {
            "dgrec" => Ok(Preset::Dgrec),
            "lightgcn" => Ok(Preset::Lightgcn),
            "mf-bpr" => Ok(Preset::MfBpr),
            "popularity" => Ok(Preset::Popularity),
            other => bail!("unknown preset {other} (expected dgrec, lightgcn, mf-bpr, or popularity)"),
        }
    }

    /// The training configuration this preset expands to. Popularity is not
    /// trainable and has no expansion.
    pub fn train_config(&self) -> Result<TrainConfig> {
        match self {
            Preset::Dgrec => Ok(TrainConfig::dgrec_preset()),
            Preset::Lightgcn => Ok(TrainConfig::lightgcn_preset()),
            Preset::MfBpr => Ok(TrainConfig::mf_bpr_preset()),
            Preset::Popularity => {
                bail!("the popularity preset needs no training; run `evaluate --popularity`")
            }
        }
    }
}

/// Parse a `key = value` config file into pairs. Lines starting with `#` and
/// blank lines are skipped.
pub fn parse_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config file {}", path.display()))?;
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .with_context(|| format!("{}:{}: expected key = value", path.display(), idx + 1))?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Expand preset -> config file -> `--set` overrides into a final config.
pub fn resolve_train_config(
    preset: Preset,
    config_file: Option<&Path>,
    overrides: &[String],
) -> Result<TrainConfig> {
    let mut cfg = preset.train_config()?;
    if let Some(path) = config_file {
        for (key, value) in parse_config_file(path)? {
            cfg.apply_pair(&key, &value)
                .with_context(|| format!("in config file {}", path.display()))?;
        }
    }
    for entry in overrides {
        let (key, value) = entry
            .split_once('=')
            .with_context(|| format!("--set {entry}: expected key=value"))?;
        cfg.apply_pair(key.trim(), value.trim())
            .with_context(|| format!("in --set {entry}"))?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Stable hash of the effective configuration, recorded in reports.
pub fn config_hash(cfg: &TrainConfig) -> u64 {
    let mut joined = String::new();
    for (k, v) in cfg.to_pairs() {
        joined.push_str(&k);
        joined.push('=');
        joined.push_str(&v);
        joined.push('\n');
    }
    dgrec::seed::derive_seed(0, &joined)
}
