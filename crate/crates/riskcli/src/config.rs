use std::collections::HashSet;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use pivrisk::{CsvSchema, RiskSpec};
use serde::{Deserialize, Serialize};

use crate::error::{input, CliError};

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "RISKCLI_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Text,
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Text => "txt",
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

fn default_date() -> String {
    CsvSchema::default().date_column
}

fn default_close() -> String {
    CsvSchema::default().close_column
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssetEntry {
    pub id: String,
    /// Relative paths resolve against the config file's directory.
    pub path: PathBuf,
    #[serde(default = "default_date")]
    pub date_column: String,
    #[serde(default = "default_close")]
    pub close_column: String,
}

impl AssetEntry {
    pub fn schema(&self) -> CsvSchema {
        CsvSchema { date_column: self.date_column.clone(), close_column: self.close_column.clone() }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    assets: Vec<AssetEntry>,
    lags: Option<usize>,
    levels: Option<Vec<f64>>,
    horizon: Option<usize>,
    trials: Option<usize>,
    seed: Option<u64>,
    format: Option<Format>,
    output_dir: Option<PathBuf>,
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub horizon: Option<usize>,
    pub levels: Option<Vec<f64>>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub assets: Vec<AssetEntry>,
    pub lags: usize,
    pub risk: RiskSpec,
    pub format: Format,
    pub output_dir: PathBuf,
    /// Config file contents exactly as read.
    pub raw: String,
}

impl RunConfig {
    /// Seed precedence: flag, then config file, then `RISKCLI_SEED`, then [`DEFAULT_SEED`].
    pub fn load(path: &Path, overrides: &Overrides, env_seed: Option<&str>) -> Result<Self, CliError> {
        let raw =
            std::fs::read_to_string(path).map_err(|e| input(format!("cannot read config {}: {e}", path.display())))?;
        let file: ConfigFile =
            serde_json::from_str(&raw).map_err(|e| input(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        let env_seed = env_seed
            .map(|s| {
                s.trim().parse::<u64>().map_err(|_| input(format!("{SEED_ENV} is not an unsigned integer: {s:?}")))
            })
            .transpose()?;
        let defaults = RiskSpec::default();
        let risk = RiskSpec {
            levels: overrides.levels.clone().or(file.levels).unwrap_or(defaults.levels),
            horizon: overrides.horizon.or(file.horizon).unwrap_or(defaults.horizon),
            trials: overrides.trials.or(file.trials).unwrap_or(defaults.trials),
            seed: overrides.seed.or(file.seed).or(env_seed).unwrap_or(DEFAULT_SEED),
        };
        let assets = file.assets.into_iter().map(|a| AssetEntry { path: base.join(&a.path), ..a }).collect();
        let config = Self {
            assets,
            lags: file.lags.unwrap_or(12),
            risk,
            format: overrides.format.or(file.format).unwrap_or_default(),
            output_dir: base.join(file.output_dir.unwrap_or_else(|| PathBuf::from("riskcli-out"))),
            raw,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.assets.is_empty() {
            return Err(input("config lists no assets"));
        }
        let mut seen = HashSet::new();
        for a in &self.assets {
            if a.id.is_empty() || !a.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(input(format!("asset id {:?} must be non-empty and use only [A-Za-z0-9_-]", a.id)));
            }
            if !seen.insert(a.id.as_str()) {
                return Err(input(format!("duplicate asset id {:?}", a.id)));
            }
        }
        if self.lags == 0 {
            return Err(input("lags must be at least 1"));
        }
        self.risk.validate().map_err(input)
    }

    pub fn fit_path(&self, asset_id: &str) -> PathBuf {
        self.output_dir.join(format!("fit_{asset_id}.json"))
    }
}
