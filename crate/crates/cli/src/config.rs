use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::Deserialize;

/// Errors in the invocation itself: bad flags, unreadable config, missing
/// input files. These exit with status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ScorerKind {
    Osveta,
    Neuro,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    pub eta: f64,
    pub epochs: usize,
    /// Keep fractions of the decimations that produce survival targets.
    pub schedule: Vec<f64>,
    pub shuffle: bool,
    /// Each training mesh must yield at least this many samples.
    pub min_samples: usize,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            eta: 0.2,
            epochs: 30,
            schedule: vec![0.6, 0.4, 0.2, 0.1],
            shuffle: true,
            min_samples: 16,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KeySection {
    pub payload_bits: usize,
    pub group_size: usize,
}

impl Default for KeySection {
    fn default() -> Self {
        Self {
            payload_bits: 16,
            group_size: 16,
        }
    }
}

/// Everything a command may need. Loaded from `--config`, then overridden
/// by flags. Relative paths in the file resolve against its directory.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: Vec<PathBuf>,
    pub out: Option<PathBuf>,
    pub scorer: Option<ScorerKind>,
    pub criteria: Option<PathBuf>,
    pub params: Option<PathBuf>,
    pub key: Option<PathBuf>,
    pub payload: Option<String>,
    /// Keep fractions: 1.0 leaves the mesh intact, 0.4 deletes 60%.
    pub levels: Option<Vec<f64>>,
    pub seed: Option<u64>,
    /// Number of seeds averaged by `evaluate`, starting at `seed`.
    pub seeds: Option<usize>,
    pub format: Option<ReportFormat>,
    /// Size of each tracked vertex set.
    pub set_size: Option<usize>,
    /// Standard deviation of coordinate noise applied by `attack`.
    pub noise: Option<f64>,
    pub train: TrainSection,
    pub keygen: KeySection,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = read_text(path)?;
        let mut cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| config_error(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        cfg.mesh.iter_mut().for_each(fix);
        [
            &mut cfg.out,
            &mut cfg.criteria,
            &mut cfg.params,
            &mut cfg.key,
        ]
        .into_iter()
        .flatten()
        .for_each(fix);
        Ok(cfg)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn format(&self) -> ReportFormat {
        self.format.unwrap_or_default()
    }

    pub fn set_size(&self) -> usize {
        self.set_size.unwrap_or(1000)
    }

    pub fn levels(&self) -> anyhow::Result<Vec<f64>> {
        let levels = self
            .levels
            .clone()
            .unwrap_or_else(|| vec![0.6, 0.4, 0.2, 0.1]);
        if levels.is_empty() {
            return Err(config_error("no attack levels given"));
        }
        if let Some(bad) = levels.iter().find(|l| !(**l > 0.0 && **l <= 1.0)) {
            return Err(config_error(format!(
                "attack level {bad} is not a keep fraction in (0, 1]"
            )));
        }
        Ok(levels)
    }

    pub fn out(&self) -> anyhow::Result<&Path> {
        self.out
            .as_deref()
            .ok_or_else(|| config_error("no output directory given (--out)"))
    }

    pub fn single_mesh(&self) -> anyhow::Result<&Path> {
        match self.mesh.as_slice() {
            [one] => Ok(one),
            [] => Err(config_error("no input mesh given (--mesh)")),
            _ => Err(config_error("this command takes exactly one --mesh")),
        }
    }
}

/// Reads a file, reporting a missing or unreadable path as a config error.
pub fn read_text(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| config_error(format!("cannot read {}: {e}", path.display())))
}
