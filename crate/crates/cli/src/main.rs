mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, ReportFormat, RunConfig, ScorerKind};

#[derive(Parser)]
#[command(
    name = "osveta",
    version,
    about = "Stability-ranked mesh watermarking toolkit"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Input mesh (OBJ or PLY). `train` accepts several.
    #[arg(long, global = true)]
    mesh: Vec<PathBuf>,
    /// Output directory (`generate` and `keygen`: output file).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<ReportFormat>,
}

#[derive(Args, Clone, Default)]
struct Scoring {
    #[arg(long, value_enum)]
    scorer: Option<ScorerKind>,
    /// Criterion configuration JSON.
    #[arg(long)]
    criteria: Option<PathBuf>,
    /// Trained network parameters JSON (required by the neuro scorer).
    #[arg(long)]
    params: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Per-vertex feature table and topology report.
    Analyze,
    /// Stability ranking of every vertex.
    Rank {
        #[command(flatten)]
        scoring: Scoring,
    },
    /// Train the ranking network on decimation survival.
    Train {
        #[arg(long)]
        criteria: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
    },
    /// Write a fresh watermark key.
    Keygen {
        #[arg(long)]
        payload_bits: Option<usize>,
        #[arg(long)]
        group_size: Option<usize>,
    },
    /// Embed a payload.
    Embed {
        #[command(flatten)]
        scoring: Scoring,
        #[arg(long)]
        key: Option<PathBuf>,
        /// Payload as a string of 0s and 1s.
        #[arg(long)]
        payload: Option<String>,
    },
    /// Blind extraction.
    Extract {
        #[command(flatten)]
        scoring: Scoring,
        #[arg(long)]
        key: Option<PathBuf>,
        /// Expected payload; adds the bit error rate to the report.
        #[arg(long)]
        payload: Option<String>,
    },
    /// Decimate (and optionally add noise), tracking the top-ranked set.
    Attack {
        #[command(flatten)]
        scoring: Scoring,
        /// Comma-separated keep fractions, 1.0 = untouched.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
        /// Coordinate noise standard deviation.
        #[arg(long)]
        noise: Option<f64>,
        #[arg(long)]
        set_size: Option<usize>,
    },
    /// Deletion-probability matrix over scorers and attack levels.
    Evaluate {
        #[arg(long)]
        criteria: Option<PathBuf>,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        key: Option<PathBuf>,
        #[arg(long)]
        payload: Option<String>,
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<f64>>,
        #[arg(long)]
        set_size: Option<usize>,
        /// Number of seeds to average.
        #[arg(long)]
        seeds: Option<usize>,
    },
    /// Write a built-in test mesh.
    Generate {
        /// icosahedron, icosphere, pyramid-grid, bumpy-sphere, ridged-torus, terrain
        #[arg(long)]
        shape: String,
    },
}

fn build_config(common: &Common) -> anyhow::Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if !common.mesh.is_empty() {
        cfg.mesh = common.mesh.clone();
    }
    if common.out.is_some() {
        cfg.out = common.out.clone();
    }
    cfg.seed = common.seed.or(cfg.seed);
    cfg.format = common.format.or(cfg.format);
    Ok(cfg)
}

fn apply_scoring(cfg: &mut RunConfig, s: Scoring) {
    cfg.scorer = s.scorer.or(cfg.scorer);
    cfg.criteria = s.criteria.or(cfg.criteria.take());
    cfg.params = s.params.or(cfg.params.take());
}

fn run(cli: Cli) -> anyhow::Result<commands::Outcome> {
    let mut cfg = build_config(&cli.common)?;
    match cli.command {
        Command::Analyze => commands::analyze(&cfg),
        Command::Rank { scoring } => {
            apply_scoring(&mut cfg, scoring);
            commands::rank(&cfg)
        }
        Command::Train { criteria, epochs } => {
            cfg.criteria = criteria.or(cfg.criteria.take());
            if let Some(e) = epochs {
                cfg.train.epochs = e;
            }
            commands::train(&cfg)
        }
        Command::Keygen {
            payload_bits,
            group_size,
        } => {
            cfg.keygen.payload_bits = payload_bits.unwrap_or(cfg.keygen.payload_bits);
            cfg.keygen.group_size = group_size.unwrap_or(cfg.keygen.group_size);
            commands::keygen(&cfg)
        }
        Command::Embed {
            scoring,
            key,
            payload,
        } => {
            apply_scoring(&mut cfg, scoring);
            cfg.key = key.or(cfg.key.take());
            cfg.payload = payload.or(cfg.payload.take());
            commands::embed(&cfg)
        }
        Command::Extract {
            scoring,
            key,
            payload,
        } => {
            apply_scoring(&mut cfg, scoring);
            cfg.key = key.or(cfg.key.take());
            cfg.payload = payload.or(cfg.payload.take());
            commands::extract(&cfg)
        }
        Command::Attack {
            scoring,
            levels,
            noise,
            set_size,
        } => {
            apply_scoring(&mut cfg, scoring);
            cfg.levels = levels.or(cfg.levels.take());
            cfg.noise = noise.or(cfg.noise);
            cfg.set_size = set_size.or(cfg.set_size);
            commands::attack(&cfg)
        }
        Command::Evaluate {
            criteria,
            params,
            key,
            payload,
            levels,
            set_size,
            seeds,
        } => {
            cfg.criteria = criteria.or(cfg.criteria.take());
            cfg.params = params.or(cfg.params.take());
            cfg.key = key.or(cfg.key.take());
            cfg.payload = payload.or(cfg.payload.take());
            cfg.levels = levels.or(cfg.levels.take());
            cfg.set_size = set_size.or(cfg.set_size);
            cfg.seeds = seeds.or(cfg.seeds);
            commands::evaluate(&cfg)
        }
        Command::Generate { shape } => commands::generate(&cfg, &shape),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(commands::Outcome::Complete) => ExitCode::SUCCESS,
        Ok(commands::Outcome::Partial { failed }) => {
            eprintln!("{failed} evaluation cell(s) failed; see the report");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<ConfigError>() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
