//! Command-line pipeline: synthesis, ingestion, features, labels, models,
//! segmentation, audit and report, each stage reading and writing files
//! in one stage directory.

pub mod config;
pub mod error;
pub mod lock;
pub mod manifest;
pub mod report;
pub mod stages;

use std::path::PathBuf;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use crate::config::PipelineConfig;
use crate::error::validation;
use crate::lock::DirLock;
use crate::manifest::Manifest;
use crate::stages::{run_stage, Ctx, Stage};

#[derive(Debug, Parser)]
#[command(name = "fvkit", version, about = "Financial vulnerability indicators from transaction data")]
pub struct Cli {
    /// Pipeline configuration (TOML); built-in defaults when absent.
    #[arg(long, global = true, env = "FVKIT_CONFIG")]
    pub config: Option<PathBuf>,

    /// Master seed; overrides the configuration.
    #[arg(long, global = true, env = "FVKIT_SEED")]
    pub seed: Option<u64>,

    /// Worker threads; 0 uses every core. Results do not depend on it.
    #[arg(long, global = true, env = "FVKIT_JOBS")]
    pub jobs: Option<usize>,

    /// Stage directory; overrides the configuration.
    #[arg(long, global = true, env = "FVKIT_STAGE_DIR")]
    pub stage_dir: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic cohort.
    Synth,
    /// Parse, validate and filter transactions.
    Ingest,
    /// Compute the feature matrix.
    Features,
    /// Derive vulnerability labels and protected attributes.
    Label,
    /// Train and evaluate every model on every target.
    Train,
    /// Segment accounts with PCA and k-means.
    Cluster,
    /// Correlation, leakage and cluster composition audit.
    Audit,
    /// Assemble the report bundle.
    Report,
    /// Run every stage in order.
    RunAll,
    /// Configuration helpers.
    #[command(subcommand)]
    Config(ConfigCommand),
}

#[derive(Debug, Subcommand)]
pub enum ConfigCommand {
    /// Print the full default configuration.
    Init {
        /// Write to this file instead of standard output.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check a configuration and list every violation.
    Validate,
}

/// Configuration after applying command-line and environment overrides.
pub fn resolve_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::defaults(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(d) = &cli.stage_dir {
        cfg.paths.stage_dir = d.to_string_lossy().into_owned();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn stages_for(command: &Command, cfg: &PipelineConfig) -> Vec<Stage> {
    match command {
        Command::Synth => vec![Stage::Synth],
        Command::Ingest => vec![Stage::Ingest],
        Command::Features => vec![Stage::Features],
        Command::Label => vec![Stage::Label],
        Command::Train => vec![Stage::Train],
        Command::Cluster => vec![Stage::Cluster],
        Command::Audit => vec![Stage::Audit],
        Command::Report => vec![Stage::Report],
        Command::RunAll => Stage::ALL
            .into_iter()
            .filter(|s| *s != Stage::Synth || cfg.paths.input.trim().is_empty())
            .collect(),
        Command::Config(_) => Vec::new(),
    }
}

/// Run the given stages under the directory lock, updating the manifest
/// after each one. `fresh` starts a new manifest.
pub fn run_stages(cfg: &PipelineConfig, stages: &[Stage], fresh: bool) -> Result<Manifest> {
    let dir = cfg.stage_dir();
    let _lock = DirLock::acquire(&dir)?;
    let hash = cfg.hash();
    let mut manifest = if fresh { Manifest::new(&hash, cfg.seed) } else { Manifest::open(&dir, &hash, cfg.seed) };
    let ctx = Ctx { cfg, dir: dir.clone(), config_hash: hash };
    for &stage in stages {
        log::info!("stage {}", stage.name());
        let start = Instant::now();
        let io = run_stage(&ctx, stage).with_context(|| format!("stage {} failed", stage.name()))?;
        let mut record = io.into_record(&dir)?;
        record.wall_clock_seconds = start.elapsed().as_secs_f64();
        manifest.record(stage.name(), record);
        manifest.save(&dir)?;
    }
    Ok(manifest)
}

pub fn run(cli: Cli) -> Result<()> {
    if let Command::Config(ConfigCommand::Init { output }) = &cli.command {
        let text = PipelineConfig::defaults().to_toml()?;
        match output {
            Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
            None => print!("{text}"),
        }
        return Ok(());
    }
    let cfg = resolve_config(&cli)?;
    if let Command::Config(ConfigCommand::Validate) = &cli.command {
        println!("configuration is valid (hash {})", cfg.hash());
        return Ok(());
    }
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| validation(format!("cannot set {jobs} worker threads: {e}")))?;
    }
    let stages = stages_for(&cli.command, &cfg);
    let manifest = run_stages(&cfg, &stages, matches!(cli.command, Command::RunAll))?;
    println!("manifest digest {}", manifest.digest);
    Ok(())
}
