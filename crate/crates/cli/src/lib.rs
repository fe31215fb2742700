//! Command-line front end: argument parsing, configuration resolution and
//! CSV output for the simulation library.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod presets;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::{Kind, RunConfig};
use crate::error::CliError;
use crate::output::{ensure_dir, Header};

pub const DEFAULT_OUT: &str = "wetbench-out";

#[derive(Debug, Parser)]
#[command(
    name = "wetbench",
    version,
    about = "CSI-free multi-antenna energy transfer simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true, env = "WETBENCH_CONFIG", conflicts_with = "preset")]
    pub config: Option<PathBuf>,
    /// Built-in configuration (see `wetbench --help` for names).
    #[arg(long, global = true, env = "WETBENCH_PRESET")]
    pub preset: Option<String>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true, env = "WETBENCH_SEED")]
    pub seed: Option<u64>,
    /// Worker threads. Results do not depend on this value.
    #[arg(long, global = true, env = "WETBENCH_THREADS")]
    pub threads: Option<usize>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true, env = "WETBENCH_OUT")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Mean, variance and outage against one swept parameter.
    Curves,
    /// Empirical and analytic histograms of RF and harvested energy.
    Distributions,
    /// Phase-shift search for one of the named objectives.
    Optimize,
    /// Bhattacharyya check of the equal-sum correlation substitution.
    Validate,
    /// Beacon placement sweep over a device deployment.
    Scenario,
}

impl Command {
    pub fn kind(self) -> Kind {
        match self {
            Command::Curves => Kind::Curves,
            Command::Distributions => Kind::Distributions,
            Command::Optimize => Kind::Optimize,
            Command::Validate => Kind::Validate,
            Command::Scenario => Kind::Scenario,
        }
    }
}

/// Reads the configuration named on the command line and applies overrides.
pub fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match (&cli.config, &cli.preset) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::config(format!("reading {}: {e}", path.display())))?;
            RunConfig::parse(&text).map_err(|e| match e {
                CliError::Config(m) => CliError::config(format!("{}: {m}", path.display())),
                other => other,
            })?
        }
        (None, Some(name)) => presets::load(name)?,
        (None, None) => RunConfig::default(),
    };
    let kind = cli.command.kind();
    match cfg.kind {
        Some(k) if k != kind => {
            return Err(CliError::config(format!(
                "configuration is for '{k}' but the subcommand is '{kind}'"
            )))
        }
        _ => cfg.kind = Some(kind),
    }
    if let Some(seed) = cli.seed {
        cfg.seed = Some(seed);
    }
    cfg.seed = Some(cfg.seed.unwrap_or(0));
    Ok(cfg)
}

/// Runs one subcommand and returns the summary lines for stdout.
pub fn execute(cli: &Cli) -> Result<Vec<String>, CliError> {
    let cfg = resolve(cli)?;
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::config("--threads must be at least 1"));
        }
        pool = pool.num_threads(n);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::config(format!("cannot start worker threads: {e}")))?;
    ensure_dir(&out)?;
    let seed = cfg.seed.expect("resolved");
    let kind = cli.command.kind();
    let ctx = Context {
        config: &cfg,
        seed,
        out: &out,
        header: Header {
            command: kind.to_string(),
            config_hash: cfg.hash(),
            seed,
        },
    };
    pool.install(|| match cli.command {
        Command::Curves => commands::curves(&ctx),
        Command::Distributions => commands::distributions(&ctx),
        Command::Optimize => commands::optimize(&ctx),
        Command::Validate => commands::validate(&ctx),
        Command::Scenario => commands::scenario(&ctx),
    })
}
