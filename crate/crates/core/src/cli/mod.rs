//! Command-line front end. Every command reads one TOML configuration,
//! optionally patched with `--set key=value`, and writes its results under
//! the output directory together with an echo of the resolved settings.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

pub use config::{
    load_config, parse_config, A0Config, DataConfig, DesignSection, FilterConfig, MixtureConfig, PartitionConfig, RunConfig,
    SamplerSection, SamplingPriorConfig, SourceConfig,
};

use crate::error::{Error, Result};

/// Exit status for invalid input or configuration.
pub const EXIT_VALIDATION: u8 = 2;
/// Exit status for failures during computation.
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "ppsurv", version, about = "Power-prior survival analysis and trial design")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, short, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed; overrides the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for design runs.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Override a configuration entry, e.g. `--set sampler.n_mc=2000`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub set: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Posterior under the power prior with fixed `a0`.
    AnalyzeFixed,
    /// Posterior under the normalized power prior with random `a0`.
    AnalyzeRandom,
    /// Approximate the discounting prior on `beta` and fit a normal to it.
    ApproximatePrior,
    /// Type I error and power over `a0` and event grids.
    DesignFixed,
    /// Type I error and power with random `a0`.
    DesignRandom,
    /// Simulate one trial and write its complete and observed data.
    Simulate,
    /// Subject, event and risk-time counts per dataset, arm and stratum.
    Summarize,
}

impl Cli {
    /// Configuration with command-line flags applied on top of `--set`.
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = load_config(self.config.as_deref(), &self.set)?;
        if let Some(s) = self.seed {
            cfg.seed = Some(s);
        }
        if let Some(w) = self.workers {
            if w == 0 {
                return Err(Error::config("--workers", "must be at least 1"));
            }
            cfg.workers = w;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        Ok(cfg)
    }
}

/// Fills in a missing seed from entropy; the drawn value is echoed into
/// every output file.
pub fn seeded(mut cfg: RunConfig) -> (RunConfig, u64) {
    let seed = *cfg.seed.get_or_insert_with(rand::random);
    (cfg, seed)
}

/// Runs `command` under a configuration whose seed is already fixed.
pub fn run(command: Command, cfg: RunConfig) -> Result<()> {
    let seed = cfg.seed.ok_or_else(|| Error::config("seed", "must be set before running"))?;
    let ctx = commands::Context::load(cfg, seed)?;
    match command {
        Command::AnalyzeFixed => commands::analyze_fixed(&ctx),
        Command::AnalyzeRandom => commands::analyze_random(&ctx),
        Command::ApproximatePrior => commands::approximate_prior(&ctx),
        Command::DesignFixed => commands::design(&ctx, false).map(drop),
        Command::DesignRandom => commands::design(&ctx, true).map(drop),
        Command::Simulate => commands::simulate(&ctx),
        Command::Summarize => commands::summarize_cmd(&ctx),
    }
}

/// Runs a design study and returns the contents of `design.json`, which is
/// also written under `cfg.out`.
pub fn run_design(cfg: RunConfig, random: bool) -> Result<serde_json::Value> {
    let (cfg, seed) = seeded(cfg);
    let ctx = commands::Context::load(cfg, seed)?;
    commands::design(&ctx, random)
}

/// Entry point of the binary: parses `args`, runs, and maps errors to exit
/// codes.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_VALIDATION)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cfg = match cli.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(exit_code(&e));
        }
    };
    let (cfg, seed) = seeded(cfg);
    match run(cli.command, cfg) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = exit_code(&e);
            if code == EXIT_RUNTIME {
                eprintln!("seed: {seed}");
            }
            ExitCode::from(code)
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_RUNTIME
    }
}
