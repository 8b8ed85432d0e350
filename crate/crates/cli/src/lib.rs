//! Command-line driver: configuration, spectrum cache, result files.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod selftest;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ctorsion", version, about = "Spectral invariants of conformal metrics on the sphere")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Metric spec, e.g. fs, max, pnorm:4, smoothmax:0.05.
    #[arg(long, global = true)]
    pub metric: Option<String>,
    /// Maximal spherical-harmonic degree.
    #[arg(short = 'L', long = "degree", global = true)]
    pub degree: Option<usize>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Neither read nor write the spectrum cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Eigenvalues of the Laplacian.
    Spectrum,
    /// Heat trace on the configured t grid.
    Theta,
    /// Small-time fit, zeta values and zeta'(0).
    Zeta,
    /// Analytic torsion and the Quillen metric.
    Torsion,
    /// Quillen metrics along the anomaly formula.
    Anomaly,
    /// Sweep of a smoothing family towards its limit.
    Converge,
    /// Fast property checks.
    Selftest,
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    if let Some(m) = &cli.metric {
        cfg.metric.spec = m.clone();
    }
    if let Some(l) = cli.degree {
        cfg.discretization.l = l;
        cfg.discretization.n_theta = None;
        cfg.discretization.n_phi = None;
    }
    if let Some(t) = cli.threads {
        cfg.run.threads = t;
    }
    if cli.no_cache {
        cfg.cache.enabled = false;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = resolve(&cli)?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(cfg.run.threads).build_global();
    if let Command::Selftest = cli.command {
        return selftest::selftest_cmd(&cfg.output.dir);
    }
    let ctx = Context::new(cfg);
    match cli.command {
        Command::Spectrum => commands::spectrum_cmd(&ctx),
        Command::Theta => commands::theta_cmd(&ctx),
        Command::Zeta => commands::zeta_cmd(&ctx),
        Command::Torsion => commands::torsion_cmd(&ctx),
        Command::Anomaly => commands::anomaly_cmd(&ctx),
        Command::Converge => commands::converge_cmd(&ctx),
        Command::Selftest => unreachable!(),
    }
}

/// Parses the process arguments and returns the exit code.
pub fn run_from_env() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
