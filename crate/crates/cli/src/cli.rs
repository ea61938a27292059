//! Command-line front end.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ecsim_core::verify::Check;
use serde::Serialize;

use crate::config::{ConventionName, Experiment, ExperimentConfig, FileConfig, SchemeName, TargetName};
use crate::error::CliError;
use crate::experiments::{self, Run};
use crate::output::{check_lines, write_csv, write_json, CheckRow};

#[derive(Debug, Parser)]
#[command(name = "ecsim", version, about = "Entangled coherent-state purification experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML config file; flags override its keys.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file (default: stdout).
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo trials per round (purify only); 0 runs the exact path alone.
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Run the number-basis cross-checks for this experiment.
    #[arg(long, global = true)]
    pub verify: bool,
    /// JSON instead of CSV.
    #[arg(long, global = true)]
    pub json: bool,
    /// Write the final state(s) as JSON to PATH.
    #[arg(long, global = true, value_name = "PATH")]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entropy of entanglement against the relative phase.
    EntropyScan {
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        phis: Option<Vec<f64>>,
        /// Uniform grid of this many phases on [0, 2 pi).
        #[arg(long)]
        phi_steps: Option<usize>,
    },
    /// Iterated purification of a two-state mixture.
    Purify {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        f0: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long, value_enum)]
        scheme: Option<SchemeName>,
        #[arg(long, value_enum)]
        target: Option<TargetName>,
    },
    /// Fidelity under photon loss and the purification threshold.
    Decoherence {
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        gamma_taus: Option<Vec<f64>>,
    },
    /// Iterated purification of the four-mode mixture.
    Multimode {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        f0: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// The full number-basis cross-check suite.
    Verify {
        #[arg(long, value_enum)]
        convention: Option<ConventionName>,
        #[arg(long)]
        random_states: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        gamma_taus: Option<Vec<f64>>,
    },
}

impl Cli {
    /// Config file (if any) overlaid with the flags.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let base = match &self.common.config {
            Some(p) => FileConfig::load(p)?,
            None => FileConfig::default(),
        };
        let c = &self.common;
        let mut flags = FileConfig {
            seed: c.seed,
            trials: c.trials,
            verify: c.verify.then_some(true),
            out: c.out.clone(),
            ..FileConfig::default()
        };
        let experiment = match &self.command {
            Command::EntropyScan { alphas, phis, phi_steps } => {
                flags.alphas = alphas.clone();
                flags.phis = phis.clone();
                flags.phi_steps = *phi_steps;
                Experiment::EntropyScan
            }
            Command::Purify { alpha, f0, iterations, scheme, target } => {
                flags.alpha = *alpha;
                flags.f0 = *f0;
                flags.iterations = *iterations;
                flags.scheme = *scheme;
                flags.target = *target;
                Experiment::Purify
            }
            Command::Decoherence { alphas, gamma_taus } => {
                flags.alphas = alphas.clone();
                flags.gamma_taus = gamma_taus.clone();
                Experiment::Decoherence
            }
            Command::Multimode { alpha, f0, iterations } => {
                flags.alpha = *alpha;
                flags.f0 = *f0;
                flags.iterations = *iterations;
                Experiment::Multimode
            }
            Command::Verify { convention, random_states, alphas, gamma_taus } => {
                flags.convention = *convention;
                flags.random_states = *random_states;
                flags.alphas = alphas.clone();
                flags.gamma_taus = gamma_taus.clone();
                Experiment::Verify
            }
        };
        let mut merged = base.overlay(flags);
        // a step count on the command line beats an explicit grid in the file
        if matches!(&self.command, Command::EntropyScan { phis: None, phi_steps: Some(_), .. }) {
            merged.phis = None;
        }
        ExperimentConfig::resolve(experiment, merged)
    }
}

fn sink(cfg: &ExperimentConfig) -> Result<Box<dyn Write>, CliError> {
    Ok(match &cfg.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn report_checks(checks: &[Check]) -> Result<(), CliError> {
    for line in check_lines(checks) {
        eprintln!("{line}");
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

fn emit<T: Serialize>(cli: &Cli, cfg: &ExperimentConfig, run: Run<T>) -> Result<(), CliError> {
    for n in &run.notes {
        eprintln!("note: {n}");
    }
    if let Some(path) = &cli.common.dump {
        let value = run
            .dump
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("{} has no state to dump", cfg.experiment.name())))?;
        let mut f = BufWriter::new(File::create(path)?);
        writeln!(f, "{value}")?;
        f.flush()?;
    }
    let mut out = sink(cfg)?;
    if cli.common.json {
        write_json(&mut out, cfg, &run.rows, &run.checks)?;
    } else {
        write_csv(&mut out, cfg, &run.rows)?;
    }
    out.flush()?;
    report_checks(&run.checks)
}

fn run_verify(cli: &Cli, cfg: &ExperimentConfig) -> Result<(), CliError> {
    if cli.common.dump.is_some() {
        return Err(CliError::Config("verify has no state to dump".into()));
    }
    let checks = experiments::verify_suite(cfg)?;
    let mut out = sink(cfg)?;
    if cli.common.json {
        let rows: Vec<CheckRow> = checks.iter().map(CheckRow::from).collect();
        write_json(&mut out, cfg, &rows, &[])?;
    } else {
        for line in check_lines(&checks) {
            writeln!(out, "{line}")?;
        }
    }
    out.flush()?;
    drop(out);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let cfg = cli.resolve()?;
    match cfg.experiment {
        Experiment::EntropyScan => {
            if cli.common.dump.is_some() {
                return Err(CliError::Config("entropy-scan has no state to dump".into()));
            }
            emit(cli, &cfg, experiments::entropy_scan(&cfg)?)
        }
        Experiment::Purify => emit(cli, &cfg, experiments::purify(&cfg)?),
        Experiment::Decoherence => emit(cli, &cfg, experiments::decoherence(&cfg)?),
        Experiment::Multimode => emit(cli, &cfg, experiments::multimode(&cfg)?),
        Experiment::Verify => run_verify(cli, &cfg),
    }
}

/// Parses `args`, runs, and returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
