//! CSV and JSON writers. Every CSV starts with a `#` line carrying the tool
//! version, the config hash and the seed.

use std::io::Write;

use ecsim_core::verify::Check;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn comment_line(cfg: &ExperimentConfig) -> String {
    let seed = cfg.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
    format!("# ecsim {VERSION} experiment={} config-sha256={} seed={seed}", cfg.experiment.name(), cfg.hash())
}

pub fn write_csv<T: Serialize, W: Write>(out: W, cfg: &ExperimentConfig, rows: &[T]) -> Result<(), CliError> {
    let mut out = out;
    writeln!(out, "{}", comment_line(cfg))?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CheckRow {
    pub name: &'static str,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl From<&Check> for CheckRow {
    fn from(c: &Check) -> Self {
        CheckRow {
            name: c.name,
            cases: c.cases,
            max_deviation: c.max_deviation,
            tolerance: c.tolerance,
            passed: c.passed(),
        }
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct JsonReport<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    experiment: &'static str,
    config_sha256: String,
    seed: Option<u64>,
    config: serde_json::Value,
    rows: &'a [T],
    #[serde(skip_serializing_if = "Vec::is_empty")]
    checks: Vec<CheckRow>,
}

pub fn write_json<T: Serialize, W: Write>(
    out: W,
    cfg: &ExperimentConfig,
    rows: &[T],
    checks: &[Check],
) -> Result<(), CliError> {
    let report = JsonReport {
        tool: "ecsim",
        version: VERSION,
        experiment: cfg.experiment.name(),
        config_sha256: cfg.hash(),
        seed: cfg.seed,
        config: cfg.settings(),
        rows,
        checks: checks.iter().map(CheckRow::from).collect(),
    };
    let mut out = out;
    serde_json::to_writer_pretty(&mut out, &report)?;
    writeln!(out)?;
    Ok(())
}

/// One line per check: `PASS name  cases=..  max-deviation=..  tolerance=..`.
pub fn check_lines(checks: &[Check]) -> Vec<String> {
    checks
        .iter()
        .map(|c| {
            format!(
                "{} {:<28} cases={:<5} max-deviation={:.3e} tolerance={:.1e}",
                if c.passed() { "PASS" } else { "FAIL" },
                c.name,
                c.cases,
                c.max_deviation,
                c.tolerance
            )
        })
        .collect()
}
