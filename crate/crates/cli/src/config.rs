//! Experiment configuration: a TOML file plus command-line overrides.

use std::f64::consts::{LN_2, PI};
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use ecsim_core::optics::BeamSplitterConvention;
use ecsim_core::purification::Scheme;
use ecsim_core::QuasiBell;
use serde::{Deserialize, Serialize};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    EntropyScan,
    Purify,
    Decoherence,
    Multimode,
    Verify,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::EntropyScan => "entropy-scan",
            Experiment::Purify => "purify",
            Experiment::Decoherence => "decoherence",
            Experiment::Multimode => "multimode",
            Experiment::Verify => "verify",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    Full,
    SimpleP1,
}

impl From<SchemeName> for Scheme {
    fn from(s: SchemeName) -> Scheme {
        match s {
            SchemeName::Full => Scheme::Full,
            SchemeName::SimpleP1 => Scheme::SimpleP1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum TargetName {
    #[serde(rename = "phi+")]
    #[value(name = "phi+")]
    PhiPlus,
    #[serde(rename = "phi-")]
    #[value(name = "phi-")]
    PhiMinus,
    #[serde(rename = "psi+")]
    #[value(name = "psi+")]
    PsiPlus,
    #[serde(rename = "psi-")]
    #[value(name = "psi-")]
    PsiMinus,
}

impl From<TargetName> for QuasiBell {
    fn from(t: TargetName) -> QuasiBell {
        match t {
            TargetName::PhiPlus => QuasiBell::PhiPlus,
            TargetName::PhiMinus => QuasiBell::PhiMinus,
            TargetName::PsiPlus => QuasiBell::PsiPlus,
            TargetName::PsiMinus => QuasiBell::PsiMinus,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ConventionName {
    Symmetric,
    Swapped,
}

impl From<ConventionName> for BeamSplitterConvention {
    fn from(c: ConventionName) -> BeamSplitterConvention {
        match c {
            ConventionName::Symmetric => BeamSplitterConvention::Symmetric,
            ConventionName::Swapped => BeamSplitterConvention::Swapped,
        }
    }
}

/// Contents of a config file. Every key is optional; missing keys take the
/// experiment's defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub verify: Option<bool>,
    pub out: Option<PathBuf>,
    pub alphas: Option<Vec<f64>>,
    pub phis: Option<Vec<f64>>,
    pub phi_steps: Option<usize>,
    pub alpha: Option<f64>,
    pub f0: Option<f64>,
    pub iterations: Option<usize>,
    pub scheme: Option<SchemeName>,
    pub target: Option<TargetName>,
    pub gamma_taus: Option<Vec<f64>>,
    pub convention: Option<ConventionName>,
    pub random_states: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    /// Keys set in `over` replace keys set here.
    pub fn overlay(self, over: FileConfig) -> FileConfig {
        macro_rules! pick {
            ($($f:ident),*) => { FileConfig { $($f: over.$f.or(self.$f)),* } };
        }
        pick!(
            seed,
            trials,
            verify,
            out,
            alphas,
            phis,
            phi_steps,
            alpha,
            f0,
            iterations,
            scheme,
            target,
            gamma_taus,
            convention,
            random_states
        )
    }
}

/// Fully resolved settings of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: Option<u64>,
    pub trials: u64,
    pub verify: bool,
    pub out: Option<PathBuf>,
    pub alphas: Vec<f64>,
    pub phis: Vec<f64>,
    pub alpha: f64,
    pub f0: f64,
    pub iterations: usize,
    pub scheme: SchemeName,
    pub target: TargetName,
    pub gamma_taus: Vec<f64>,
    pub convention: ConventionName,
    pub random_states: usize,
}

fn phi_grid(steps: usize) -> Vec<f64> {
    (0..steps).map(|k| 2.0 * PI * k as f64 / steps as f64).collect()
}

impl ExperimentConfig {
    pub fn resolve(experiment: Experiment, file: FileConfig) -> Result<Self, CliError> {
        let scheme = file.scheme.unwrap_or(SchemeName::Full);
        let default_target = if scheme == SchemeName::SimpleP1 { TargetName::PhiPlus } else { TargetName::PhiMinus };
        let default_alphas = match experiment {
            Experiment::EntropyScan => vec![0.8, 1.0, 1.2],
            Experiment::Decoherence => vec![0.5, 1.0, 2.0, 3.0],
            _ => vec![0.5, 1.0, 1.5, 2.0],
        };
        let default_gamma_taus = match experiment {
            Experiment::Verify => vec![0.1, 0.5, LN_2, 1.0, 2.0],
            _ => (0..=40).map(|k| 0.05 * k as f64).collect(),
        };
        let phis = match (file.phis, file.phi_steps) {
            (Some(p), _) => p,
            (None, Some(n)) => phi_grid(n),
            (None, None) => phi_grid(72),
        };
        let cfg = ExperimentConfig {
            experiment,
            seed: file.seed,
            trials: file.trials.unwrap_or(0),
            verify: file.verify.unwrap_or(false),
            out: file.out,
            alphas: file.alphas.unwrap_or(default_alphas),
            phis,
            alpha: file.alpha.unwrap_or(2.0),
            f0: file.f0.unwrap_or(0.75),
            iterations: file.iterations.unwrap_or(3),
            scheme,
            target: file.target.unwrap_or(default_target),
            gamma_taus: file.gamma_taus.unwrap_or(default_gamma_taus),
            convention: file.convention.unwrap_or(ConventionName::Symmetric),
            random_states: file.random_states.unwrap_or(200),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |m: &str| Err(CliError::Config(m.to_string()));
        if self.trials > 0 && self.seed.is_none() {
            return bad("a seed is required when trials > 0");
        }
        let positive = |v: &[f64]| v.iter().all(|a| a.is_finite() && *a > 0.0);
        match self.experiment {
            Experiment::EntropyScan => {
                if self.alphas.is_empty() || self.phis.is_empty() {
                    return bad("entropy-scan needs nonempty alpha and phi grids");
                }
                if !positive(&self.alphas) {
                    return bad("alphas must be positive");
                }
                if !self.phis.iter().all(|p| (0.0..2.0 * PI).contains(p)) {
                    return bad("phis must lie in [0, 2 pi)");
                }
            }
            Experiment::Purify => {
                if !(self.f0 > 0.0 && self.f0 < 1.0) {
                    return bad("f0 must lie in (0, 1)");
                }
                if !(self.alpha.is_finite() && self.alpha > 0.0) {
                    return bad("alpha must be positive");
                }
                if self.scheme == SchemeName::SimpleP1 && !QuasiBell::from(self.target).is_plus() {
                    return bad("the simple-p1 scheme needs a plus-type target");
                }
            }
            Experiment::Decoherence => {
                if self.alphas.is_empty() || self.gamma_taus.is_empty() {
                    return bad("decoherence needs nonempty alpha and gamma-tau grids");
                }
                if !positive(&self.alphas) {
                    return bad("alphas must be positive");
                }
                if !self.gamma_taus.iter().all(|g| g.is_finite() && *g >= 0.0) {
                    return bad("gamma-taus must be nonnegative");
                }
            }
            Experiment::Multimode => {
                if !(self.f0 > 0.5 && self.f0 <= 1.0) {
                    return bad("multimode needs f0 in (1/2, 1], so that the first state dominates");
                }
                if !(self.alpha.is_finite() && self.alpha > 0.0) {
                    return bad("alpha must be positive");
                }
            }
            Experiment::Verify => {
                if self.random_states == 0 || self.alphas.is_empty() || self.gamma_taus.is_empty() {
                    return bad("verify needs nonempty grids and at least one random state");
                }
                if !self.alphas.iter().all(|&a| a > 0.0 && a <= 2.0) {
                    return bad("verify alphas must lie in (0, 2]");
                }
            }
        }
        Ok(())
    }

    /// The settings that affect this experiment, as a JSON object.
    pub fn settings(&self) -> serde_json::Value {
        let mut m = serde_json::Map::new();
        let mut put = |k: &str, v: serde_json::Value| {
            m.insert(k.to_string(), v);
        };
        put("experiment", json!(self.experiment));
        put("seed", json!(self.seed));
        match self.experiment {
            Experiment::EntropyScan => {
                put("alphas", json!(self.alphas));
                put("phis", json!(self.phis));
            }
            Experiment::Purify => {
                put("trials", json!(self.trials));
                put("alpha", json!(self.alpha));
                put("f0", json!(self.f0));
                put("iterations", json!(self.iterations));
                put("scheme", json!(self.scheme));
                put("target", json!(self.target));
            }
            Experiment::Decoherence => {
                put("alphas", json!(self.alphas));
                put("gamma-taus", json!(self.gamma_taus));
            }
            Experiment::Multimode => {
                put("alpha", json!(self.alpha));
                put("f0", json!(self.f0));
                put("iterations", json!(self.iterations));
            }
            Experiment::Verify => {
                put("alphas", json!(self.alphas));
                put("gamma-taus", json!(self.gamma_taus));
                put("convention", json!(self.convention));
                put("random-states", json!(self.random_states));
            }
        }
        if self.experiment != Experiment::Verify {
            put("verify", json!(self.verify));
        }
        serde_json::Value::Object(m)
    }

    /// SHA-256 of [`Self::settings`] in compact JSON.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.settings().to_string().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
