//! Purification of mixed entangled coherent states.
//!
//! Two copies of a pair are compared with beam splitters and on/off
//! detectors ([`protocol::p1_round`]); a parity stage
//! ([`protocol::p2_round`]) then returns the kept pair to the original
//! amplitude. The simplified scheme skips the parity stage and lets the
//! amplitude grow by `sqrt(2)` per round.

pub mod decoherence;
pub mod protocol;
pub mod twirl;

use crate::error::{Error, Result};
use crate::states::QuasiBell;

#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

pub use decoherence::{decohere, f_tau, pre_rotate, purification_threshold, DecoherenceParams, PreRotation};
pub use protocol::{full_round, multimode_purify, p1_round, p2_round, run_protocol, Conditioned, RoundReport};
pub use twirl::{werner_twirl, werner_twirl_exact};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Comparison stage followed by the parity stage.
    Full,
    /// Comparison stage only; the amplitude grows each round.
    SimpleP1,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunMode {
    Exact,
    MonteCarlo { trials: u64, root_seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProtocolConfig {
    pub alpha: f64,
    pub scheme: Scheme,
    pub target: QuasiBell,
    /// Number of successful rounds.
    pub iterations: usize,
    pub mode: RunMode,
}

impl ProtocolConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidArgument("alpha must be positive"));
        }
        if let RunMode::MonteCarlo { trials: 0, .. } = self.mode {
            return Err(Error::InvalidArgument("Monte Carlo mode needs at least one trial"));
        }
        if self.scheme == Scheme::SimpleP1 && !self.target.is_plus() {
            return Err(Error::InvalidArgument("the simplified scheme only distills plus-type states"));
        }
        Ok(())
    }
}

/// `F^2 / (F^2 + (1-F)^2)`.
pub fn fidelity_recursion(f: f64) -> f64 {
    let g = 1.0 - f;
    let d = f * f + g * g;
    if d == 0.0 {
        return f;
    }
    f * f / d
}

/// Published closed forms for the keep probability of one round.
///
/// Full: `(F^2+(1-F)^2)/4 * (1 - 2e^{-4a^2}/(1+e^{-8a^2})) * (1-e^{-4a^2})/(1+e^{-8a^2})`.
/// Simplified: `(F^2+(1-F)^2)/2 * (1 - 2e^{-4a^2}/(1+e^{-8a^2}))`.
///
/// These leave out the chance that a probe detector sees no photon; see
/// [`keep_probability`] for the value the protocol actually produces.
pub fn success_probability(f: f64, alpha: f64, scheme: Scheme) -> f64 {
    let s = f * f + (1.0 - f) * (1.0 - f);
    let a2 = alpha * alpha;
    let x4 = (-4.0 * a2).exp();
    let x8 = (-8.0 * a2).exp();
    let first = 1.0 - 2.0 * x4 / (1.0 + x8);
    match scheme {
        Scheme::Full => s / 4.0 * first * (-(-4.0 * a2).exp_m1()) / (1.0 + x8),
        Scheme::SimpleP1 => s / 2.0 * first,
    }
}

/// `(1 - e^{-a^2})^4`: all four probe-side detectors fire.
fn probe_factor(alpha: f64) -> f64 {
    (-(-alpha * alpha).exp_m1()).powi(4)
}

/// Keep probability of one round on a two-state Werner ensemble.
///
/// Full (minus-type input): `(F^2+(1-F)^2) (1-e^{-a^2})^4 / 4`.
/// Simplified (plus-type input):
/// `(F^2+(1-F)^2) (1+e^{-8a^2}) (1-e^{-a^2})^4 / (2 (1+e^{-4a^2})^2)`.
pub fn keep_probability(f: f64, alpha: f64, scheme: Scheme) -> f64 {
    let s = f * f + (1.0 - f) * (1.0 - f);
    let a2 = alpha * alpha;
    match scheme {
        Scheme::Full => s * probe_factor(alpha) / 4.0,
        Scheme::SimpleP1 => {
            let x4 = (-4.0 * a2).exp();
            s * (1.0 + (-8.0 * a2).exp()) * probe_factor(alpha) / (2.0 * (1.0 + x4) * (1.0 + x4))
        }
    }
}

/// Probability that the comparison stage keeps a pair of identical
/// minus-type (or plus-type) states.
pub fn p1_keep_probability(alpha: f64, plus: bool) -> f64 {
    let a2 = alpha * alpha;
    let n = if plus { 1.0 + (-4.0 * a2).exp() } else { -(-4.0 * a2).exp_m1() };
    (1.0 + (-8.0 * a2).exp()) * probe_factor(alpha) / (2.0 * n * n)
}

/// Probability that the parity stage keeps a doubled-amplitude input.
pub fn p2_keep_probability(alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    let m = -(-4.0 * a2).exp_m1();
    m * m / (2.0 * (1.0 + (-8.0 * a2).exp()))
}
