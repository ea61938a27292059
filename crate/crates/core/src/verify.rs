//! Cross-checks of the coherent-label engine against the number-basis
//! oracle in [`crate::fock`].
//!
//! Each check reports the largest deviation it saw next to its tolerance.
//! The engine side of the beam-splitter check uses a configurable
//! convention while the oracle always uses the default one, so a wrong
//! convention shows up as a failed check.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI, SQRT_2};

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;
use rand::Rng;

use crate::conditioning::{self, Projector};
use crate::entanglement::{entanglement_entropy, even_cat_vacuum_probability, quasi_bell_measure};
use crate::error::Result;
use crate::fock::{
    self, all_click_probability_fock, beam_splitter_fock, cutoff_for, lindblad_evolve, lindblad_steps,
    parity_probabilities_fock, reduced_density_fock, trace_distance_bound, vacuum_probability_fock, FockDensity,
    FockVector,
};
use crate::linalg::Matrix;
use crate::optics::{append_coherent, beam_splitter_with, BeamSplitterConvention};
use crate::purification::decoherence::{decohere, dynamic_quasi_bell, f_tau, DecoherenceParams};
use crate::purification::protocol::{p1_round, p2_round};
use crate::rng::child_stream;
use crate::states::{cat, quasi_bell, CoherentLabel, MixedState, QuasiBell, SuperposedState};

/// Result of one cross-check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, cases: 0, max_deviation: 0.0, tolerance }
    }

    /// Counts one case; a NaN deviation fails the check for good.
    pub fn record(&mut self, deviation: f64) {
        self.cases += 1;
        if self.max_deviation.is_nan() {
            return;
        }
        if deviation.is_nan() || deviation > self.max_deviation {
            self.max_deviation = deviation;
        }
    }

    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    pub seed: u64,
    pub random_states: usize,
    /// Convention the engine uses in the beam-splitter check.
    pub convention: BeamSplitterConvention,
    pub alphas: Vec<f64>,
    pub gamma_taus: Vec<f64>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seed: 2024,
            random_states: 200,
            convention: BeamSplitterConvention::Symmetric,
            alphas: vec![0.5, 1.0, 1.5, 2.0],
            gamma_taus: vec![0.1, 0.5, LN_2, 1.0, 2.0],
        }
    }
}

/// Every check, in a fixed order.
pub fn run_all(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let mut out: Vec<Check> = check_random_states(opts.seed, opts.random_states, opts.convention)?.into();
    out.push(check_vacuum_overlap(&opts.alphas)?);
    out.push(check_decoherence(&opts.alphas, &opts.gamma_taus)?);
    out.push(check_decoherence_fidelity(&opts.alphas, &opts.gamma_taus)?);
    let small: Vec<f64> = opts.alphas.iter().copied().filter(|&a| a <= 1.5).collect();
    out.push(check_comparison_stage(&small)?);
    let tiny: Vec<f64> = opts.alphas.iter().copied().filter(|&a| a <= 1.0).collect();
    out.push(check_parity_stage(&tiny)?);
    Ok(out)
}

/// Normalized state with 1 to `max_modes` modes, 1 to 3 terms and label
/// magnitudes at most `max_amp`.
pub fn random_state<R: Rng + ?Sized>(rng: &mut R, mode_count: usize, max_amp: f64) -> Result<SuperposedState> {
    let terms = rng.random_range(1..=3);
    let mut list = Vec::with_capacity(terms);
    for _ in 0..terms {
        let label: Vec<Complex64> = (0..mode_count)
            .map(|_| {
                let r = max_amp * rng.random::<f64>().sqrt();
                Complex64::from_polar(r, 2.0 * PI * rng.random::<f64>())
            })
            .collect();
        let c = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
        list.push((c, CoherentLabel::new(label)?));
    }
    let s = SuperposedState::new(mode_count, list)?;
    if s.is_zero() {
        return Ok(SuperposedState::coherent(s.terms()[0].label.clone()));
    }
    s.normalized()
}

fn fock_of(s: &SuperposedState, cutoff: usize) -> Result<FockVector> {
    FockVector::from_state(s, cutoff)
}

/// Overlaps, beam-splitter outputs, detector probabilities and entropies
/// of `count` random states with up to three modes and `|amplitude| <= 3`.
pub fn check_random_states(seed: u64, count: usize, convention: BeamSplitterConvention) -> Result<[Check; 4]> {
    let mut overlaps = Check::new("overlaps", 1e-6);
    let mut splitters = Check::new("beam splitters", 1e-6);
    let mut detectors = Check::new("detector probabilities", 1e-6);
    let mut entropies = Check::new("entropies", 1e-6);
    for i in 0..count {
        let rng = &mut child_stream(seed, i as u64);
        let modes = rng.random_range(1..=3);
        let a = random_state(rng, modes, 3.0)?;
        let b = random_state(rng, modes, 3.0)?;
        let cutoff = cutoff_for(3.0 * SQRT_2);
        let (fa, fb) = (fock_of(&a, cutoff)?, fock_of(&b, cutoff)?);

        overlaps.record((a.inner(&b)? - fa.inner(&fb)?).norm());

        let rho = MixedState::pure(a.clone())?;
        for m in 0..modes {
            let (even, odd) = parity_probabilities_fock(&fa, m)?;
            let vac = vacuum_probability_fock(&fa, &[m])?;
            let click = all_click_probability_fock(&fa, &[m])?;
            for (p, want) in
                [(Projector::Even, even), (Projector::Odd, odd), (Projector::Vacuum, vac), (Projector::Click, click)]
            {
                detectors.record((conditioning::probability(&rho, &[(m, p)])? - want).abs());
            }
        }

        if modes >= 2 {
            let i = rng.random_range(0..modes);
            let j = (i + rng.random_range(1..modes)) % modes;
            let engine = fock_of(&beam_splitter_with(&a, i, j, convention)?, cutoff)?;
            let oracle = beam_splitter_fock(&fa, i, j, BeamSplitterConvention::Symmetric)?;
            let diff: f64 = engine.amplitudes().iter().zip(oracle.amplitudes()).map(|(x, y)| (x - y).norm_sqr()).sum();
            splitters.record(diff.sqrt());

            let all: Vec<usize> = (0..modes).collect();
            let clicks = all_click_probability_fock(&fa, &all)?;
            let ops: Vec<(usize, Projector)> = all.iter().map(|&m| (m, Projector::Click)).collect();
            detectors.record((conditioning::probability(&rho, &ops)? - clicks).abs());

            let keep = [rng.random_range(0..modes)];
            let cut = cutoff_for(3.0);
            entropies.record((entanglement_entropy(&a, &keep)? - fock::entropy_fock(&fock_of(&a, cut)?, &keep)?).abs());
        }
    }
    Ok([overlaps, splitters, detectors, entropies])
}

/// Vacuum probability of the even cat at `sqrt(2) a`: closed form, the
/// failure rate of the quasi-Bell measurement on a plus-type state, and the
/// number-basis value.
pub fn check_vacuum_overlap(alphas: &[f64]) -> Result<Check> {
    let mut c = Check::new("even cat vacuum probability", 1e-9);
    for &alpha in alphas {
        let want = even_cat_vacuum_probability(alpha);
        let u = cat(Complex64::new(SQRT_2 * alpha, 0.0), 0.0)?;
        let v = fock_of(&u, cutoff_for(SQRT_2 * alpha))?;
        c.record((vacuum_probability_fock(&v, &[0])? - want).abs());
        let phi = MixedState::pure(quasi_bell(alpha, QuasiBell::PhiPlus)?)?;
        c.record((quasi_bell_measure(&phi)?[4].1 - want).abs());
    }
    Ok(c)
}

fn decohere_pair(alpha: f64, gamma_tau: f64) -> Result<(FockDensity, FockDensity, DecoherenceParams)> {
    let p = DecoherenceParams::new(gamma_tau, alpha)?;
    let phi = MixedState::pure(quasi_bell(alpha, QuasiBell::PhiMinus)?)?;
    let cutoff = cutoff_for(alpha);
    let start = FockDensity::from_mixture(&phi, cutoff)?;
    let oracle = lindblad_evolve(&start, gamma_tau, lindblad_steps(gamma_tau))?;
    let engine = FockDensity::from_mixture(&decohere(&phi, gamma_tau)?, cutoff)?;
    Ok((engine, oracle, p))
}

/// Closed-form photon loss against the integrated master equation, as a
/// trace-distance bound.
pub fn check_decoherence(alphas: &[f64], gamma_taus: &[f64]) -> Result<Check> {
    let mut c = Check::new("photon loss channel", 1e-5);
    for &alpha in alphas {
        for &gt in gamma_taus {
            let (engine, oracle, _) = decohere_pair(alpha, gt)?;
            c.record(trace_distance_bound(&engine, &oracle)?);
        }
    }
    Ok(c)
}

/// Weight of the damped `phi-` after photon loss: closed form against the
/// integrated master equation.
pub fn check_decoherence_fidelity(alphas: &[f64], gamma_taus: &[f64]) -> Result<Check> {
    let mut c = Check::new("damped fidelity", 1e-6);
    for &alpha in alphas {
        for &gt in gamma_taus {
            let (_, oracle, p) = decohere_pair(alpha, gt)?;
            let target = fock_of(&dynamic_quasi_bell(p, QuasiBell::PhiMinus)?, oracle.cutoff())?;
            c.record((oracle.expectation(&target)? - f_tau(p)).abs());
        }
    }
    Ok(c)
}

fn comparison_inputs(alpha: f64) -> Result<Vec<MixedState>> {
    let a = Complex64::new(alpha, 0.0);
    let lab = |x: f64, y: f64| CoherentLabel::new(vec![a * x, a * y]);
    let one = Complex64::new(1.0, 0.0);
    let same = SuperposedState::new(2, vec![(one, lab(1.0, 1.0)?), (-one, lab(-1.0, -1.0)?)])?.normalized()?;
    let mixed = SuperposedState::new(
        2,
        vec![
            (Complex64::new(0.6, 0.1), lab(1.0, 1.0)?),
            (Complex64::new(-0.2, 0.5), lab(1.0, -1.0)?),
            (Complex64::new(0.3, -0.4), lab(-1.0, 1.0)?),
            (Complex64::new(0.1, 0.2), lab(-1.0, -1.0)?),
        ],
    )?
    .normalized()?;
    let opposite = SuperposedState::new(2, vec![(one, lab(1.0, -1.0)?), (one, lab(-1.0, 1.0)?)])?.normalized()?;
    Ok(vec![
        MixedState::pure(same.clone())?,
        MixedState::pure(mixed)?,
        MixedState::new(vec![(0.7, same), (0.3, opposite)])?,
    ])
}

/// Probability and kept state of a projector pattern computed in the
/// number basis: zero every amplitude outside the pattern, then trace out
/// the measured modes.
fn project_fock(v: &FockVector, measured: &[(usize, Projector)]) -> Result<(f64, Option<Matrix>)> {
    let n = v.cutoff();
    let modes = v.mode_count();
    let occ = |idx: usize, m: usize| (idx / n.pow((modes - 1 - m) as u32)) % n;
    let admits = |p: Projector, k: usize| match p {
        Projector::Vacuum => k == 0,
        Projector::Click => k > 0,
        Projector::Even => k.is_multiple_of(2),
        Projector::Odd => k % 2 == 1,
        Projector::EvenClick => k > 0 && k.is_multiple_of(2),
        Projector::Identity => true,
    };
    let amps: Vec<Complex64> = v
        .amplitudes()
        .iter()
        .enumerate()
        .map(
            |(idx, &x)| {
                if measured.iter().all(|&(m, p)| admits(p, occ(idx, m))) {
                    x
                } else {
                    Complex64::new(0.0, 0.0)
                }
            },
        )
        .collect();
    let projected = FockVector::from_amplitudes(n, modes, amps)?;
    let p = projected.norm_sqr();
    let keep: Vec<usize> = (0..modes).filter(|m| !measured.iter().any(|&(o, _)| o == *m)).collect();
    if p < 1e-10 || keep.is_empty() {
        return Ok((p, None));
    }
    let rho = reduced_density_fock(&projected, &keep)?;
    Ok((p, Some(rho.scale(Complex64::new(1.0 / p, 0.0)))))
}

fn mixture_fock(
    rho: &MixedState,
    ops: impl Fn(&SuperposedState) -> Result<FockVector>,
) -> Result<Vec<(f64, FockVector)>> {
    rho.components().iter().map(|(w, s)| Ok((*w, ops(s)?))).collect()
}

/// Sums `w * project_fock(v)` over a mixture.
fn project_mixture(parts: &[(f64, FockVector)], measured: &[(usize, Projector)]) -> Result<(f64, Option<Matrix>)> {
    let mut total = 0.0;
    let mut acc: Option<Matrix> = None;
    for (w, v) in parts {
        let (p, rho) = project_fock(v, measured)?;
        total += w * p;
        if let Some(r) = rho {
            let r = r.scale(Complex64::new(w * p, 0.0));
            acc = Some(match acc {
                Some(a) => Matrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] + r[(i, j)]),
                None => r,
            });
        }
    }
    let state = acc.filter(|_| total >= 1e-10).map(|a| a.scale(Complex64::new(1.0 / total, 0.0)));
    Ok((total, state))
}

fn density_gap(engine: &Option<MixedState>, oracle: &Option<Matrix>, cutoff: usize) -> Result<f64> {
    match (engine, oracle) {
        (Some(e), Some(o)) => Ok(FockDensity::from_mixture(e, cutoff)?.matrix().sub(o).frobenius_norm()),
        (None, None) => Ok(0.0),
        _ => Ok(f64::INFINITY),
    }
}

/// Comparison stage on two-mode inputs (one mode from each copy) against
/// the same optics in the number basis: keep probability and kept state.
pub fn check_comparison_stage(alphas: &[f64]) -> Result<Check> {
    let mut c = Check::new("comparison stage", 1e-6);
    for &alpha in alphas {
        let cutoff = cutoff_for(2.0 * alpha);
        let probe = Complex64::new(SQRT_2 * alpha, 0.0);
        for rho in comparison_inputs(alpha)? {
            let engine = p1_round(&rho, alpha)?;
            let parts = mixture_fock(&rho, |s| {
                let v = fock_of(&append_coherent(s, probe), cutoff)?;
                let v = beam_splitter_fock(&v, 0, 1, BeamSplitterConvention::Symmetric)?;
                beam_splitter_fock(&v, 1, 2, BeamSplitterConvention::Symmetric)
            })?;
            let (p, kept) = project_mixture(&parts, &[(1, Projector::Click), (2, Projector::Click)])?;
            c.record((engine.probability - p).abs());
            c.record(density_gap(&engine.state, &kept, cutoff)?);
        }
    }
    Ok(c)
}

/// Parity stage at amplitude `sqrt(2) a` against the number basis, for all
/// four quasi-Bell inputs and both keep rules.
pub fn check_parity_stage(alphas: &[f64]) -> Result<Check> {
    let mut c = Check::new("parity stage", 1e-6);
    for &alpha in alphas {
        let a2 = SQRT_2 * alpha;
        let cutoff = cutoff_for(a2);
        for input in QuasiBell::ALL {
            let rho = MixedState::pure(quasi_bell(a2, input)?)?;
            let parts = mixture_fock(&rho, |s| {
                let vac = Complex64::new(0.0, 0.0);
                let v = fock_of(&append_coherent(&append_coherent(s, vac), vac), cutoff)?;
                let v = beam_splitter_fock(&v, 0, 2, BeamSplitterConvention::Symmetric)?;
                beam_splitter_fock(&v, 1, 3, BeamSplitterConvention::Symmetric)
            })?;
            for target in [QuasiBell::PhiMinus, QuasiBell::PhiPlus] {
                let engine = p2_round(&rho, target)?;
                let pairs: &[(Projector, Projector)] = if target.is_plus() {
                    &[(Projector::Even, Projector::Even), (Projector::Odd, Projector::Odd)]
                } else {
                    &[(Projector::Even, Projector::Odd), (Projector::Odd, Projector::Even)]
                };
                let mut p = 0.0;
                let mut acc: Option<Matrix> = None;
                for &(k, l) in pairs {
                    let (q, m) = project_mixture(&parts, &[(2, k), (3, l)])?;
                    p += q;
                    if let Some(m) = m {
                        let m = m.scale(Complex64::new(q, 0.0));
                        acc = Some(match acc {
                            Some(a) => Matrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] + m[(i, j)]),
                            None => m,
                        });
                    }
                }
                let kept = acc.filter(|_| p >= 1e-10).map(|a| a.scale(Complex64::new(1.0 / p, 0.0)));
                c.record((engine.probability - p).abs());
                c.record(density_gap(&engine.state, &kept, cutoff)?);
            }
        }
    }
    Ok(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let [o, b, d, e] = check_random_states(5, 12, BeamSplitterConvention::Symmetric).unwrap();
        for c in [&o, &b, &d, &e] {
            assert!(c.passed(), "{c:?}");
            assert!(c.cases > 0);
        }
        assert!(check_vacuum_overlap(&[0.5, 1.0]).unwrap().passed());
        assert!(check_comparison_stage(&[0.7]).unwrap().passed());
        assert!(check_parity_stage(&[0.6]).unwrap().passed());
    }

    #[test]
    fn swapped_convention_is_caught() {
        let [_, b, _, _] = check_random_states(5, 12, BeamSplitterConvention::Swapped).unwrap();
        assert!(!b.passed());
    }

    #[test]
    fn nan_fails() {
        let mut c = Check::new("x", 1.0);
        c.record(0.5);
        c.record(f64::NAN);
        assert!(!c.passed());
    }
}
