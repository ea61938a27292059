//! Exact projective conditioning of coherent-state superpositions.
//!
//! Measuring some modes of `sum_i c_i |x_i>|r_i>` with a product projector
//! `P` leaves the unnormalized operator `sum_ab K_ba c_a conj(c_b) |r_a><r_b|`
//! on the rest, where `K_ba = <x_b|P|x_a>`. Terms that share a measured label
//! are grouped first, then `K` is diagonalized so the result is a finite
//! mixture of coherent superpositions. No truncation is involved.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{eigh, Matrix};
use crate::states::{overlap_exponent, CoherentLabel, MixedState, SuperposedState, Term, DEDUP_TOLERANCE};

/// Single-mode measurement operators that are diagonal in photon number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Projector {
    Identity,
    /// `|0><0|`
    Vacuum,
    /// `1 - |0><0|`
    Click,
    /// Even photon number, vacuum included.
    Even,
    Odd,
    /// Even photon number excluding the vacuum.
    EvenClick,
}

/// `e^z - 1` without cancellation for small `|z|`.
pub(crate) fn cexpm1(z: Complex64) -> Complex64 {
    let (s, c) = z.im.sin_cos();
    let em1 = z.re.exp_m1();
    let half = (0.5 * z.im).sin();
    Complex64::new(em1 * c - 2.0 * half * half, (em1 + 1.0) * s)
}

impl Projector {
    /// `<bra|P|ket>` for single-mode coherent states.
    pub fn kernel(self, bra: Complex64, ket: Complex64) -> Complex64 {
        let damp = (-0.5 * (bra.norm_sqr() + ket.norm_sqr())).exp();
        let z = bra.conj() * ket;
        match self {
            Projector::Identity => overlap_exponent(bra, ket).exp(),
            Projector::Vacuum => Complex64::new(damp, 0.0),
            Projector::Click => cexpm1(z) * damp,
            Projector::Even => z.cosh() * damp,
            Projector::Odd => z.sinh() * damp,
            Projector::EvenClick => {
                let s = (0.5 * z).sinh();
                s * s * (2.0 * damp)
            }
        }
    }
}

/// Mixture generated by a PSD kernel over a list of unnormalized kets:
/// `rho = sum_ab K_ba |r_a><r_b|`. Returns `(weight, state)` pairs with
/// weights proportional to the trace contribution; the caller renormalizes.
pub(crate) fn kernel_mixture(
    kernel: &Matrix,
    kets: &[SuperposedState],
    mode_count: usize,
) -> Vec<(f64, SuperposedState)> {
    let n = kets.len();
    if n == 1 {
        let w = kernel[(0, 0)].re * kets[0].norm_sqr();
        return vec![(w, kets[0].clone())];
    }
    let eig = eigh(kernel);
    let lambda_max = eig.values.last().copied().unwrap_or(0.0);
    let mut out = Vec::new();
    for k in 0..n {
        let lambda = eig.values[k];
        if lambda <= 1e-14 * lambda_max || lambda <= 0.0 {
            continue;
        }
        let mut terms = Vec::new();
        for (a, ket) in kets.iter().enumerate() {
            let v = eig.vectors[(a, k)].conj();
            if v == Complex64::new(0.0, 0.0) {
                continue;
            }
            terms.extend(ket.terms().iter().map(|t| Term { coefficient: t.coefficient * v, label: t.label.clone() }));
        }
        let phi = SuperposedState::from_terms_unchecked(mode_count, terms);
        let w = lambda * phi.norm_sqr();
        if w > 0.0 {
            out.push((w, phi));
        }
    }
    out
}

/// Outcome of conditioning a pure state on a product projector.
#[derive(Clone, Debug)]
pub struct PureConditioning {
    /// `<psi|P|psi>` for the (normalized) input.
    pub probability: f64,
    /// Normalized post-measurement mixture over the unmeasured modes, or
    /// `None` when every mode was measured or the outcome is impossible.
    pub conditioned: Option<Vec<(f64, SuperposedState)>>,
}

fn validate_modes(mode_count: usize, ops: &[(usize, Projector)]) -> Result<()> {
    for (i, &(m, _)) in ops.iter().enumerate() {
        if m >= mode_count {
            return Err(Error::InvalidMode { mode: m, mode_count });
        }
        if ops[..i].iter().any(|&(o, _)| o == m) {
            return Err(Error::InvalidMode { mode: m, mode_count });
        }
    }
    Ok(())
}

/// Applies `ops` (one projector per listed mode) to a normalized pure state.
pub fn condition_pure(state: &SuperposedState, ops: &[(usize, Projector)]) -> Result<PureConditioning> {
    let mode_count = state.mode_count();
    validate_modes(mode_count, ops)?;
    let rest_modes: Vec<usize> = (0..mode_count).filter(|m| !ops.iter().any(|&(o, _)| o == *m)).collect();

    let mut groups: Vec<(Vec<Complex64>, Vec<Term>)> = Vec::new();
    for term in state.terms() {
        let amps = term.label.amplitudes();
        let measured: Vec<Complex64> = ops.iter().map(|&(m, _)| amps[m]).collect();
        let rest = Term {
            coefficient: term.coefficient,
            label: CoherentLabel::from_vec_unchecked(rest_modes.iter().map(|&m| amps[m]).collect()),
        };
        match groups.iter_mut().find(|(x, _)| {
            x.iter()
                .zip(&measured)
                .all(|(a, b)| (a.re - b.re).abs() < DEDUP_TOLERANCE && (a.im - b.im).abs() < DEDUP_TOLERANCE)
        }) {
            Some((_, terms)) => terms.push(rest),
            None => groups.push((measured, vec![rest])),
        }
    }
    let n = groups.len();
    if n == 0 {
        return Ok(PureConditioning { probability: 0.0, conditioned: None });
    }

    let kernel = Matrix::from_fn(n, n, |b, a| {
        ops.iter().enumerate().map(|(i, &(_, p))| p.kernel(groups[b].0[i], groups[a].0[i])).product()
    });

    let mut probability = 0.0;
    let mut scale = 0.0;
    for b in 0..n {
        for a in 0..n {
            let k = kernel[(b, a)];
            if k == Complex64::new(0.0, 0.0) {
                continue;
            }
            let mut g = Complex64::new(0.0, 0.0);
            for tb in &groups[b].1 {
                for ta in &groups[a].1 {
                    g += tb.coefficient.conj() * ta.coefficient * tb.label.overlap(&ta.label);
                }
            }
            let contribution = k * g;
            probability += contribution.re;
            scale += contribution.norm();
        }
    }
    if probability <= 1e-14 * scale || probability <= 0.0 {
        return Ok(PureConditioning { probability: 0.0, conditioned: None });
    }
    let probability = probability.min(1.0);
    if rest_modes.is_empty() {
        return Ok(PureConditioning { probability, conditioned: None });
    }

    let rest_count = rest_modes.len();
    let kets: Vec<SuperposedState> =
        groups.into_iter().map(|(_, terms)| SuperposedState::from_terms_unchecked(rest_count, terms)).collect();
    let components = kernel_mixture(&kernel, &kets, rest_count);
    let total: f64 = components.iter().map(|(w, _)| w).sum();
    if components.is_empty() || total <= 0.0 {
        return Ok(PureConditioning { probability: 0.0, conditioned: None });
    }
    let conditioned = components.into_iter().map(|(w, s)| (w / total, s)).collect();
    Ok(PureConditioning { probability, conditioned: Some(conditioned) })
}

/// Outcome of conditioning a mixed state on a product projector.
#[derive(Clone, Debug)]
pub struct MixedConditioning {
    pub probability: f64,
    pub conditioned: Option<MixedState>,
}

/// Mixture version of [`condition_pure`].
pub fn condition(rho: &MixedState, ops: &[(usize, Projector)]) -> Result<MixedConditioning> {
    validate_modes(rho.mode_count(), ops)?;
    let rest_count = rho.mode_count() - ops.len();
    let mut probability = 0.0;
    let mut components = Vec::new();
    for (w, s) in rho.components() {
        let c = condition_pure(s, ops)?;
        probability += w * c.probability;
        if let Some(parts) = c.conditioned {
            components.extend(parts.into_iter().map(|(v, t)| (w * c.probability * v, t)));
        }
    }
    let probability = probability.clamp(0.0, 1.0);
    if rest_count == 0 || components.is_empty() {
        return Ok(MixedConditioning { probability, conditioned: None });
    }
    let conditioned = MixedState::from_unnormalized(rest_count, components).ok();
    Ok(MixedConditioning { probability, conditioned })
}

/// Probability only; cheaper when the post-measurement state is not needed.
pub fn probability(rho: &MixedState, ops: &[(usize, Projector)]) -> Result<f64> {
    let mut p = 0.0;
    for (w, s) in rho.components() {
        let only: Vec<(usize, Projector)> = ops.to_vec();
        p += w * probability_pure(s, &only)?;
    }
    Ok(p.clamp(0.0, 1.0))
}

fn probability_pure(state: &SuperposedState, ops: &[(usize, Projector)]) -> Result<f64> {
    validate_modes(state.mode_count(), ops)?;
    let terms = state.terms();
    let mut p = Complex64::new(0.0, 0.0);
    for tb in terms {
        for ta in terms {
            let mut k = Complex64::new(1.0, 0.0);
            let mut rest = Complex64::new(0.0, 0.0);
            let (xb, xa) = (tb.label.amplitudes(), ta.label.amplitudes());
            for m in 0..state.mode_count() {
                match ops.iter().find(|&&(o, _)| o == m) {
                    Some(&(_, proj)) => k *= proj.kernel(xb[m], xa[m]),
                    None => rest += overlap_exponent(xb[m], xa[m]),
                }
            }
            p += tb.coefficient.conj() * ta.coefficient * k * rest.exp();
        }
    }
    Ok(p.re.clamp(0.0, 1.0))
}
