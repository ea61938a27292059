//! Photon loss in a vacuum environment.
//!
//! Under `d rho/d tau = gamma sum_i (a_i rho a_i^dag - {a_i^dag a_i, rho}/2)`
//! a coherent dyadic evolves as
//! `|b><c| -> <c|b>^{1 - t^2} |t b><t c|` with `t = e^{-gamma tau / 2}`,
//! so a finite superposition stays a finite mixture.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

use crate::conditioning::kernel_mixture;
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::optics::{hadamard_unnormalized, kerr_bx};
use crate::states::{quasi_bell, CoherentLabel, MixedState, QuasiBell, SuperposedState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecoherenceParams {
    /// Dimensionless `gamma * tau`.
    pub gamma_tau: f64,
    pub alpha: f64,
}

impl DecoherenceParams {
    pub fn new(gamma_tau: f64, alpha: f64) -> Result<Self> {
        if !(gamma_tau >= 0.0) || !gamma_tau.is_finite() {
            return Err(Error::InvalidArgument("gamma tau must be finite and nonnegative"));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidArgument("alpha must be finite"));
        }
        Ok(Self { gamma_tau, alpha })
    }

    /// `e^{-gamma tau / 2}`.
    pub fn t(&self) -> f64 {
        (-0.5 * self.gamma_tau).exp()
    }

    /// `e^{-4 (1 - t^2) a^2}`: surviving coherence between `|a,a>` and `|-a,-a>`.
    pub fn coherence(&self) -> f64 {
        (4.0 * self.alpha * self.alpha * (-self.gamma_tau).exp_m1()).exp()
    }

    /// `e^{-4 t^2 a^2}`: overlap of the damped branches.
    pub fn branch_overlap(&self) -> f64 {
        (-4.0 * self.alpha * self.alpha * (-self.gamma_tau).exp()).exp()
    }
}

/// Closed-form damping of every mode of a pure state.
pub fn decohere_state(s: &SuperposedState, gamma_tau: f64) -> Result<MixedState> {
    DecoherenceParams::new(gamma_tau, 0.0)?;
    let s = s.normalized()?;
    if gamma_tau == 0.0 {
        return MixedState::pure(s);
    }
    let t = (-0.5 * gamma_tau).exp();
    let keep = -(-gamma_tau).exp_m1();
    let terms = s.terms();
    let n = terms.len();
    let kernel = Matrix::from_fn(n, n, |b, a| (terms[b].label.overlap_exponent(&terms[a].label) * keep).exp());
    let kets: Vec<SuperposedState> = terms
        .iter()
        .map(|term| {
            let label = CoherentLabel::from_vec_unchecked(term.label.amplitudes().iter().map(|z| z * t).collect());
            SuperposedState::from_terms_unchecked(
                s.mode_count(),
                alloc::vec![crate::states::Term { coefficient: term.coefficient, label }],
            )
        })
        .collect();
    MixedState::from_unnormalized(s.mode_count(), kernel_mixture(&kernel, &kets, s.mode_count()))
}

/// Mixture version of [`decohere_state`].
pub fn decohere(rho: &MixedState, gamma_tau: f64) -> Result<MixedState> {
    let mut comps = Vec::new();
    for (w, s) in rho.components() {
        for (v, c) in decohere_state(s, gamma_tau)?.components() {
            comps.push((w * v, c.clone()));
        }
    }
    MixedState::from_unnormalized(rho.mode_count(), comps)
}

/// Quasi-Bell state on the damped amplitude `t a`.
pub fn dynamic_quasi_bell(params: DecoherenceParams, which: QuasiBell) -> Result<SuperposedState> {
    quasi_bell(params.t() * params.alpha, which)
}

/// Weight of the damped `phi-` in the decohered `phi-`:
/// `(1+G)(1-k) / ((1+G)(1-k) + (1-G)(1+k))` with `G` the surviving
/// coherence and `k` the branch overlap.
pub fn f_tau(params: DecoherenceParams) -> f64 {
    let a2 = params.alpha * params.alpha;
    let g = params.coherence();
    let one_minus_g = -(4.0 * a2 * (-params.gamma_tau).exp_m1()).exp_m1();
    let k = params.branch_overlap();
    let one_minus_k = -(-4.0 * a2 * (-params.gamma_tau).exp()).exp_m1();
    let good = (1.0 + g) * one_minus_k;
    let bad = one_minus_g * (1.0 + k);
    good / (good + bad)
}

/// The printed variant `N+^2 (1+G) / (N+^2 (1+G) - N-^2 (1-G))` with
/// `N+- = (2 (1 +- k))^{-1/2}`. Kept for comparison only: for `G < 1` it
/// exceeds one or turns negative.
pub fn f_tau_printed(params: DecoherenceParams) -> f64 {
    let g = params.coherence();
    let k = params.branch_overlap();
    let np = 1.0 / (2.0 * (1.0 + k));
    let nm = 1.0 / (2.0 * (1.0 - k));
    np * (1.0 + g) / (np * (1.0 + g) - nm * (1.0 - g))
}

/// Local operation applied by both parties before purifying a decohered pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PreRotation {
    /// Kerr `B_x` on both modes: `{phi-, phi+}` becomes `{phi-, psi+}`.
    BxBx,
    /// Coherent-state Hadamard on both modes: `{phi-, phi+}` becomes `{psi+, phi+}`.
    HH,
}

pub fn pre_rotate(rho: &MixedState, gate: PreRotation) -> Result<MixedState> {
    if rho.mode_count() != 2 {
        return Err(Error::ModeCountMismatch { expected: 2, found: rho.mode_count() });
    }
    match gate {
        PreRotation::BxBx => rho.try_map(|s| kerr_bx(&kerr_bx(s, 0)?, 1)),
        PreRotation::HH => rho.try_map_nonunitary(|s| hadamard_unnormalized(&hadamard_unnormalized(s, 0)?, 1)),
    }
}

/// Weights `(psi+, phi+)` after [`PreRotation::HH`] on the decohered `phi-`:
/// proportional to `F (1+k)` and `(1-F)(1-k)`.
pub fn hadamard_weights(params: DecoherenceParams) -> (f64, f64) {
    let f = f_tau(params);
    let k = params.branch_overlap();
    let a = f * (1.0 + k);
    let b = (1.0 - f) * (1.0 - k);
    (a / (a + b), b / (a + b))
}

/// Root of `F(tau) = 1/2` in `gamma tau`, by bisection on `[0, 10]`.
pub fn purification_threshold(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidArgument("alpha must be positive"));
    }
    let h = |gt: f64| f_tau(DecoherenceParams { gamma_tau: gt, alpha }) - 0.5;
    let (mut lo, mut hi) = (0.0, 10.0);
    let (mut flo, fhi) = (h(lo), h(hi));
    if flo.signum() == fhi.signum() {
        return Err(Error::NoSignChange);
    }
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        let fm = h(mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::LN_2;
    use num_complex::Complex64;

    fn phi_minus(alpha: f64) -> MixedState {
        MixedState::pure(quasi_bell(alpha, QuasiBell::PhiMinus).unwrap()).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let rho = phi_minus(1.0);
        let out = decohere(&rho, 0.0).unwrap();
        assert_eq!(out.components().len(), 1);
        assert!((out.fidelity(&rho.components()[0].1).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_mode_coherent_state_shrinks() {
        let s = SuperposedState::coherent(CoherentLabel::new(alloc::vec![Complex64::new(1.2, -0.3)]).unwrap());
        let out = decohere_state(&s, 0.8).unwrap();
        assert_eq!(out.components().len(), 1);
        let t = (-0.4f64).exp();
        let label = out.components()[0].1.terms()[0].label.amplitudes()[0];
        assert!((label - Complex64::new(1.2 * t, -0.3 * t)).norm() < 1e-14);
    }

    #[test]
    fn dynamic_basis_weights() {
        for alpha in [0.5, 1.0, 2.0] {
            for gt in [0.1, 0.5, LN_2, 1.5] {
                let p = DecoherenceParams::new(gt, alpha).unwrap();
                let out = decohere(&phi_minus(alpha), gt).unwrap();
                assert!((out.weight_sum() - 1.0).abs() < 1e-14);
                let fm = out.fidelity(&dynamic_quasi_bell(p, QuasiBell::PhiMinus).unwrap()).unwrap();
                let fp = out.fidelity(&dynamic_quasi_bell(p, QuasiBell::PhiPlus).unwrap()).unwrap();
                assert!((fm - f_tau(p)).abs() < 1e-12, "{alpha} {gt}");
                assert!((fm + fp - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn printed_form_is_not_a_probability() {
        let p = DecoherenceParams::new(0.3, 1.0).unwrap();
        assert!(f_tau_printed(p) > 1.0);
        assert!(f_tau(p) < 1.0);
        assert!(f_tau_printed(DecoherenceParams::new(1.0, 1.0).unwrap()) < 0.0);
    }

    #[test]
    fn pre_rotations() {
        let alpha = 1.3;
        for gt in [0.2, 0.9] {
            let p = DecoherenceParams::new(gt, alpha).unwrap();
            let rho = decohere(&phi_minus(alpha), gt).unwrap();
            let f = f_tau(p);
            let bx = pre_rotate(&rho, PreRotation::BxBx).unwrap();
            let phi_m = dynamic_quasi_bell(p, QuasiBell::PhiMinus).unwrap();
            let psi_p = dynamic_quasi_bell(p, QuasiBell::PsiPlus).unwrap();
            let phi_p = dynamic_quasi_bell(p, QuasiBell::PhiPlus).unwrap();
            assert!((bx.fidelity(&phi_m).unwrap() - f).abs() < 1e-12);
            assert!(bx.components().iter().all(|(_, s)| s.same_ray(&phi_m, 1e-9) || s.same_ray(&psi_p, 1e-9)));

            let hh = pre_rotate(&rho, PreRotation::HH).unwrap();
            let (wa, wb) = hadamard_weights(p);
            let got_a: f64 = hh.components().iter().filter(|(_, s)| s.same_ray(&psi_p, 1e-9)).map(|(w, _)| w).sum();
            let got_b: f64 = hh.components().iter().filter(|(_, s)| s.same_ray(&phi_p, 1e-9)).map(|(w, _)| w).sum();
            assert!((got_a - wa).abs() < 1e-12 && (got_b - wb).abs() < 1e-12);
        }
        let pure = phi_minus(1.0);
        let out = pre_rotate(&pure, PreRotation::BxBx).unwrap();
        assert_eq!(out.components().len(), 1);
    }

    #[test]
    fn threshold_is_ln2() {
        for alpha in [0.5, 1.0, 2.0, 3.0] {
            let t = purification_threshold(alpha).unwrap();
            assert!((t - LN_2).abs() < 1e-9, "{alpha}: {t}");
            let below = f_tau(DecoherenceParams { gamma_tau: 0.5 * LN_2, alpha });
            let above = f_tau(DecoherenceParams { gamma_tau: 1.5 * LN_2, alpha });
            assert!(below > 0.5 && above < 0.5);
        }
        assert!(purification_threshold(0.0).is_err());
    }
}
