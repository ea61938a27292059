//! Logical basis, reduced densities, entropies and quasi-Bell measurement.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::LN_2;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;
use rand::Rng;

use crate::conditioning::{self, Projector};
use crate::error::{Error, Result};
use crate::linalg::{eigh, entropy_bits, psd_sqrt, Matrix};
use crate::optics::{beam_splitter, qubit_amplitude};
use crate::states::{CoherentLabel, MixedState, SuperposedState, DEDUP_TOLERANCE};

/// Eigenvalues below this are dropped from entropy sums.
pub const ENTROPY_CUTOFF: f64 = 1e-14;

/// `|u> = M_+(|a> + |-a>)`, `|v> = M_-(|a> - |-a>)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogicalBasis {
    pub alpha: f64,
    /// Coefficients of `|u>` on `(|a>, |-a>)`.
    pub u_coeffs: [Complex64; 2],
    pub v_coeffs: [Complex64; 2],
}

impl LogicalBasis {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidArgument("logical basis needs a positive amplitude"));
        }
        let x = (-2.0 * alpha * alpha).exp();
        let mp = 1.0 / (2.0 * (1.0 + x)).sqrt();
        let mm = 1.0 / (2.0 * (-(-2.0 * alpha * alpha).exp_m1())).sqrt();
        let re = |v: f64| Complex64::new(v, 0.0);
        Ok(Self { alpha, u_coeffs: [re(mp), re(mp)], v_coeffs: [re(mm), re(-mm)] })
    }

    pub fn m_plus(&self) -> f64 {
        self.u_coeffs[0].re
    }

    pub fn m_minus(&self) -> f64 {
        self.v_coeffs[0].re
    }

    fn state(&self, coeffs: [Complex64; 2]) -> SuperposedState {
        let a = Complex64::new(self.alpha, 0.0);
        SuperposedState::new(
            1,
            vec![
                (coeffs[0], CoherentLabel::from_vec_unchecked(vec![a])),
                (coeffs[1], CoherentLabel::from_vec_unchecked(vec![-a])),
            ],
        )
        .expect("one-mode labels")
    }

    pub fn u(&self) -> SuperposedState {
        self.state(self.u_coeffs)
    }

    pub fn v(&self) -> SuperposedState {
        self.state(self.v_coeffs)
    }

    /// `(<u|psi>, <v|psi>)` for `psi = c0|a> + c1|-a>`.
    pub fn to_uv(&self, c: [Complex64; 2]) -> [Complex64; 2] {
        [(c[0] + c[1]) / (2.0 * self.m_plus()), (c[0] - c[1]) / (2.0 * self.m_minus())]
    }
}

/// Reduced density matrix in the Löwdin basis of the kept labels.
#[derive(Clone, Debug)]
pub struct ReducedDensity {
    /// Distinct labels of the kept modes; the basis is their symmetric
    /// orthogonalization.
    pub labels: Vec<CoherentLabel>,
    pub matrix: Matrix,
}

impl ReducedDensity {
    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.matrix).values
    }

    pub fn entropy(&self) -> f64 {
        entropy_bits(&self.eigenvalues(), ENTROPY_CUTOFF)
    }
}

fn check_partition(mode_count: usize, keep: &[usize]) -> Result<()> {
    if keep.is_empty() || keep.len() >= mode_count {
        return Err(Error::TrivialPartition);
    }
    for (i, &m) in keep.iter().enumerate() {
        if m >= mode_count || keep[..i].contains(&m) {
            return Err(Error::InvalidMode { mode: m, mode_count });
        }
    }
    Ok(())
}

/// Traces out every mode not in `keep`.
pub fn reduced_density(s: &SuperposedState, keep: &[usize]) -> Result<ReducedDensity> {
    check_partition(s.mode_count(), keep)?;
    let s = s.normalized()?;
    let traced: Vec<usize> = (0..s.mode_count()).filter(|m| !keep.contains(m)).collect();
    let pick = |label: &CoherentLabel, modes: &[usize]| {
        CoherentLabel::from_vec_unchecked(modes.iter().map(|&m| label.amplitudes()[m]).collect())
    };

    let mut labels: Vec<CoherentLabel> = Vec::new();
    let mut index = Vec::with_capacity(s.terms().len());
    let mut rests = Vec::with_capacity(s.terms().len());
    for t in s.terms() {
        let k = pick(&t.label, keep);
        let p = match labels.iter().position(|l| l.approx_eq(&k, DEDUP_TOLERANCE)) {
            Some(p) => p,
            None => {
                labels.push(k);
                labels.len() - 1
            }
        };
        index.push(p);
        rests.push(pick(&t.label, &traced));
    }
    let d = labels.len();
    let mut a = Matrix::zeros(d, d);
    for (i, ti) in s.terms().iter().enumerate() {
        for (j, tj) in s.terms().iter().enumerate() {
            a[(index[i], index[j])] += ti.coefficient * tj.coefficient.conj() * rests[j].overlap(&rests[i]);
        }
    }
    let gram = Matrix::from_fn(d, d, |p, q| labels[p].overlap(&labels[q]));
    let root = psd_sqrt(&gram);
    let matrix = root.matmul(&a).matmul(&root);
    Ok(ReducedDensity { labels, matrix })
}

/// Reduced density of a qubit-space mode in the `(u, v)` basis.
pub fn qubit_density(s: &SuperposedState, mode: usize) -> Result<(LogicalBasis, Matrix)> {
    let alpha = qubit_amplitude(s, mode)?;
    if alpha.im.abs() > 1e-12 {
        return Err(Error::InvalidArgument("qubit density expects a real amplitude"));
    }
    let basis = LogicalBasis::new(alpha.re)?;
    let s = s.normalized()?;
    let others: Vec<usize> = (0..s.mode_count()).filter(|&m| m != mode).collect();
    let mut vectors: Vec<([Complex64; 2], CoherentLabel)> = Vec::new();
    for t in s.terms() {
        let amp = t.label.amplitudes()[mode];
        let col = usize::from((amp - alpha).norm() > 1e-10);
        let mut coeffs = [Complex64::new(0.0, 0.0); 2];
        coeffs[col] = t.coefficient;
        let rest = CoherentLabel::from_vec_unchecked(others.iter().map(|&m| t.label.amplitudes()[m]).collect());
        vectors.push((basis.to_uv(coeffs), rest));
    }
    let mut rho = Matrix::zeros(2, 2);
    for (ci, ri) in &vectors {
        for (cj, rj) in &vectors {
            let g = if others.is_empty() { Complex64::new(1.0, 0.0) } else { rj.overlap(ri) };
            for p in 0..2 {
                for q in 0..2 {
                    rho[(p, q)] += ci[p] * cj[q].conj() * g;
                }
            }
        }
    }
    Ok((basis, rho))
}

/// Base-2 entropy of the reduced state of `keep`.
pub fn entanglement_entropy(s: &SuperposedState, keep: &[usize]) -> Result<f64> {
    Ok(reduced_density(s, keep)?.entropy())
}

/// Entropy of entanglement of a two-mode state (reduced state of mode 0).
pub fn entropy_of_entanglement(s: &SuperposedState) -> Result<f64> {
    if s.mode_count() != 2 {
        return Err(Error::ModeCountMismatch { expected: 2, found: s.mode_count() });
    }
    entanglement_entropy(s, &[0])
}

fn binary_entropy_of(l1: f64, l2: f64) -> f64 {
    let term = |l: f64| if l > ENTROPY_CUTOFF { l * l.ln() } else { 0.0 };
    -(term(l1) + term(l2)) / LN_2
}

/// Entropy of `N(|a,a> + e^{i phi}|-a,-a>)` in bits, in closed form.
///
/// The reduced state has determinant `N^4 (1 - e^{-4|a|^2})^2` and unit
/// trace, so its eigenvalues are `(1 +- sqrt(1 - 4 N^4 (1 - e^{-4|a|^2})^2)) / 2`.
pub fn entropy_closed_form(alpha: f64, phi: f64) -> f64 {
    let a2 = alpha * alpha;
    let n2 = 1.0 / (2.0 * (1.0 + phi.cos() * (-4.0 * a2).exp()));
    let det = n2 * n2 * (-4.0 * a2).exp_m1().powi(2);
    let disc = (1.0 - 4.0 * det).max(0.0).sqrt();
    binary_entropy_of(0.5 * (1.0 + disc), 0.5 * (1.0 - disc))
}

/// The product form with eigenvalues `N^2 M(0) M(phi)` and
/// `N^2 M(pi) M(phi + pi)`, `M(phi) = 1 + cos(phi) e^{-2|a|^2}`.
///
/// These are the true eigenvalues only for `phi` in `{0, pi}`; elsewhere
/// they do not multiply to the determinant of the reduced state and the
/// value differs from [`entropy_closed_form`].
pub fn entropy_product_form(alpha: f64, phi: f64) -> f64 {
    let x = (-2.0 * alpha * alpha).exp();
    let m = |p: f64| 1.0 + p.cos() * x;
    let n2 = 1.0 / (2.0 * (1.0 + phi.cos() * x * x));
    binary_entropy_of(n2 * m(0.0) * m(phi), n2 * (-(-2.0 * alpha * alpha).exp_m1()) * m(phi + core::f64::consts::PI))
}

/// `|<0|U>|^2` for the even cat `U` of amplitude `sqrt(2) a` that a plus-type
/// state sends into one port of the measurement: `2 e^{-2a^2} / (1 + e^{-4a^2})`.
/// This is the failure probability of [`quasi_bell_measure`] on a plus-type input.
pub fn even_cat_vacuum_probability(alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    2.0 * (-2.0 * a2).exp() / (1.0 + (-4.0 * a2).exp())
}

/// The published variant `e^{-2a^2} / (1 + e^{-4a^2})^2`, kept for comparison.
pub fn even_cat_vacuum_probability_printed(alpha: f64) -> f64 {
    let a2 = alpha * alpha;
    let d = 1.0 + (-4.0 * a2).exp();
    (-2.0 * a2).exp() / (d * d)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
    Fail,
}

impl BellOutcome {
    pub const ALL: [BellOutcome; 5] =
        [BellOutcome::PhiPlus, BellOutcome::PhiMinus, BellOutcome::PsiPlus, BellOutcome::PsiMinus, BellOutcome::Fail];
}

/// Per-port result of a parity detector that also registers the vacuum.
const PORT_OUTCOMES: [Projector; 3] = [Projector::Vacuum, Projector::EvenClick, Projector::Odd];

fn classify(f: Projector, g: Projector) -> BellOutcome {
    match (f, g) {
        (Projector::Odd, Projector::Vacuum) => BellOutcome::PhiMinus,
        (Projector::EvenClick, Projector::Vacuum) => BellOutcome::PhiPlus,
        (Projector::Vacuum, Projector::Odd) => BellOutcome::PsiMinus,
        (Projector::Vacuum, Projector::EvenClick) => BellOutcome::PsiPlus,
        _ => BellOutcome::Fail,
    }
}

/// Exact outcome distribution of the beam-splitter + parity measurement,
/// in the order of [`BellOutcome::ALL`].
pub fn quasi_bell_measure(rho: &MixedState) -> Result<[(BellOutcome, f64); 5]> {
    if rho.mode_count() != 2 {
        return Err(Error::ModeCountMismatch { expected: 2, found: rho.mode_count() });
    }
    let after = rho.try_map(|s| beam_splitter(s, 0, 1))?;
    let mut out = BellOutcome::ALL.map(|o| (o, 0.0));
    for f in PORT_OUTCOMES {
        for g in PORT_OUTCOMES {
            let p = conditioning::probability(&after, &[(0, f), (1, g)])?;
            let slot = BellOutcome::ALL.iter().position(|&o| o == classify(f, g)).expect("listed");
            out[slot].1 += p;
        }
    }
    Ok(out)
}

/// Draws one outcome of [`quasi_bell_measure`].
pub fn sample_quasi_bell<R: Rng + ?Sized>(rho: &MixedState, rng: &mut R) -> Result<(BellOutcome, f64)> {
    let dist = quasi_bell_measure(rho)?;
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(o, p) in &dist {
        acc += p;
        if u < acc {
            return Ok((o, p));
        }
    }
    Ok(*dist.iter().rev().find(|(_, p)| *p > 0.0).unwrap_or(&dist[4]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{entangled_coherent, quasi_bell, EntangledKind, QuasiBell};
    use core::f64::consts::PI;
    use proptest::prelude::*;

    #[test]
    fn logical_basis_is_orthonormal() {
        for alpha in [0.1, 0.5, 1.0, 2.5, 5.0] {
            let b = LogicalBasis::new(alpha).unwrap();
            let (u, v) = (b.u(), b.v());
            assert!((u.norm_sqr() - 1.0).abs() < 1e-12);
            assert!((v.norm_sqr() - 1.0).abs() < 1e-12);
            assert!(u.inner(&v).unwrap().norm() < 1e-12);
        }
    }

    #[test]
    fn phi_zero_is_diagonal_in_uv() {
        let alpha = 0.7;
        let s = entangled_coherent(Complex64::new(alpha, 0.0), 0.0, EntangledKind::Phi).unwrap();
        let (b, rho) = qubit_density(&s, 0).unwrap();
        assert!(rho[(0, 1)].norm() < 1e-14);
        let ratio = rho[(1, 1)].re / rho[(0, 0)].re;
        let expected = (b.m_plus() / b.m_minus()).powi(4);
        assert!((ratio - expected).abs() < 1e-12 * expected);
    }

    #[test]
    fn product_state_is_pure() {
        let s = SuperposedState::coherent(CoherentLabel::real(&[0.5, -1.0, 2.0]).unwrap());
        assert!(entanglement_entropy(&s, &[1]).unwrap().abs() < 1e-12);
        assert_eq!(entanglement_entropy(&s, &[]).unwrap_err(), Error::TrivialPartition);
        assert_eq!(entanglement_entropy(&s, &[0, 1, 2]).unwrap_err(), Error::TrivialPartition);
    }

    #[test]
    fn entropy_values() {
        for alpha in [0.5, 1.0, 2.0, 3.0] {
            let s = entangled_coherent(Complex64::new(alpha, 0.0), PI, EntangledKind::Phi).unwrap();
            assert!((entropy_of_entanglement(&s).unwrap() - 1.0).abs() < 1e-9);
            assert!((entropy_closed_form(alpha, PI) - 1.0).abs() < 1e-12);
            assert!((entropy_product_form(alpha, PI) - 1.0).abs() < 1e-12);
        }
        assert!((entropy_closed_form(2.0, 0.0) - 0.9999997).abs() < 1e-7);
        assert!((entropy_product_form(2.0, 0.0) - 0.9999997).abs() < 1e-7);
        assert!(entropy_closed_form(3.0, 0.0) >= 1.0 - 1e-9);
    }

    #[test]
    fn product_form_departs_off_axis() {
        assert!((entropy_product_form(1.0, 1.0) - entropy_closed_form(1.0, 1.0)).abs() > 1e-3);
    }

    #[test]
    fn entropy_minimized_at_zero_phase() {
        for alpha in [0.8, 1.0, 1.2] {
            let e0 = entropy_closed_form(alpha, 0.0);
            for k in 1..64 {
                assert!(entropy_closed_form(alpha, 2.0 * PI * k as f64 / 64.0) > e0);
            }
        }
    }

    #[test]
    fn bell_measurement_confusion_matrix() {
        let alpha = 1.0;
        for which in QuasiBell::ALL {
            let rho = MixedState::pure(quasi_bell(alpha, which).unwrap()).unwrap();
            let dist = quasi_bell_measure(&rho).unwrap();
            let total: f64 = dist.iter().map(|(_, p)| p).sum();
            assert!((total - 1.0).abs() < 1e-10);
            for (o, p) in dist {
                let own = matches!(
                    (o, which),
                    (BellOutcome::PhiPlus, QuasiBell::PhiPlus)
                        | (BellOutcome::PhiMinus, QuasiBell::PhiMinus)
                        | (BellOutcome::PsiPlus, QuasiBell::PsiPlus)
                        | (BellOutcome::PsiMinus, QuasiBell::PsiMinus)
                        | (BellOutcome::Fail, _)
                );
                if !own {
                    assert!(p < 1e-14, "{which:?} -> {o:?}: {p}");
                }
            }
            let fail = dist[4].1;
            let expected = if which.is_plus() { even_cat_vacuum_probability(alpha) } else { 0.0 };
            assert!((fail - expected).abs() < 1e-14);
        }
        assert!((even_cat_vacuum_probability(1.0) - even_cat_vacuum_probability_printed(1.0)).abs() > 0.1);
    }

    proptest! {
        #[test]
        fn closed_form_matches_gram(alpha in 0.1f64..2.5, phi in 0.0f64..core::f64::consts::TAU) {
            prop_assume!(!(alpha < 0.2 && (phi - PI).abs() < 0.1));
            for kind in [EntangledKind::Phi, EntangledKind::Psi] {
                let s = entangled_coherent(Complex64::new(alpha, 0.0), phi, kind).unwrap();
                let e = entropy_of_entanglement(&s).unwrap();
                prop_assert!((e - entropy_closed_form(alpha, phi)).abs() < 1e-9, "{:?}", kind);
            }
        }

        #[test]
        fn product_form_agrees_only_on_real_phases(alpha in 0.1f64..2.5) {
            for phi in [0.0, PI] {
                prop_assert!((entropy_product_form(alpha, phi) - entropy_closed_form(alpha, phi)).abs() < 1e-10);
            }
        }
    }
}
