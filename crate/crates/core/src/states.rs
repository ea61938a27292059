//! Finite superpositions and mixtures of multimode coherent states.
//!
//! A pure state is a list of `(coefficient, label)` terms where each label is a
//! product of single-mode coherent states. Every quantity the protocols need
//! (norms, overlaps, detector statistics) reduces to the closed-form overlap
//! `<a|b> = exp(-|a|^2/2 - |b|^2/2 + conj(a) b)`, so nothing is truncated.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

use crate::error::{Error, Result};

/// Labels whose amplitudes differ by less than this (componentwise) are merged.
pub const DEDUP_TOLERANCE: f64 = 1e-12;

/// Squared norms below this are the zero state.
pub const ZERO_NORM_SQR: f64 = 1e-24;

/// Tolerance on the sum of mixture weights.
pub const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// `<alpha|beta>` for single-mode coherent states.
#[inline]
pub fn coherent_overlap(alpha: Complex64, beta: Complex64) -> Complex64 {
    overlap_exponent(alpha, beta).exp()
}

/// Exponent of [`coherent_overlap`]; products of overlaps are sums of these.
#[inline]
pub(crate) fn overlap_exponent(alpha: Complex64, beta: Complex64) -> Complex64 {
    -0.5 * (alpha.norm_sqr() + beta.norm_sqr()) + alpha.conj() * beta
}

/// Per-mode coherent amplitudes of one product coherent state.
#[derive(Clone, Debug, PartialEq)]
pub struct CoherentLabel(Vec<Complex64>);

impl CoherentLabel {
    /// # Errors
    /// [`Error::InvalidArgument`] for an empty or non-finite label.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidArgument("coherent label needs at least one mode"));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("coherent amplitudes must be finite"));
        }
        Ok(Self(amplitudes))
    }

    /// Convenience constructor for real amplitudes.
    pub fn real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    pub fn vacuum(mode_count: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); mode_count])
    }

    pub(crate) fn from_vec_unchecked(amplitudes: Vec<Complex64>) -> Self {
        Self(amplitudes)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.0
    }

    #[inline]
    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    /// `<self|other>` as a product of single-mode overlaps.
    pub fn overlap(&self, other: &CoherentLabel) -> Complex64 {
        self.overlap_exponent(other).exp()
    }

    pub(crate) fn overlap_exponent(&self, other: &CoherentLabel) -> Complex64 {
        self.0.iter().zip(&other.0).map(|(&a, &b)| overlap_exponent(a, b)).sum()
    }

    pub fn approx_eq(&self, other: &CoherentLabel, tol: f64) -> bool {
        self.0.len() == other.0.len()
            && self.0.iter().zip(&other.0).all(|(a, b)| (a.re - b.re).abs() < tol && (a.im - b.im).abs() < tol)
    }

    pub fn concat(&self, other: &CoherentLabel) -> CoherentLabel {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        CoherentLabel(v)
    }

    /// Largest amplitude magnitude on any mode.
    pub fn max_magnitude(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// One `(coefficient, label)` term of a [`SuperposedState`].
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coefficient: Complex64,
    pub label: CoherentLabel,
}

/// A finite, canonicalized superposition of multimode coherent states.
///
/// The empty term list is the explicit zero state.
#[derive(Clone, Debug, PartialEq)]
pub struct SuperposedState {
    mode_count: usize,
    terms: Vec<Term>,
}

impl SuperposedState {
    /// Builds and canonicalizes a state.
    ///
    /// # Errors
    /// [`Error::InvalidArgument`] for a zero mode count, and
    /// [`Error::ModeCountMismatch`] when a label has the wrong length.
    pub fn new(mode_count: usize, terms: Vec<(Complex64, CoherentLabel)>) -> Result<Self> {
        if mode_count == 0 {
            return Err(Error::InvalidArgument("mode count must be positive"));
        }
        for (c, label) in &terms {
            if label.len() != mode_count {
                return Err(Error::ModeCountMismatch { expected: mode_count, found: label.len() });
            }
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::InvalidArgument("coefficients must be finite"));
            }
        }
        Ok(Self::from_terms_unchecked(
            mode_count,
            terms.into_iter().map(|(coefficient, label)| Term { coefficient, label }).collect(),
        ))
    }

    pub(crate) fn from_terms_unchecked(mode_count: usize, terms: Vec<Term>) -> Self {
        let mut s = Self { mode_count, terms };
        s.canonicalize();
        s
    }

    /// Single coherent product state with unit coefficient.
    pub fn coherent(label: CoherentLabel) -> Self {
        Self { mode_count: label.len(), terms: vec![Term { coefficient: Complex64::new(1.0, 0.0), label }] }
    }

    pub fn vacuum(mode_count: usize) -> Self {
        Self::coherent(CoherentLabel::vacuum(mode_count))
    }

    pub fn zero(mode_count: usize) -> Self {
        Self { mode_count, terms: Vec::new() }
    }

    #[inline]
    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    #[inline]
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() || self.norm_sqr() < ZERO_NORM_SQR
    }

    /// Merges labels closer than [`DEDUP_TOLERANCE`] and drops exact zeros.
    /// Term order follows first occurrence, so the operation is idempotent.
    pub fn canonicalize(&mut self) {
        let mut merged: Vec<Term> = Vec::with_capacity(self.terms.len());
        for term in self.terms.drain(..) {
            match merged.iter_mut().find(|t| t.label.approx_eq(&term.label, DEDUP_TOLERANCE)) {
                Some(existing) => existing.coefficient += term.coefficient,
                None => merged.push(term),
            }
        }
        merged.retain(|t| t.coefficient != Complex64::new(0.0, 0.0));
        self.terms = merged;
    }

    /// `<self|other>`.
    ///
    /// # Errors
    /// [`Error::ModeCountMismatch`].
    pub fn inner(&self, other: &SuperposedState) -> Result<Complex64> {
        if self.mode_count != other.mode_count {
            return Err(Error::ModeCountMismatch { expected: self.mode_count, found: other.mode_count });
        }
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &SuperposedState) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in &self.terms {
            for b in &other.terms {
                acc += a.coefficient.conj() * b.coefficient * a.label.overlap(&b.label);
            }
        }
        acc
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner_unchecked(self).re.max(0.0)
    }

    /// # Errors
    /// [`Error::ZeroState`] when the squared norm is below [`ZERO_NORM_SQR`].
    pub fn normalized(&self) -> Result<SuperposedState> {
        let n2 = self.norm_sqr();
        if self.terms.is_empty() || n2 < ZERO_NORM_SQR {
            return Err(Error::ZeroState);
        }
        Ok(self.scaled(Complex64::new(1.0 / n2.sqrt(), 0.0)))
    }

    pub fn scaled(&self, factor: Complex64) -> SuperposedState {
        SuperposedState {
            mode_count: self.mode_count,
            terms: self
                .terms
                .iter()
                .map(|t| Term { coefficient: t.coefficient * factor, label: t.label.clone() })
                .collect(),
        }
    }

    /// Sum of two states on the same modes.
    ///
    /// # Errors
    /// [`Error::ModeCountMismatch`].
    pub fn add(&self, other: &SuperposedState) -> Result<SuperposedState> {
        if self.mode_count != other.mode_count {
            return Err(Error::ModeCountMismatch { expected: self.mode_count, found: other.mode_count });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(Self::from_terms_unchecked(self.mode_count, terms))
    }

    /// `self ⊗ other`; modes of `other` are appended after those of `self`.
    pub fn tensor(&self, other: &SuperposedState) -> SuperposedState {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Term { coefficient: a.coefficient * b.coefficient, label: a.label.concat(&b.label) });
            }
        }
        Self::from_terms_unchecked(self.mode_count + other.mode_count, terms)
    }

    /// Rotates the global phase so the first coefficient is real and positive.
    pub fn with_canonical_phase(mut self) -> SuperposedState {
        if let Some(first) = self.terms.first() {
            let n = first.coefficient.norm();
            if n > 0.0 {
                let rot = first.coefficient.conj() / n;
                for t in &mut self.terms {
                    t.coefficient *= rot;
                }
            }
        }
        self
    }

    /// Applies `f` to every label and re-canonicalizes.
    pub(crate) fn map_terms(&self, mode_count: usize, mut f: impl FnMut(&Term) -> Term) -> SuperposedState {
        Self::from_terms_unchecked(mode_count, self.terms.iter().map(&mut f).collect())
    }

    /// Expands each term through `f`, which may return several terms.
    pub(crate) fn flat_map_terms(&self, mode_count: usize, mut f: impl FnMut(&Term) -> Vec<Term>) -> SuperposedState {
        Self::from_terms_unchecked(mode_count, self.terms.iter().flat_map(&mut f).collect())
    }

    pub(crate) fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.mode_count {
            return Err(Error::InvalidMode { mode, mode_count: self.mode_count });
        }
        Ok(())
    }

    /// Largest coherent amplitude magnitude over all labels.
    pub fn max_amplitude(&self) -> f64 {
        self.terms.iter().map(|t| t.label.max_magnitude()).fold(0.0, f64::max)
    }

    /// True when both states have proportional coefficients on every label,
    /// i.e. they are the same ray up to rounding. A label missing from one
    /// side counts as a zero coefficient.
    pub fn same_ray(&self, other: &SuperposedState, tol: f64) -> bool {
        if self.mode_count != other.mode_count {
            return false;
        }
        let Some(pivot) = self.terms.iter().max_by(|a, b| a.coefficient.norm().total_cmp(&b.coefficient.norm())) else {
            return other.terms.is_empty();
        };
        let zero = Complex64::new(0.0, 0.0);
        let find = |terms: &[Term], label: &CoherentLabel| {
            terms.iter().find(|t| t.label.approx_eq(label, DEDUP_TOLERANCE)).map_or(zero, |t| t.coefficient)
        };
        let partner = find(&other.terms, &pivot.label);
        if partner.norm() == 0.0 {
            return false;
        }
        let ratio = pivot.coefficient / partner;
        let bound = tol * pivot.coefficient.norm();
        self.terms.iter().all(|a| (a.coefficient - ratio * find(&other.terms, &a.label)).norm() <= bound)
            && other.terms.iter().all(|b| (find(&self.terms, &b.label) - ratio * b.coefficient).norm() <= bound)
    }
}

impl fmt::Display for SuperposedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i)|", t.coefficient.re, t.coefficient.im)?;
            for (m, a) in t.label.amplitudes().iter().enumerate() {
                if m > 0 {
                    f.write_str(",")?;
                }
                if a.im == 0.0 {
                    write!(f, "{:.4}", a.re)?;
                } else {
                    write!(f, "{:.4}{:+.4}i", a.re, a.im)?;
                }
            }
            f.write_str(">")?;
        }
        Ok(())
    }
}

/// The two families of two-mode entangled coherent states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EntangledKind {
    /// `|a,a> + e^{i phi}|-a,-a>`
    Phi,
    /// `|a,-a> + e^{i phi}|-a,a>`
    Psi,
}

/// The four quasi-Bell states (`phi` in `{0, pi}`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QuasiBell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl QuasiBell {
    pub const ALL: [QuasiBell; 4] = [QuasiBell::PhiPlus, QuasiBell::PhiMinus, QuasiBell::PsiPlus, QuasiBell::PsiMinus];

    pub fn kind(self) -> EntangledKind {
        match self {
            QuasiBell::PhiPlus | QuasiBell::PhiMinus => EntangledKind::Phi,
            QuasiBell::PsiPlus | QuasiBell::PsiMinus => EntangledKind::Psi,
        }
    }

    pub fn is_plus(self) -> bool {
        matches!(self, QuasiBell::PhiPlus | QuasiBell::PsiPlus)
    }

    pub fn phase(self) -> f64 {
        if self.is_plus() {
            0.0
        } else {
            core::f64::consts::PI
        }
    }

    /// The state with the other kind and the same sign.
    pub fn partner(self) -> QuasiBell {
        match self {
            QuasiBell::PhiPlus => QuasiBell::PsiPlus,
            QuasiBell::PsiPlus => QuasiBell::PhiPlus,
            QuasiBell::PhiMinus => QuasiBell::PsiMinus,
            QuasiBell::PsiMinus => QuasiBell::PhiMinus,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QuasiBell::PhiPlus => "phi+",
            QuasiBell::PhiMinus => "phi-",
            QuasiBell::PsiPlus => "psi+",
            QuasiBell::PsiMinus => "psi-",
        }
    }
}

/// `N(|a,a> + e^{i phi}|-a,-a>)` or `N(|a,-a> + e^{i phi}|-a,a>)`.
///
/// # Errors
/// [`Error::ZeroState`] when the superposition cancels (`a = 0`, `phi = pi`).
pub fn entangled_coherent(alpha: Complex64, phi: f64, kind: EntangledKind) -> Result<SuperposedState> {
    if !alpha.re.is_finite() || !alpha.im.is_finite() || !phi.is_finite() {
        return Err(Error::InvalidArgument("amplitude and phase must be finite"));
    }
    let rel = Complex64::from_polar(1.0, phi);
    let (first, second) = match kind {
        EntangledKind::Phi => ([alpha, alpha], [-alpha, -alpha]),
        EntangledKind::Psi => ([alpha, -alpha], [-alpha, alpha]),
    };
    let s = SuperposedState::new(
        2,
        vec![
            (Complex64::new(1.0, 0.0), CoherentLabel::new(first.to_vec())?),
            (rel, CoherentLabel::new(second.to_vec())?),
        ],
    )?;
    Ok(s.normalized()?.with_canonical_phase())
}

/// Quasi-Bell state with real amplitude `alpha`.
pub fn quasi_bell(alpha: f64, which: QuasiBell) -> Result<SuperposedState> {
    entangled_coherent(Complex64::new(alpha, 0.0), which.phase(), which.kind())
}

/// Single-mode cat state `N(|a> + e^{i phi}|-a>)`.
pub fn cat(alpha: Complex64, phi: f64) -> Result<SuperposedState> {
    let s = SuperposedState::new(
        1,
        vec![
            (Complex64::new(1.0, 0.0), CoherentLabel::new(vec![alpha])?),
            (Complex64::from_polar(1.0, phi), CoherentLabel::new(vec![-alpha])?),
        ],
    )?;
    Ok(s.normalized()?.with_canonical_phase())
}

/// Even cat `|U>` built on amplitude `sqrt(2) alpha`.
pub fn even_cat_u(alpha: f64) -> Result<SuperposedState> {
    cat(Complex64::new(core::f64::consts::SQRT_2 * alpha, 0.0), 0.0)
}

/// Odd cat `|V>` built on amplitude `sqrt(2) alpha`.
pub fn odd_cat_v(alpha: f64) -> Result<SuperposedState> {
    cat(Complex64::new(core::f64::consts::SQRT_2 * alpha, 0.0), core::f64::consts::PI)
}

/// `N(|a,...,a> + s |-a,...,-a>)`-type multimode state with an arbitrary
/// sign pattern: `pattern[m]` is `+1` or `-1` and the second branch flips it.
pub fn multimode_cat(alpha: f64, pattern: &[f64], relative_sign: f64) -> Result<SuperposedState> {
    let first: Vec<Complex64> = pattern.iter().map(|&s| Complex64::new(s * alpha, 0.0)).collect();
    let second: Vec<Complex64> = first.iter().map(|&z| -z).collect();
    let s = SuperposedState::new(
        pattern.len(),
        vec![
            (Complex64::new(1.0, 0.0), CoherentLabel::new(first)?),
            (Complex64::new(relative_sign, 0.0), CoherentLabel::new(second)?),
        ],
    )?;
    Ok(s.normalized()?.with_canonical_phase())
}

/// Convex mixture of normalized pure states.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedState {
    mode_count: usize,
    components: Vec<(f64, SuperposedState)>,
}

impl MixedState {
    pub fn pure(state: SuperposedState) -> Result<Self> {
        let s = state.normalized()?;
        Ok(Self { mode_count: s.mode_count(), components: vec![(1.0, s)] })
    }

    /// Validated constructor: weights in `(0, 1]` summing to one within
    /// [`WEIGHT_SUM_TOLERANCE`]; component states are normalized.
    ///
    /// # Errors
    /// [`Error::InvalidArgument`] on bad weights or an empty list,
    /// [`Error::ModeCountMismatch`], [`Error::ZeroState`].
    pub fn new(components: Vec<(f64, SuperposedState)>) -> Result<Self> {
        let Some(first) = components.first() else {
            return Err(Error::InvalidArgument("mixture needs at least one component"));
        };
        let mode_count = first.1.mode_count();
        let mut total = 0.0;
        let mut out = Vec::with_capacity(components.len());
        for (w, s) in components {
            if !(w > 0.0 && w <= 1.0 + WEIGHT_SUM_TOLERANCE) {
                return Err(Error::InvalidArgument("mixture weights must lie in (0, 1]"));
            }
            if s.mode_count() != mode_count {
                return Err(Error::ModeCountMismatch { expected: mode_count, found: s.mode_count() });
            }
            total += w;
            out.push((w, s.normalized()?));
        }
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidArgument("mixture weights must sum to one"));
        }
        Ok(Self { mode_count, components: out })
    }

    /// Builds a mixture from nonnegative weights that are rescaled to sum to
    /// one. Components with zero weight or zero norm are dropped.
    ///
    /// # Errors
    /// [`Error::ImpossibleOutcome`] when nothing survives.
    pub(crate) fn from_unnormalized(mode_count: usize, components: Vec<(f64, SuperposedState)>) -> Result<Self> {
        let mut kept: Vec<(f64, SuperposedState)> = components
            .into_iter()
            .filter(|(w, s)| *w > 0.0 && !s.terms().is_empty())
            .filter_map(|(w, s)| s.normalized().ok().map(|n| (w, n)))
            .collect();
        let total: f64 = kept.iter().map(|(w, _)| w).sum();
        if kept.is_empty() || total <= 0.0 {
            return Err(Error::ImpossibleOutcome);
        }
        for (w, _) in &mut kept {
            *w /= total;
        }
        let mut m = Self { mode_count, components: kept };
        m.compress();
        Ok(m)
    }

    #[inline]
    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    #[inline]
    pub fn components(&self) -> &[(f64, SuperposedState)] {
        &self.components
    }

    /// `<target| rho |target>` for a normalized target.
    ///
    /// # Errors
    /// [`Error::ModeCountMismatch`].
    pub fn fidelity(&self, target: &SuperposedState) -> Result<f64> {
        if target.mode_count() != self.mode_count {
            return Err(Error::ModeCountMismatch { expected: self.mode_count, found: target.mode_count() });
        }
        Ok(self.components.iter().map(|(w, s)| w * target.inner_unchecked(s).norm_sqr()).sum::<f64>().clamp(0.0, 1.0))
    }

    /// `rho ⊗ sigma` as the product mixture.
    pub fn tensor(&self, other: &MixedState) -> MixedState {
        let mut components = Vec::with_capacity(self.components.len() * other.components.len());
        for (w1, s1) in &self.components {
            for (w2, s2) in &other.components {
                components.push((w1 * w2, s1.tensor(s2)));
            }
        }
        MixedState { mode_count: self.mode_count + other.mode_count, components }
    }

    /// Applies a fallible pure-state map to every component.
    pub fn try_map(&self, mut f: impl FnMut(&SuperposedState) -> Result<SuperposedState>) -> Result<MixedState> {
        let components = self.components.iter().map(|(w, s)| f(s).map(|t| (*w, t))).collect::<Result<Vec<_>>>()?;
        let mode_count = components.first().map_or(self.mode_count, |(_, s)| s.mode_count());
        Ok(MixedState { mode_count, components })
    }

    /// Applies a possibly non-norm-preserving linear map to every component
    /// and renormalizes the mixture (`L rho L^† / tr`).
    pub fn try_map_nonunitary(
        &self,
        mut f: impl FnMut(&SuperposedState) -> Result<SuperposedState>,
    ) -> Result<MixedState> {
        let mut out = Vec::with_capacity(self.components.len());
        let mut mode_count = self.mode_count;
        for (w, s) in &self.components {
            let t = f(s)?;
            mode_count = t.mode_count();
            out.push((w * t.norm_sqr(), t));
        }
        Self::from_unnormalized(mode_count, out)
    }

    /// Merges components that are the same ray and drops negligible weights.
    pub fn compress(&mut self) {
        let mut merged: Vec<(f64, SuperposedState)> = Vec::with_capacity(self.components.len());
        for (w, s) in self.components.drain(..) {
            match merged.iter_mut().find(|(_, t)| t.same_ray(&s, 1e-10)) {
                Some(existing) => existing.0 += w,
                None => merged.push((w, s)),
            }
        }
        merged.retain(|(w, _)| *w > 1e-16);
        let total: f64 = merged.iter().map(|(w, _)| w).sum();
        if total > 0.0 {
            for (w, _) in &mut merged {
                *w /= total;
            }
        }
        self.components = merged;
    }

    /// Largest coherent amplitude over all components.
    pub fn max_amplitude(&self) -> f64 {
        self.components.iter().map(|(_, s)| s.max_amplitude()).fold(0.0, f64::max)
    }

    pub fn weight_sum(&self) -> f64 {
        self.components.iter().map(|(w, _)| w).sum()
    }
}

impl From<SuperposedState> for MixedState {
    /// Wraps a state that is already normalized.
    fn from(s: SuperposedState) -> Self {
        MixedState { mode_count: s.mode_count(), components: vec![(1.0, s)] }
    }
}

/// `sum_i w_i |<target|psi_i>|^2`.
pub fn fidelity(rho: &MixedState, target: &SuperposedState) -> Result<f64> {
    rho.fidelity(target)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn overlap_identity_and_vacuum() {
        let a = Complex64::new(0.7, -1.3);
        assert!((coherent_overlap(a, a) - c(1.0)).norm() < 1e-15);
        let b = Complex64::new(1.1, 0.4);
        let expected = (-b.norm_sqr() / 2.0).exp();
        assert!((coherent_overlap(c(0.0), b) - c(expected)).norm() < 1e-15);
    }

    #[test]
    fn opposite_amplitudes_overlap() {
        // frozen from the truncated number-basis inner product at cutoff 40
        let v = coherent_overlap(c(1.0), c(-1.0));
        assert!((v.re - 0.1353352832366127).abs() < 1e-15);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn quasi_bell_overlaps() {
        for alpha in [0.3, 0.5, 1.0, 2.0] {
            let pp = quasi_bell(alpha, QuasiBell::PhiPlus).unwrap();
            let sp = quasi_bell(alpha, QuasiBell::PsiPlus).unwrap();
            let v = sp.inner(&pp).unwrap();
            let expected = 1.0 / (2.0 * alpha * alpha).cosh();
            assert!((v.re - expected).abs() < 1e-14 && v.im.abs() < 1e-15);
            let pm = quasi_bell(alpha, QuasiBell::PhiMinus).unwrap();
            for other in [QuasiBell::PhiPlus, QuasiBell::PsiPlus, QuasiBell::PsiMinus] {
                let o = quasi_bell(alpha, other).unwrap();
                assert!(pm.inner(&o).unwrap().norm() < 1e-15, "{other:?}");
            }
        }
    }

    #[test]
    fn normalization_matches_closed_form() {
        let alpha = 0.9_f64;
        let raw = SuperposedState::new(
            2,
            vec![
                (c(1.0), CoherentLabel::real(&[alpha, alpha]).unwrap()),
                (c(1.0), CoherentLabel::real(&[-alpha, -alpha]).unwrap()),
            ],
        )
        .unwrap();
        let n = raw.normalized().unwrap();
        let expected = 1.0 / (2.0 * (1.0 + (-4.0 * alpha * alpha).exp())).sqrt();
        assert!((n.terms()[0].coefficient.re - expected).abs() < 1e-15);
        assert!((n.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_term_normalizes_to_unit_phase() {
        let s =
            SuperposedState::new(1, vec![(Complex64::new(0.0, -3.0), CoherentLabel::real(&[0.4]).unwrap())]).unwrap();
        let n = s.normalized().unwrap();
        assert!((n.terms()[0].coefficient - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn cancelling_terms_are_zero_state() {
        let l = CoherentLabel::real(&[0.8]).unwrap();
        let s = SuperposedState::new(1, vec![(c(1.0), l.clone()), (c(-1.0), l)]).unwrap();
        assert_eq!(s.normalized(), Err(Error::ZeroState));
        assert_eq!(entangled_coherent(c(0.0), core::f64::consts::PI, EntangledKind::Phi), Err(Error::ZeroState));
        let vac = entangled_coherent(c(0.0), 0.0, EntangledKind::Phi).unwrap();
        assert_eq!(vac.terms().len(), 1);
        assert!(vac.same_ray(&SuperposedState::vacuum(2), 1e-12));
    }

    #[test]
    fn tensor_examples() {
        let alpha = 0.6;
        let pm = quasi_bell(alpha, QuasiBell::PhiMinus).unwrap();
        let t = pm.tensor(&pm);
        assert_eq!(t.mode_count(), 4);
        assert_eq!(t.terms().len(), 4);
        let with_vac = pm.tensor(&SuperposedState::vacuum(1));
        assert_eq!(with_vac.terms().len(), 2);
        assert!(with_vac.terms().iter().all(|t| t.label.amplitudes()[2] == c(0.0)));

        let plus = SuperposedState::new(
            1,
            vec![(c(1.0), CoherentLabel::real(&[1.0]).unwrap()), (c(1.0), CoherentLabel::real(&[-1.0]).unwrap())],
        )
        .unwrap();
        let minus = SuperposedState::new(
            1,
            vec![(c(1.0), CoherentLabel::real(&[1.0]).unwrap()), (c(-1.0), CoherentLabel::real(&[-1.0]).unwrap())],
        )
        .unwrap();
        let signs: Vec<f64> = plus.tensor(&minus).terms().iter().map(|t| t.coefficient.re).collect();
        assert_eq!(signs, alloc::vec![1.0, -1.0, 1.0, -1.0]);
    }

    #[test]
    fn werner_pair_fidelities() {
        let alpha = 1.3;
        let f = 0.7;
        let pm = quasi_bell(alpha, QuasiBell::PhiMinus).unwrap();
        let sm = quasi_bell(alpha, QuasiBell::PsiMinus).unwrap();
        let rho = MixedState::new(alloc::vec![(f, pm.clone()), (1.0 - f, sm.clone())]).unwrap();
        assert!((rho.fidelity(&pm).unwrap() - f).abs() < 1e-14);
        assert!((rho.fidelity(&sm).unwrap() - (1.0 - f)).abs() < 1e-14);
        assert!((MixedState::pure(pm.clone()).unwrap().fidelity(&pm).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(rho.fidelity(&SuperposedState::vacuum(1)), Err(Error::ModeCountMismatch { .. })));
    }

    #[test]
    fn mixture_weight_validation() {
        let s = SuperposedState::vacuum(1);
        assert!(MixedState::new(alloc::vec![(0.5, s.clone()), (0.4, s.clone())]).is_err());
        assert!(MixedState::new(alloc::vec![(1.0, s)]).is_ok());
        assert!(MixedState::new(alloc::vec![]).is_err());
    }

    fn label_strategy(modes: usize) -> impl Strategy<Value = CoherentLabel> {
        proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0), modes)
            .prop_map(|v| CoherentLabel::new(v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect()).unwrap())
    }

    fn state_strategy(modes: usize) -> impl Strategy<Value = SuperposedState> {
        proptest::collection::vec(((-1.0f64..1.0, -1.0f64..1.0), label_strategy(modes)), 1..4).prop_filter_map(
            "nonzero",
            move |terms| {
                SuperposedState::new(modes, terms.into_iter().map(|((r, i), l)| (Complex64::new(r, i), l)).collect())
                    .ok()?
                    .normalized()
                    .ok()
            },
        )
    }

    proptest! {
        #[test]
        fn cauchy_schwarz(a in state_strategy(2), b in state_strategy(2)) {
            prop_assert!(a.inner(&b).unwrap().norm() <= 1.0 + 1e-12);
        }

        #[test]
        fn canonicalize_is_idempotent(s in state_strategy(2)) {
            let mut doubled = s.add(&s).unwrap();
            let once = doubled.clone();
            doubled.canonicalize();
            prop_assert_eq!(once, doubled);
        }

        #[test]
        fn inner_product_factorizes_over_tensor(a in state_strategy(1), b in state_strategy(2), c1 in state_strategy(1), d in state_strategy(2)) {
            let lhs = a.tensor(&b).inner(&c1.tensor(&d)).unwrap();
            let rhs = a.inner(&c1).unwrap() * b.inner(&d).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn tensor_is_associative(a in state_strategy(1), b in state_strategy(1), c1 in state_strategy(1)) {
            let left = a.tensor(&b).tensor(&c1);
            let right = a.tensor(&b.tensor(&c1));
            prop_assert!((left.inner(&right).unwrap().norm() - 1.0).abs() < 1e-12);
            prop_assert_eq!(left.terms().len(), right.terms().len());
        }

        #[test]
        fn gram_matrix_is_psd(labels in proptest::collection::vec(label_strategy(2), 1..6)) {
            let n = labels.len();
            let g = crate::linalg::Matrix::from_fn(n, n, |i, j| labels[i].overlap(&labels[j]));
            let e = crate::linalg::eigh(&g);
            prop_assert!(e.values[0] >= -1e-10);
        }
    }
}
