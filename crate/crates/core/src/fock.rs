//! Truncated number-basis oracle.
//!
//! Everything here is computed from photon-number amplitudes and shares no
//! code path with the coherent-label engine apart from the eigensolver, so
//! agreement between the two is a meaningful check. Dense arrays only; at
//! most [`MAX_MODES`] modes.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{eigh, entropy_bits, Matrix};
use crate::optics::BeamSplitterConvention;
use crate::states::{MixedState, SuperposedState};

pub const MAX_MODES: usize = 4;

/// `ceil(a^2 + 6a + 10)` for the largest amplitude magnitude `a` that the
/// computation reaches; the Poisson tail beyond it is below `1e-9`.
pub fn cutoff_for(alpha_max: f64) -> usize {
    let a = alpha_max.abs();
    (a * a + 6.0 * a + 10.0).ceil() as usize
}

/// Step count for [`lindblad_evolve`]: `max(1000, ceil(1e4 * gamma_tau))`.
pub fn lindblad_steps(gamma_tau: f64) -> usize {
    ((1e4 * gamma_tau).ceil() as usize).max(1000)
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Amplitudes over `N^modes` number states, row-major with mode 0 slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    cutoff: usize,
    mode_count: usize,
    amplitudes: Vec<Complex64>,
}

fn check_shape(cutoff: usize, mode_count: usize) -> Result<usize> {
    if cutoff < 2 {
        return Err(Error::InvalidArgument("Fock cutoff must be at least 2"));
    }
    if mode_count == 0 || mode_count > MAX_MODES {
        return Err(Error::InvalidArgument("Fock oracle supports 1 to 4 modes"));
    }
    cutoff.checked_pow(mode_count as u32).ok_or(Error::InvalidArgument("Fock dimension overflows"))
}

impl FockVector {
    pub fn vacuum(cutoff: usize, mode_count: usize) -> Result<Self> {
        let dim = check_shape(cutoff, mode_count)?;
        let mut amplitudes = vec![zero(); dim];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(Self { cutoff, mode_count, amplitudes })
    }

    pub fn from_amplitudes(cutoff: usize, mode_count: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        let dim = check_shape(cutoff, mode_count)?;
        if amplitudes.len() != dim {
            return Err(Error::InvalidArgument("amplitude array has the wrong length"));
        }
        Ok(Self { cutoff, mode_count, amplitudes })
    }

    /// Product of truncated coherent states.
    pub fn product(labels: &[Complex64], cutoff: usize) -> Result<Self> {
        check_shape(cutoff, labels.len())?;
        let factors: Vec<Vec<Complex64>> = labels.iter().map(|&a| coherent_amplitudes(a, cutoff)).collect();
        let mut amplitudes = vec![Complex64::new(1.0, 0.0)];
        for f in &factors {
            let mut next = Vec::with_capacity(amplitudes.len() * cutoff);
            for &x in &amplitudes {
                next.extend(f.iter().map(|&y| x * y));
            }
            amplitudes = next;
        }
        Ok(Self { cutoff, mode_count: labels.len(), amplitudes })
    }

    /// Number-basis image of a coherent superposition.
    pub fn from_state(s: &SuperposedState, cutoff: usize) -> Result<Self> {
        let dim = check_shape(cutoff, s.mode_count())?;
        let mut amplitudes = vec![zero(); dim];
        for t in s.terms() {
            let p = Self::product(t.label.amplitudes(), cutoff)?;
            for (a, b) in amplitudes.iter_mut().zip(&p.amplitudes) {
                *a += t.coefficient * b;
            }
        }
        Ok(Self { cutoff, mode_count: s.mode_count(), amplitudes })
    }

    #[inline]
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    #[inline]
    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// `1 - |v|^2` for a vector built from a normalized state.
    pub fn leakage(&self) -> f64 {
        1.0 - self.norm_sqr()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &FockVector) -> Result<Complex64> {
        if self.mode_count != other.mode_count || self.cutoff != other.cutoff {
            return Err(Error::ModeCountMismatch { expected: self.mode_count, found: other.mode_count });
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    fn stride(&self, mode: usize) -> usize {
        self.cutoff.pow((self.mode_count - 1 - mode) as u32)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.mode_count {
            return Err(Error::InvalidMode { mode, mode_count: self.mode_count });
        }
        Ok(())
    }

    /// Photon number on `mode` at flat index `idx`.
    fn occupation(&self, idx: usize, mode: usize) -> usize {
        (idx / self.stride(mode)) % self.cutoff
    }
}

/// `e^{-|a|^2/2} a^n / sqrt(n!)` for `n < cutoff`, by stable recursion.
fn coherent_amplitudes(alpha: Complex64, cutoff: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(cutoff);
    let mut c = Complex64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..cutoff {
        out.push(c);
        c = c * alpha / ((n + 1) as f64).sqrt();
    }
    out
}

/// Truncated single-mode coherent vector.
///
/// # Errors
/// [`Error::InvalidArgument`] for `cutoff < 2`. A cutoff below
/// [`cutoff_for`] is allowed; check [`FockVector::leakage`].
pub fn coherent_fock(alpha: Complex64, cutoff: usize) -> Result<FockVector> {
    FockVector::product(&[alpha], cutoff)
}

/// Whether `cutoff` meets the rule for amplitude `alpha`.
pub fn cutoff_is_sufficient(alpha: f64, cutoff: usize) -> bool {
    cutoff >= cutoff_for(alpha)
}

/// Matrices `U_T[m][n] = <m, T-m| U |n, T-n>` of a two-mode beam splitter,
/// built by applying the transformed creation operators one at a time.
fn beam_splitter_blocks(cutoff: usize, convention: BeamSplitterConvention) -> Vec<Matrix> {
    // label map b' = L b; creation operators transform with L^T
    let (li, lj) = convention.apply(Complex64::new(1.0, 0.0), zero());
    let (mi, mj) = convention.apply(zero(), Complex64::new(1.0, 0.0));
    // A_i^dag = li a_i^dag + lj a_j^dag, A_j^dag = mi a_i^dag + mj a_j^dag
    let max_t = 2 * (cutoff - 1);
    let mut blocks: Vec<Matrix> = Vec::with_capacity(max_t + 1);
    blocks.push(Matrix::identity(1));
    // columns of block T are images of |n, T-n>, stored over m = 0..=T
    let raise = |v: &[Complex64], ci: Complex64, cj: Complex64| -> Vec<Complex64> {
        let t = v.len() - 1;
        let mut out = vec![zero(); t + 2];
        for (m, &x) in v.iter().enumerate() {
            if x == zero() {
                continue;
            }
            out[m + 1] += ci * x * ((m + 1) as f64).sqrt();
            out[m] += cj * x * ((t - m + 1) as f64).sqrt();
        }
        out
    };
    for t in 1..=max_t {
        let prev = &blocks[t - 1];
        let mut block = Matrix::zeros(t + 1, t + 1);
        for n in 0..=t {
            let col = if n > 0 {
                let v = prev.column(n - 1);
                raise(&v, li, lj).into_iter().map(|x| x / (n as f64).sqrt()).collect::<Vec<_>>()
            } else {
                let v = prev.column(0);
                raise(&v, mi, mj).into_iter().map(|x| x / (t as f64).sqrt()).collect::<Vec<_>>()
            };
            for (m, x) in col.into_iter().enumerate() {
                block[(m, n)] = x;
            }
        }
        blocks.push(block);
    }
    blocks
}

/// 50-50 beam splitter on modes `i`, `j`. Photons pushed beyond the cutoff
/// are dropped and show up as leakage.
pub fn beam_splitter_fock(
    v: &FockVector,
    i: usize,
    j: usize,
    convention: BeamSplitterConvention,
) -> Result<FockVector> {
    v.check_mode(i)?;
    v.check_mode(j)?;
    if i == j {
        return Err(Error::InvalidMode { mode: j, mode_count: v.mode_count });
    }
    let n = v.cutoff;
    let blocks = beam_splitter_blocks(n, convention);
    let (si, sj) = (v.stride(i), v.stride(j));
    let mut out = vec![zero(); v.amplitudes.len()];
    for base in 0..v.amplitudes.len() {
        if v.occupation(base, i) != 0 || v.occupation(base, j) != 0 {
            continue;
        }
        for (t, block) in blocks.iter().enumerate() {
            let lo = t.saturating_sub(n - 1);
            let hi = t.min(n - 1);
            if lo > hi {
                continue;
            }
            for ni in lo..=hi {
                let x = v.amplitudes[base + ni * si + (t - ni) * sj];
                if x == zero() {
                    continue;
                }
                for mi in lo..=hi {
                    out[base + mi * si + (t - mi) * sj] += block[(mi, ni)] * x;
                }
            }
        }
    }
    Ok(FockVector { cutoff: n, mode_count: v.mode_count, amplitudes: out })
}

/// `(P_even, P_odd)` on `mode`; vacuum counts as even. Sums to `|v|^2`.
pub fn parity_probabilities_fock(v: &FockVector, mode: usize) -> Result<(f64, f64)> {
    v.check_mode(mode)?;
    let (mut even, mut odd) = (0.0, 0.0);
    for (idx, a) in v.amplitudes.iter().enumerate() {
        if v.occupation(idx, mode).is_multiple_of(2) {
            even += a.norm_sqr();
        } else {
            odd += a.norm_sqr();
        }
    }
    Ok((even, odd))
}

/// Probability that every listed mode is empty.
pub fn vacuum_probability_fock(v: &FockVector, modes: &[usize]) -> Result<f64> {
    for &m in modes {
        v.check_mode(m)?;
    }
    Ok(v.amplitudes
        .iter()
        .enumerate()
        .filter(|(idx, _)| modes.iter().all(|&m| v.occupation(*idx, m) == 0))
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

/// Probability that every listed mode registers at least one photon.
pub fn all_click_probability_fock(v: &FockVector, modes: &[usize]) -> Result<f64> {
    for &m in modes {
        v.check_mode(m)?;
    }
    Ok(v.amplitudes
        .iter()
        .enumerate()
        .filter(|(idx, _)| modes.iter().all(|&m| v.occupation(*idx, m) > 0))
        .map(|(_, a)| a.norm_sqr())
        .sum())
}

/// Reduced density of the modes in `keep`, row-major over their occupations.
pub fn reduced_density_fock(v: &FockVector, keep: &[usize]) -> Result<Matrix> {
    if keep.is_empty() || keep.len() >= v.mode_count {
        return Err(Error::TrivialPartition);
    }
    for (k, &m) in keep.iter().enumerate() {
        v.check_mode(m)?;
        if keep[..k].contains(&m) {
            return Err(Error::InvalidMode { mode: m, mode_count: v.mode_count });
        }
    }
    let n = v.cutoff;
    let rest: Vec<usize> = (0..v.mode_count).filter(|m| !keep.contains(m)).collect();
    let dk = n.pow(keep.len() as u32);
    let dr = n.pow(rest.len() as u32);
    let mut x = Matrix::zeros(dk, dr);
    for (idx, &a) in v.amplitudes.iter().enumerate() {
        let row = keep.iter().fold(0, |acc, &m| acc * n + v.occupation(idx, m));
        let col = rest.iter().fold(0, |acc, &m| acc * n + v.occupation(idx, m));
        x[(row, col)] = a;
    }
    Ok(x.matmul(&x.adjoint()))
}

/// Base-2 entropy of the reduced state of `partition`. The smaller side is
/// diagonalized; for a pure state both sides have the same spectrum.
pub fn entropy_fock(v: &FockVector, partition: &[usize]) -> Result<f64> {
    if partition.is_empty() || partition.len() >= v.mode_count {
        return Err(Error::TrivialPartition);
    }
    let complement: Vec<usize> = (0..v.mode_count).filter(|m| !partition.contains(m)).collect();
    let side = if complement.len() < partition.len() { &complement[..] } else { partition };
    let mut rho = reduced_density_fock(v, side)?;
    let tr = rho.trace().re;
    if tr <= 0.0 {
        return Err(Error::ZeroState);
    }
    rho = rho.scale(Complex64::new(1.0 / tr, 0.0));
    Ok(entropy_bits(&eigh(&rho).values, 1e-14))
}

/// Dense density matrix over `N^modes` number states.
#[derive(Clone, Debug)]
pub struct FockDensity {
    cutoff: usize,
    mode_count: usize,
    matrix: Matrix,
}

impl FockDensity {
    pub fn pure(v: &FockVector) -> Self {
        let d = v.amplitudes.len();
        let matrix = Matrix::from_fn(d, d, |r, c| v.amplitudes[r] * v.amplitudes[c].conj());
        Self { cutoff: v.cutoff, mode_count: v.mode_count, matrix }
    }

    /// Number-basis image of a coherent-state mixture.
    pub fn from_mixture(rho: &MixedState, cutoff: usize) -> Result<Self> {
        let d = check_shape(cutoff, rho.mode_count())?;
        let mut matrix = Matrix::zeros(d, d);
        for (w, s) in rho.components() {
            let v = FockVector::from_state(s, cutoff)?;
            for r in 0..d {
                let x = v.amplitudes[r] * *w;
                if x == zero() {
                    continue;
                }
                for c in 0..d {
                    matrix[(r, c)] += x * v.amplitudes[c].conj();
                }
            }
        }
        Ok(Self { cutoff, mode_count: rho.mode_count(), matrix })
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    #[inline]
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    #[inline]
    pub fn mode_count(&self) -> usize {
        self.mode_count
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `<v| rho |v>`.
    pub fn expectation(&self, v: &FockVector) -> Result<f64> {
        if v.cutoff != self.cutoff || v.mode_count != self.mode_count {
            return Err(Error::ModeCountMismatch { expected: self.mode_count, found: v.mode_count });
        }
        let d = v.amplitudes.len();
        let mut acc = zero();
        for r in 0..d {
            let vr = v.amplitudes[r].conj();
            if vr == zero() {
                continue;
            }
            for c in 0..d {
                acc += vr * self.matrix[(r, c)] * v.amplitudes[c];
            }
        }
        Ok(acc.re)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        eigh(&self.matrix).values
    }
}

/// One RK4 step `I + hL + (hL)^2/2 + (hL)^3/6 + (hL)^4/24` of the
/// single-mode damping generator restricted to the diagonal band
/// `rho_{k, k+d}`; `L` maps level `k+1` into level `k`.
fn rk4_band(cutoff: usize, d: usize, h: f64) -> Matrix {
    let len = cutoff - d;
    let gen = Matrix::from_fn(len, len, |r, c| {
        let (n, m) = (r, r + d);
        if c == r {
            Complex64::new(-0.5 * (n + m) as f64 * h, 0.0)
        } else if c == r + 1 {
            Complex64::new((((n + 1) * (m + 1)) as f64).sqrt() * h, 0.0)
        } else {
            zero()
        }
    });
    let mut step = Matrix::identity(len);
    let mut power = Matrix::identity(len);
    for k in 1..=4 {
        power = power.matmul(&gen).scale(Complex64::new(1.0 / k as f64, 0.0));
        step = add(&step, &power);
    }
    step
}

fn add(a: &Matrix, b: &Matrix) -> Matrix {
    Matrix::from_fn(a.rows(), a.cols(), |r, c| a[(r, c)] + b[(r, c)])
}

fn matrix_power(m: &Matrix, mut e: usize) -> Matrix {
    let mut result = Matrix::identity(m.rows());
    let mut base = m.clone();
    while e > 0 {
        if e & 1 == 1 {
            result = result.matmul(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.matmul(&base);
        }
    }
    result
}

/// Integrates `d rho/d tau = gamma sum_i (a_i rho a_i^dag - {a_i^dag a_i, rho}/2)`
/// with `steps` fixed RK4 steps in units where `gamma = 1`.
///
/// The generator is a sum of commuting single-mode terms, so the RK4
/// propagator of each mode is formed once per photon-number band, raised to
/// the `steps` power by squaring, and applied mode by mode.
pub fn lindblad_evolve(rho: &FockDensity, gamma_tau: f64, steps: usize) -> Result<FockDensity> {
    if !(gamma_tau >= 0.0) || !gamma_tau.is_finite() {
        return Err(Error::InvalidArgument("decay time must be nonnegative"));
    }
    if gamma_tau == 0.0 || steps == 0 {
        return Ok(rho.clone());
    }
    let n = rho.cutoff;
    let h = gamma_tau / steps as f64;
    let bands: Vec<Matrix> = (0..n).map(|d| matrix_power(&rk4_band(n, d, h), steps)).collect();
    let mut matrix = rho.matrix.clone();
    let dim = matrix.rows();
    for mode in 0..rho.mode_count {
        let stride = n.pow((rho.mode_count - 1 - mode) as u32);
        let occ = |idx: usize| (idx / stride) % n;
        let mut next = Matrix::zeros(dim, dim);
        for r0 in (0..dim).filter(|&r| occ(r) == 0) {
            for c0 in (0..dim).filter(|&c| occ(c) == 0) {
                for a in 0..n {
                    for b in 0..n {
                        let (band, k0, upper) =
                            if b >= a { (&bands[b - a], a, true) } else { (&bands[a - b], b, false) };
                        let mut acc = zero();
                        for k in k0..(n - (if upper { b - a } else { a - b })) {
                            let coef = band[(k0, k)];
                            if coef == zero() {
                                continue;
                            }
                            let (ra, cb) = if upper { (k, k + (b - a)) } else { (k + (a - b), k) };
                            acc += coef * matrix[(r0 + ra * stride, c0 + cb * stride)];
                        }
                        next[(r0 + a * stride, c0 + b * stride)] = acc;
                    }
                }
            }
        }
        matrix = next;
    }
    Ok(FockDensity { cutoff: n, mode_count: rho.mode_count, matrix })
}

/// Upper bound `sqrt(D) ||a - b||_F / 2` on the trace distance.
pub fn trace_distance_bound(a: &FockDensity, b: &FockDensity) -> Result<f64> {
    if a.cutoff != b.cutoff || a.mode_count != b.mode_count {
        return Err(Error::ModeCountMismatch { expected: a.mode_count, found: b.mode_count });
    }
    let d = a.matrix.rows() as f64;
    Ok(0.5 * d.sqrt() * a.matrix.sub(&b.matrix).frobenius_norm())
}

/// Exact trace distance `||a - b||_1 / 2` via diagonalization.
pub fn trace_distance(a: &FockDensity, b: &FockDensity) -> Result<f64> {
    if a.cutoff != b.cutoff || a.mode_count != b.mode_count {
        return Err(Error::ModeCountMismatch { expected: a.mode_count, found: b.mode_count });
    }
    let e = eigh(&a.matrix.sub(&b.matrix));
    Ok(0.5 * e.values.iter().map(|x| x.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{beam_splitter, beam_splitter_with};
    use crate::states::{coherent_overlap, even_cat_u, odd_cat_v, quasi_bell, CoherentLabel, QuasiBell};

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn cutoff_rule() {
        assert_eq!(cutoff_for(0.0), 10);
        assert_eq!(cutoff_for(2.0), 26);
        assert_eq!(lindblad_steps(0.5), 5000);
        assert_eq!(lindblad_steps(0.01), 1000);
    }

    #[test]
    fn coherent_vectors() {
        let vac = coherent_fock(r(0.0), 12).unwrap();
        assert_eq!(vac.amplitudes()[0], r(1.0));
        assert!(vac.amplitudes()[1..].iter().all(|a| *a == r(0.0)));
        let a = coherent_fock(r(1.0), 40).unwrap();
        let b = coherent_fock(r(-1.0), 40).unwrap();
        assert!((a.inner(&b).unwrap() - r((-2.0f64).exp())).norm() < 1e-15);
        assert!(coherent_fock(r(2.0), 40).unwrap().norm_sqr() >= 1.0 - 1e-12);
        let z = Complex64::new(0.4, -1.3);
        let w = Complex64::new(-0.7, 0.2);
        let n = cutoff_for(1.4);
        let ov = coherent_fock(z, n).unwrap().inner(&coherent_fock(w, n).unwrap()).unwrap();
        assert!((ov - coherent_overlap(z, w)).norm() < 1e-9);
        assert!(coherent_fock(r(1.0), 1).is_err());
    }

    #[test]
    fn beam_splitter_matches_label_map() {
        let alpha = Complex64::new(1.3, 0.4);
        let n = cutoff_for(alpha.norm());
        let input = FockVector::product(&[alpha, r(0.0)], n).unwrap();
        let out = beam_splitter_fock(&input, 0, 1, BeamSplitterConvention::Symmetric).unwrap();
        let s = SuperposedState::coherent(CoherentLabel::new(vec![alpha, r(0.0)]).unwrap());
        let analytic = FockVector::from_state(&beam_splitter(&s, 0, 1).unwrap(), n).unwrap();
        assert!(out.inner(&analytic).unwrap().norm_sqr() >= 1.0 - 1e-9);

        let vac = FockVector::vacuum(8, 2).unwrap();
        assert_eq!(beam_splitter_fock(&vac, 0, 1, BeamSplitterConvention::Symmetric).unwrap(), vac);
    }

    #[test]
    fn beam_splitter_conventions_match_labels() {
        let n = cutoff_for(2.0);
        let s = quasi_bell(1.0, QuasiBell::PsiMinus).unwrap();
        let v = FockVector::from_state(&s, n).unwrap();
        for conv in [BeamSplitterConvention::Symmetric, BeamSplitterConvention::Swapped] {
            let once = beam_splitter_fock(&v, 0, 1, conv).unwrap();
            assert!((once.norm_sqr() - v.norm_sqr()).abs() < 1e-9);
            let analytic = FockVector::from_state(&beam_splitter_with(&s, 0, 1, conv).unwrap(), n).unwrap();
            assert!((once.inner(&analytic).unwrap() - r(1.0)).norm() < 1e-8, "{conv:?}");
        }
        let once = beam_splitter_fock(&v, 0, 1, BeamSplitterConvention::Symmetric).unwrap();
        let twice = beam_splitter_fock(&once, 0, 1, BeamSplitterConvention::Symmetric).unwrap();
        let diff: f64 = twice.amplitudes().iter().zip(v.amplitudes()).map(|(a, b)| (a - b).norm_sqr()).sum();
        assert!(diff.sqrt() < 1e-9);
    }

    #[test]
    fn parities() {
        let vac = FockVector::vacuum(10, 1).unwrap();
        assert_eq!(parity_probabilities_fock(&vac, 0).unwrap(), (1.0, 0.0));
        let alpha = 1.1;
        let n = cutoff_for(core::f64::consts::SQRT_2 * alpha);
        let (e, o) =
            parity_probabilities_fock(&FockVector::from_state(&even_cat_u(alpha).unwrap(), n).unwrap(), 0).unwrap();
        assert!((e - 1.0).abs() < 1e-9 && o < 1e-15);
        let (e, o) =
            parity_probabilities_fock(&FockVector::from_state(&odd_cat_v(alpha).unwrap(), n).unwrap(), 0).unwrap();
        assert!(e < 1e-15 && (o - 1.0).abs() < 1e-9);
    }

    #[test]
    fn entropies() {
        let n = cutoff_for(2.0);
        let prod = FockVector::product(&[r(1.0), r(-0.5)], n).unwrap();
        assert!(entropy_fock(&prod, &[0]).unwrap().abs() < 1e-9);
        for alpha in [0.5, 1.0, 2.0] {
            let v =
                FockVector::from_state(&quasi_bell(alpha, QuasiBell::PhiMinus).unwrap(), cutoff_for(alpha)).unwrap();
            assert!((entropy_fock(&v, &[0]).unwrap() - 1.0).abs() < 1e-6);
        }
        let v = FockVector::from_state(
            &crate::states::entangled_coherent(r(0.8), 0.0, crate::states::EntangledKind::Phi).unwrap(),
            cutoff_for(0.8),
        )
        .unwrap();
        let e = entropy_fock(&v, &[1]).unwrap();
        assert!((e - crate::entanglement::entropy_closed_form(0.8, 0.0)).abs() < 1e-6);
    }

    #[test]
    fn lindblad_damps_coherent_amplitude() {
        let alpha = 1.5;
        let gt = 0.7;
        let n = cutoff_for(alpha);
        let rho = FockDensity::pure(&coherent_fock(r(alpha), n).unwrap());
        assert_eq!(lindblad_evolve(&rho, 0.0, 1000).unwrap().matrix(), rho.matrix());
        let out = lindblad_evolve(&rho, gt, lindblad_steps(gt)).unwrap();
        let t = (-gt / 2.0).exp();
        let target = coherent_fock(r(t * alpha), n).unwrap();
        assert!(out.expectation(&target).unwrap() >= 1.0 - 1e-6);
        assert!((out.trace() - rho.trace()).abs() < 1e-7);
        assert!(out.eigenvalues()[0] >= -1e-7);
    }

    #[test]
    fn product_propagator_matches_direct_rk4() {
        // two modes, tiny cutoff: integrate the full generator directly
        let n = 5;
        let s = quasi_bell(0.6, QuasiBell::PhiMinus).unwrap();
        let v = FockVector::from_state(&s, n).unwrap();
        let rho = FockDensity::pure(&v);
        let steps = 400;
        let gt = 0.8;
        let fast = lindblad_evolve(&rho, gt, steps).unwrap();

        let d = rho.matrix().rows();
        let occ = |idx: usize, mode: usize| (idx / n.pow(1 - mode as u32)) % n;
        let gen = |m: &Matrix| {
            Matrix::from_fn(d, d, |r, c| {
                let mut acc = zero();
                for mode in 0..2 {
                    let st = n.pow(1 - mode as u32);
                    let (nr, nc) = (occ(r, mode), occ(c, mode));
                    if nr + 1 < n && nc + 1 < n {
                        acc += m[(r + st, c + st)] * (((nr + 1) * (nc + 1)) as f64).sqrt();
                    }
                    acc -= m[(r, c)] * (0.5 * (nr + nc) as f64);
                }
                acc
            })
        };
        let h = gt / steps as f64;
        let mut m = rho.matrix().clone();
        let hs = |a: &Matrix, f: f64| a.scale(Complex64::new(f, 0.0));
        for _ in 0..steps {
            let k1 = gen(&m);
            let k2 = gen(&add(&m, &hs(&k1, 0.5 * h)));
            let k3 = gen(&add(&m, &hs(&k2, 0.5 * h)));
            let k4 = gen(&add(&m, &hs(&k3, h)));
            let incr = add(&add(&k1, &hs(&k2, 2.0)), &add(&hs(&k3, 2.0), &k4));
            m = add(&m, &hs(&incr, h / 6.0));
        }
        assert!(fast.matrix().sub(&m).frobenius_norm() < 1e-10);
    }
}
