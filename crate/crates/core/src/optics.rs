//! Linear and nonlinear optical elements and ideal photodetectors.
//!
//! Beam splitters and displacements act on coherent labels directly. Gates
//! on the coherent-state qubit `{|a>, |-a>}` are 2x2 matrices; the ideal
//! ones (`B_z`, `sigma_z`, the twirl group) are defined in the Löwdin basis
//! of the pair, which reduces to `{|a>, |-a>}` up to `O(e^{-2|a|^2})`.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;
use rand::Rng;

use crate::conditioning::{self, Projector};
use crate::error::{Error, Result};
use crate::states::{CoherentLabel, MixedState, SuperposedState, Term};

/// Sign convention of the 50-50 beam splitter.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum BeamSplitterConvention {
    /// `(b_i, b_j) -> ((b_i + b_j)/sqrt2, (b_i - b_j)/sqrt2)`
    #[default]
    Symmetric,
    /// `(b_i, b_j) -> ((b_i - b_j)/sqrt2, (b_i + b_j)/sqrt2)`; the output
    /// ports of [`Symmetric`](Self::Symmetric) exchanged.
    Swapped,
}

impl BeamSplitterConvention {
    #[inline]
    pub fn apply(self, bi: Complex64, bj: Complex64) -> (Complex64, Complex64) {
        let plus = (bi + bj) * FRAC_1_SQRT_2;
        let minus = (bi - bj) * FRAC_1_SQRT_2;
        match self {
            BeamSplitterConvention::Symmetric => (plus, minus),
            BeamSplitterConvention::Swapped => (minus, plus),
        }
    }
}

fn check_pair(s: &SuperposedState, i: usize, j: usize) -> Result<()> {
    s.check_mode(i)?;
    s.check_mode(j)?;
    if i == j {
        return Err(Error::InvalidMode { mode: j, mode_count: s.mode_count() });
    }
    Ok(())
}

/// 50-50 beam splitter on modes `i`, `j` with the default convention.
pub fn beam_splitter(s: &SuperposedState, i: usize, j: usize) -> Result<SuperposedState> {
    beam_splitter_with(s, i, j, BeamSplitterConvention::default())
}

pub fn beam_splitter_with(
    s: &SuperposedState,
    i: usize,
    j: usize,
    convention: BeamSplitterConvention,
) -> Result<SuperposedState> {
    check_pair(s, i, j)?;
    Ok(s.map_terms(s.mode_count(), |t| {
        let mut label = t.label.clone();
        let a = label.amplitudes_mut();
        let (x, y) = convention.apply(a[i], a[j]);
        a[i] = x;
        a[j] = y;
        Term { coefficient: t.coefficient, label }
    }))
}

/// `D(delta)` on one mode.
pub fn displace(s: &SuperposedState, mode: usize, delta: Complex64) -> Result<SuperposedState> {
    s.check_mode(mode)?;
    Ok(s.map_terms(s.mode_count(), |t| {
        let mut label = t.label.clone();
        let beta = label.amplitudes()[mode];
        let phase = (0.5 * (delta * beta.conj() - delta.conj() * beta)).exp();
        label.amplitudes_mut()[mode] = beta + delta;
        Term { coefficient: t.coefficient * phase, label }
    }))
}

/// Appends a mode in the coherent state `|amplitude>`.
pub fn append_coherent(s: &SuperposedState, amplitude: Complex64) -> SuperposedState {
    s.tensor(&SuperposedState::coherent(CoherentLabel::from_vec_unchecked(vec![amplitude])))
}

/// Finds `a` such that every label on `mode` is `+a` or `-a`.
pub fn qubit_amplitude(s: &SuperposedState, mode: usize) -> Result<Complex64> {
    s.check_mode(mode)?;
    let tol = 1e-10;
    let mut alpha: Option<Complex64> = None;
    for t in s.terms() {
        let b = t.label.amplitudes()[mode];
        match alpha {
            None => alpha = Some(b),
            Some(a) => {
                if (b - a).norm() > tol * (1.0 + a.norm()) && (b + a).norm() > tol * (1.0 + a.norm()) {
                    return Err(Error::NotQubitSpace { mode });
                }
            }
        }
    }
    let a = alpha.ok_or(Error::NotQubitSpace { mode })?;
    if a.norm() < 1e-12 {
        return Err(Error::NotQubitSpace { mode });
    }
    // positive real part (or positive imaginary part when purely imaginary)
    if a.re < 0.0 || (a.re == 0.0 && a.im < 0.0) {
        Ok(-a)
    } else {
        Ok(a)
    }
}

/// A 2x2 complex matrix; `m[r][c]`.
pub type Mat2 = [[Complex64; 2]; 2];

pub fn mat2_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = a[r][0] * b[0][c] + a[r][1] * b[1][c];
        }
    }
    out
}

pub fn mat2_scale(a: &Mat2, f: Complex64) -> Mat2 {
    [[a[0][0] * f, a[0][1] * f], [a[1][0] * f, a[1][1] * f]]
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `S^{p}` for the Gram matrix of `{|a>, |-a>}` with `p = +-1/2`.
pub(crate) fn gram_power(alpha: Complex64, half_sign: f64) -> Mat2 {
    let x = (-2.0 * alpha.norm_sqr()).exp();
    let a = (1.0 + x).powf(0.5 * half_sign);
    let b = (1.0 - x).powf(0.5 * half_sign);
    [[c(0.5 * (a + b), 0.0), c(0.5 * (a - b), 0.0)], [c(0.5 * (a - b), 0.0), c(0.5 * (a + b), 0.0)]]
}

/// Converts a logical-basis (Löwdin) operator to its action on the
/// coefficients of `{|a>, |-a>}`.
pub fn logical_to_raw(alpha: Complex64, u: &Mat2) -> Mat2 {
    mat2_mul(&gram_power(alpha, -1.0), &mat2_mul(u, &gram_power(alpha, 1.0)))
}

/// Applies a matrix acting on the `{|a>, |-a>}` coefficients of `mode`.
pub fn apply_raw_qubit_matrix(s: &SuperposedState, mode: usize, alpha: Complex64, m: &Mat2) -> Result<SuperposedState> {
    s.check_mode(mode)?;
    let tol = 1e-10 * (1.0 + alpha.norm());
    let mut bad = false;
    let out = s.flat_map_terms(s.mode_count(), |t| {
        let b = t.label.amplitudes()[mode];
        let col = if (b - alpha).norm() <= tol {
            0
        } else if (b + alpha).norm() <= tol {
            1
        } else {
            bad = true;
            return Vec::new();
        };
        let mut plus = t.label.clone();
        plus.amplitudes_mut()[mode] = alpha;
        let mut minus = t.label.clone();
        minus.amplitudes_mut()[mode] = -alpha;
        vec![
            Term { coefficient: t.coefficient * m[0][col], label: plus },
            Term { coefficient: t.coefficient * m[1][col], label: minus },
        ]
    });
    if bad {
        return Err(Error::NotQubitSpace { mode });
    }
    Ok(out)
}

/// Applies a unitary given in the Löwdin logical basis of `mode`.
pub fn apply_logical(s: &SuperposedState, mode: usize, u: &Mat2) -> Result<SuperposedState> {
    let alpha = qubit_amplitude(s, mode)?;
    apply_raw_qubit_matrix(s, mode, alpha, &logical_to_raw(alpha, u))
}

/// Kerr-medium `B_x`: `|a> -> (|a> + i|-a>)/sqrt2`, `|-a> -> (i|a> + |-a>)/sqrt2`.
pub const KERR_BX: Mat2 = [
    [Complex64 { re: FRAC_1_SQRT_2, im: 0.0 }, Complex64 { re: 0.0, im: FRAC_1_SQRT_2 }],
    [Complex64 { re: 0.0, im: FRAC_1_SQRT_2 }, Complex64 { re: FRAC_1_SQRT_2, im: 0.0 }],
];

/// `B_x` via the Kerr interaction. The matrix commutes with the Gram
/// matrix, so it is the same in the raw and the logical basis.
pub fn kerr_bx(s: &SuperposedState, mode: usize) -> Result<SuperposedState> {
    let alpha = qubit_amplitude(s, mode)?;
    apply_raw_qubit_matrix(s, mode, alpha, &KERR_BX)
}

/// Displacement parameters for a z-rotation of the coherent-state qubit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationParams {
    pub epsilon: f64,
    pub alpha: f64,
    pub theta: f64,
}

impl RotationParams {
    /// Rotation by `theta` on amplitude `alpha`; `epsilon = theta / (4 alpha)`.
    pub fn from_angle(alpha: f64, theta: f64) -> Result<Self> {
        if !(alpha > 0.0) || !theta.is_finite() {
            return Err(Error::InvalidArgument("rotation needs alpha > 0 and finite theta"));
        }
        Ok(Self { epsilon: theta / (4.0 * alpha), alpha, theta })
    }

    /// Rotation produced by `D(i epsilon)`; `theta = 4 alpha epsilon`.
    pub fn from_displacement(alpha: f64, epsilon: f64) -> Result<Self> {
        if !(alpha > 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument("rotation needs alpha > 0 and finite epsilon"));
        }
        Ok(Self { epsilon, alpha, theta: 4.0 * alpha * epsilon })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum RotationMode {
    /// Ideal `U_z(theta) = diag(e^{i theta/2}, e^{-i theta/2})` in the logical basis.
    #[default]
    Exact,
    /// `D(i epsilon)`, which leaves the qubit space.
    Physical,
}

pub fn uz(theta: f64) -> Mat2 {
    let zero = c(0.0, 0.0);
    [[Complex64::from_polar(1.0, 0.5 * theta), zero], [zero, Complex64::from_polar(1.0, -0.5 * theta)]]
}

pub fn rotate_z(
    s: &SuperposedState,
    mode: usize,
    params: RotationParams,
    how: RotationMode,
) -> Result<SuperposedState> {
    match how {
        RotationMode::Exact => apply_logical(s, mode, &uz(params.theta)),
        RotationMode::Physical => displace(s, mode, c(0.0, params.epsilon)),
    }
}

pub const SIGMA_Z: Mat2 = [
    [Complex64 { re: 1.0, im: 0.0 }, Complex64 { re: 0.0, im: 0.0 }],
    [Complex64 { re: 0.0, im: 0.0 }, Complex64 { re: -1.0, im: 0.0 }],
];

pub fn sigma_z(s: &SuperposedState, mode: usize) -> Result<SuperposedState> {
    apply_logical(s, mode, &SIGMA_Z)
}

/// `B_z`: rotation by `pi/2`.
pub fn bz(s: &SuperposedState, mode: usize) -> Result<SuperposedState> {
    apply_logical(s, mode, &uz(PI / 2.0))
}

/// `B_y = -sigma_z B_x B_z B_x` as a logical-basis matrix.
pub fn by_matrix() -> Mat2 {
    let m = mat2_mul(&SIGMA_Z, &mat2_mul(&KERR_BX, &mat2_mul(&uz(PI / 2.0), &KERR_BX)));
    mat2_scale(&m, c(-1.0, 0.0))
}

pub fn by(s: &SuperposedState, mode: usize) -> Result<SuperposedState> {
    apply_logical(s, mode, &by_matrix())
}

/// Coherent-state Hadamard on raw coefficients:
/// `|a> -> (|a> + |-a>)/sqrt2`, `|-a> -> (|a> - |-a>)/sqrt2`.
pub const RAW_HADAMARD: Mat2 = [
    [Complex64 { re: FRAC_1_SQRT_2, im: 0.0 }, Complex64 { re: FRAC_1_SQRT_2, im: 0.0 }],
    [Complex64 { re: FRAC_1_SQRT_2, im: 0.0 }, Complex64 { re: -FRAC_1_SQRT_2, im: 0.0 }],
];

/// Unnormalized Hadamard image; the map does not preserve norms because
/// `|a>` and `|-a>` overlap.
pub fn hadamard_unnormalized(s: &SuperposedState, mode: usize) -> Result<SuperposedState> {
    let alpha = qubit_amplitude(s, mode)?;
    apply_raw_qubit_matrix(s, mode, alpha, &RAW_HADAMARD)
}

/// Hadamard followed by renormalization.
pub fn hadamard(s: &SuperposedState, mode: usize) -> Result<SuperposedState> {
    hadamard_unnormalized(s, mode)?.normalized()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DetectorModel {
    OnOff,
    Parity,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Outcome {
    Vacuum,
    Click,
    Even,
    Odd,
}

impl Outcome {
    pub fn projector(self) -> Projector {
        match self {
            Outcome::Vacuum => Projector::Vacuum,
            Outcome::Click => Projector::Click,
            Outcome::Even => Projector::Even,
            Outcome::Odd => Projector::Odd,
        }
    }
}

impl DetectorModel {
    pub fn outcomes(self) -> [Outcome; 2] {
        match self {
            DetectorModel::OnOff => [Outcome::Vacuum, Outcome::Click],
            DetectorModel::Parity => [Outcome::Even, Outcome::Odd],
        }
    }
}

#[derive(Clone, Debug)]
pub struct DetectorOutcome {
    pub outcome: Outcome,
    pub probability: f64,
    /// State of the remaining modes; `None` for a zero-probability outcome
    /// or when the detected mode was the only one.
    pub conditioned: Option<MixedState>,
}

/// Exact outcome distribution and conditioned states.
pub fn detect(rho: &MixedState, mode: usize, model: DetectorModel) -> Result<Vec<DetectorOutcome>> {
    if mode >= rho.mode_count() {
        return Err(Error::InvalidMode { mode, mode_count: rho.mode_count() });
    }
    model
        .outcomes()
        .iter()
        .map(|&outcome| {
            let r = conditioning::condition(rho, &[(mode, outcome.projector())])?;
            Ok(DetectorOutcome { outcome, probability: r.probability, conditioned: r.conditioned })
        })
        .collect()
}

/// Draws one outcome from the exact distribution.
pub fn sample_detect<R: Rng + ?Sized>(
    rho: &MixedState,
    mode: usize,
    model: DetectorModel,
    rng: &mut R,
) -> Result<DetectorOutcome> {
    if mode >= rho.mode_count() {
        return Err(Error::InvalidMode { mode, mode_count: rho.mode_count() });
    }
    let [first, second] = model.outcomes();
    let p_first = conditioning::probability(rho, &[(mode, first.projector())])?;
    let u: f64 = rng.random();
    let outcome = if u < p_first { first } else { second };
    let r = conditioning::condition(rho, &[(mode, outcome.projector())])?;
    Ok(DetectorOutcome { outcome, probability: r.probability, conditioned: r.conditioned })
}
