//! Random bilateral rotations.
//!
//! The group is the 12-element tetrahedral subgroup of the `pi/2` rotation
//! group, generated by `B_x B_y` and `B_y B_z`. Averaging over it turns any
//! two-qubit state into Werner form.
//!
//! Alice applies `U` and Bob applies `X U X`, where `X` swaps `|a>` and
//! `|-a>`. With identical rotations on both sides the invariant state would
//! be the `psi-` analogue; conjugating Bob's rotation by `X` makes `phi-`
//! the invariant one instead.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::optics::{apply_logical, by_matrix, gram_power, mat2_mul, qubit_amplitude, uz, Mat2, KERR_BX};
use crate::states::{MixedState, SuperposedState};

const X: Mat2 = [
    [Complex64 { re: 0.0, im: 0.0 }, Complex64 { re: 1.0, im: 0.0 }],
    [Complex64 { re: 1.0, im: 0.0 }, Complex64 { re: 0.0, im: 0.0 }],
];

/// `|tr(A^dag B)| = 2`: equal up to a global phase.
fn same_up_to_phase(a: &Mat2, b: &Mat2) -> bool {
    let mut t = Complex64::new(0.0, 0.0);
    for r in 0..2 {
        for c in 0..2 {
            t += a[r][c].conj() * b[r][c];
        }
    }
    (t.norm() - 2.0).abs() < 1e-9
}

/// The twelve group elements, identity first.
pub fn twirl_group() -> Vec<Mat2> {
    let bz = uz(core::f64::consts::FRAC_PI_2);
    let by = by_matrix();
    let gens = [mat2_mul(&KERR_BX, &by), mat2_mul(&by, &bz)];
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let mut group: Vec<Mat2> = alloc::vec![[[one, zero], [zero, one]]];
    let mut i = 0;
    while i < group.len() {
        for g in &gens {
            let p = mat2_mul(g, &group[i]);
            if !group.iter().any(|h| same_up_to_phase(h, &p)) {
                group.push(p);
            }
        }
        i += 1;
    }
    group
}

/// `U` on mode 0 and `X U X` on mode 1.
pub fn bilateral(s: &SuperposedState, u: &Mat2) -> Result<SuperposedState> {
    if s.mode_count() != 2 {
        return Err(Error::ModeCountMismatch { expected: 2, found: s.mode_count() });
    }
    let bob = mat2_mul(&X, &mat2_mul(u, &X));
    apply_logical(&apply_logical(s, 0, u)?, 1, &bob)
}

fn average(rho: &MixedState, counts: &[(usize, Mat2)]) -> Result<MixedState> {
    let total: usize = counts.iter().map(|(n, _)| n).sum();
    let mut comps = Vec::with_capacity(counts.len() * rho.components().len());
    for (n, u) in counts {
        if *n == 0 {
            continue;
        }
        for (w, s) in rho.components() {
            comps.push((w * *n as f64 / total as f64, bilateral(s, u)?));
        }
    }
    MixedState::from_unnormalized(2, comps)
}

/// Exact average over the whole group.
pub fn werner_twirl_exact(rho: &MixedState) -> Result<MixedState> {
    let counts: Vec<(usize, Mat2)> = twirl_group().into_iter().map(|u| (1, u)).collect();
    average(rho, &counts)
}

/// Average over `samples` uniformly drawn group elements.
pub fn werner_twirl<R: Rng + ?Sized>(rho: &MixedState, samples: usize, rng: &mut R) -> Result<MixedState> {
    if samples == 0 {
        return Err(Error::InvalidArgument("twirl needs at least one sample"));
    }
    let group = twirl_group();
    let mut counts: Vec<(usize, Mat2)> = group.iter().map(|u| (0, *u)).collect();
    for _ in 0..samples {
        counts[rng.random_range(0..group.len())].0 += 1;
    }
    average(rho, &counts)
}

/// Two-qubit density matrix in the Bell basis built on the Löwdin vectors
/// `e0 ~ |a>`, `e1 ~ |-a>`, ordered `(phi+, phi-, psi+, psi-)`. The
/// minus-type quasi-Bell states are exactly the second and fourth vectors.
pub fn bell_basis_density(rho: &MixedState) -> Result<Matrix> {
    if rho.mode_count() != 2 {
        return Err(Error::ModeCountMismatch { expected: 2, found: rho.mode_count() });
    }
    let first = &rho.components()[0].1;
    let alphas = [qubit_amplitude(first, 0)?, qubit_amplitude(first, 1)?];
    let roots = [gram_power(alphas[0], 1.0), gram_power(alphas[1], 1.0)];
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let c = |x: f64| Complex64::new(x * h, 0.0);
    let z = Complex64::new(0.0, 0.0);
    // rows: Bell vectors over (00, 01, 10, 11)
    let bell = [[c(1.0), z, z, c(1.0)], [c(1.0), z, z, c(-1.0)], [z, c(1.0), c(1.0), z], [z, c(1.0), c(-1.0), z]];
    let mut out = Matrix::zeros(4, 4);
    for (w, s) in rho.components() {
        let mut raw = [Complex64::new(0.0, 0.0); 4];
        for t in s.terms() {
            let mut idx = 0;
            for (m, a) in alphas.iter().enumerate() {
                let b = t.label.amplitudes()[m];
                let bit = if (b - a).norm() <= 1e-10 * (1.0 + a.norm()) {
                    0
                } else if (b + a).norm() <= 1e-10 * (1.0 + a.norm()) {
                    1
                } else {
                    return Err(Error::NotQubitSpace { mode: m });
                };
                idx = 2 * idx + bit;
            }
            raw[idx] += t.coefficient;
        }
        let mut low = [Complex64::new(0.0, 0.0); 4];
        for (i, l) in low.iter_mut().enumerate() {
            for (j, r) in raw.iter().enumerate() {
                *l += roots[0][i / 2][j / 2] * roots[1][i % 2][j % 2] * r;
            }
        }
        let v: Vec<Complex64> = bell.iter().map(|row| row.iter().zip(&low).map(|(b, l)| b * l).sum()).collect();
        for r in 0..4 {
            for col in 0..4 {
                out[(r, col)] += v[r] * v[col].conj() * *w;
            }
        }
    }
    Ok(out)
}

/// Largest off-diagonal magnitude of [`bell_basis_density`].
pub fn bell_coherence(rho: &MixedState) -> Result<f64> {
    let m = bell_basis_density(rho)?;
    let mut worst: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            if r != c {
                worst = worst.max(m[(r, c)].norm());
            }
        }
    }
    Ok(worst)
}
