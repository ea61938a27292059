//! Small dense complex matrices and a Hermitian eigensolver.
//!
//! Everything here is sized for Gram matrices of a handful of coherent labels
//! and for the truncated number-basis densities of the verification oracle, so
//! a cyclic Jacobi sweep is plenty.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods shadow these when std is linked
use num_traits::Float;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from a row-major slice.
    ///
    /// # Panics
    /// If `data.len() != rows * cols`.
    pub fn from_row_major(rows: usize, cols: usize, data: &[Complex64]) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Self { rows, cols, data: data.to_vec() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * factor).collect() }
    }

    /// # Panics
    /// On inner-dimension mismatch.
    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest deviation from Hermiticity, `max |a_ij - conj(a_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in 0..self.cols.min(self.rows) {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Unitary matrix whose columns are the matching eigenvectors.
    pub vectors: Matrix,
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Only the Hermitian part of `a` is used. Off-diagonal mass is driven below
/// `1e-15` of the Frobenius norm.
///
/// # Panics
/// If `a` is not square.
pub fn eigh(a: &Matrix) -> HermitianEigen {
    assert_eq!(a.rows, a.cols, "eigh needs a square matrix");
    let n = a.rows;
    let mut m = Matrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let mut v = Matrix::identity(n);
    let scale = m.frobenius_norm();
    if n < 2 || scale == 0.0 {
        return finish(m, v);
    }
    let threshold = 1e-15 * scale;

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let mag = apq.norm();
                if mag < 1e-300 {
                    continue;
                }
                let phase = apq / mag; // e^{i phi}
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G has columns p -> (c, -s e^{-i phi}), q -> (s, c e^{-i phi}).
                let g_pp = Complex64::new(c, 0.0);
                let g_qp = -phase.conj() * s;
                let g_pq = Complex64::new(s, 0.0);
                let g_qq = phase.conj() * c;
                rotate_columns(&mut m, p, q, g_pp, g_qp, g_pq, g_qq);
                rotate_rows(&mut m, p, q, g_pp, g_qp, g_pq, g_qq);
                rotate_columns(&mut v, p, q, g_pp, g_qp, g_pq, g_qq);
                m[(p, q)] = ZERO;
                m[(q, p)] = ZERO;
                m[(p, p)] = Complex64::new(m[(p, p)].re, 0.0);
                m[(q, q)] = Complex64::new(m[(q, q)].re, 0.0);
            }
        }
    }
    finish(m, v)
}

fn rotate_columns(
    m: &mut Matrix,
    p: usize,
    q: usize,
    g_pp: Complex64,
    g_qp: Complex64,
    g_pq: Complex64,
    g_qq: Complex64,
) {
    for r in 0..m.rows {
        let xp = m[(r, p)];
        let xq = m[(r, q)];
        m[(r, p)] = xp * g_pp + xq * g_qp;
        m[(r, q)] = xp * g_pq + xq * g_qq;
    }
}

fn rotate_rows(m: &mut Matrix, p: usize, q: usize, g_pp: Complex64, g_qp: Complex64, g_pq: Complex64, g_qq: Complex64) {
    for r in 0..m.cols {
        let xp = m[(p, r)];
        let xq = m[(q, r)];
        m[(p, r)] = g_pp.conj() * xp + g_qp.conj() * xq;
        m[(q, r)] = g_pq.conj() * xp + g_qq.conj() * xq;
    }
}

fn finish(m: Matrix, v: Matrix) -> HermitianEigen {
    let n = m.rows;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    let values = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    HermitianEigen { values, vectors }
}

/// Principal square root of a positive-semidefinite Hermitian matrix.
///
/// Eigenvalues below zero (rounding noise) are clamped to zero.
pub fn psd_sqrt(a: &Matrix) -> Matrix {
    let eig = eigh(a);
    let roots: Vec<f64> = eig.values.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let d = Matrix::diagonal(&roots);
    eig.vectors.matmul(&d).matmul(&eig.vectors.adjoint())
}

/// Base-2 von Neumann entropy from a spectrum; eigenvalues at or below
/// `cutoff` contribute nothing (`0 log 0 = 0`).
pub fn entropy_bits(eigenvalues: &[f64], cutoff: f64) -> f64 {
    eigenvalues.iter().filter(|&&l| l > cutoff).map(|&l| -l * l.log2()).sum()
}
