//! Dense complex linear algebra: matrix types, a Hermitian eigensolver and
//! the Hilbert projective metric. Everything else in the crate sits on top
//! of this module.
//!
//! All values are immutable after construction and safe to share across
//! threads. Constructors re-hermitize and renormalize so the stated type
//! invariants stay true under floating-point drift.

mod eig;
mod metric;

pub use eig::{hermitian_eig, pd_inv_sqrt, pd_inverse, psd_sqrt, EigenDecomposition};
pub use metric::{band_of, hilbert_distance, traceless_basis, SpectralBand};

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

/// Relative tolerance below which small negative eigenvalues are clipped
/// to zero when a positive semidefinite matrix is expected.
pub const EPS_PSD: f64 = 1e-10;

/// Absolute floor on the smallest eigenvalue of a matrix that must be
/// positive definite. Iteration drift produces O(machine-eps) negatives;
/// anything below this floor aborts instead.
pub const EPS_PD: f64 = 1e-12;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Build from raw row-major entries, checking shape and finiteness.
    pub fn new(n_rows: usize, n_cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != n_rows * n_cols {
            return Err(Error::DimensionMismatch {
                expected: n_rows * n_cols,
                got: entries.len(),
            });
        }
        let m = Self { n_rows, n_cols, entries };
        if !m.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        Ok(m)
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, entries: vec![Complex64::new(0.0, 0.0); n_rows * n_cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zeros(n_rows, n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Real diagonal matrix.
    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self::from_fn(diag.len(), diag.len(), |i, j| {
            if i == j { Complex64::new(diag[i], 0.0) } else { Complex64::new(0.0, 0.0) }
        })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n_cols, self.n_rows, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n_rows.min(self.n_cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            entries: self.entries.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.n_cols, "matvec dimension mismatch");
        (0..self.n_rows)
            .map(|i| (0..self.n_cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// Frobenius distance to another matrix of the same shape.
    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.n_rows, other.n_rows);
        assert_eq!(self.n_cols, other.n_cols);
        self.entries
            .iter()
            .zip(other.entries.iter())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entry-wise modulus of the deviation from Hermitian symmetry.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0_f64;
        for i in 0..self.n_rows {
            for j in i..self.n_cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

impl std::ops::Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.n_cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.n_cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n_rows, rhs.n_rows);
        assert_eq!(self.n_cols, rhs.n_cols);
        ComplexMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            entries: self.entries.iter().zip(rhs.entries.iter()).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n_rows, rhs.n_rows);
        assert_eq!(self.n_cols, rhs.n_cols);
        ComplexMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            entries: self.entries.iter().zip(rhs.entries.iter()).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.n_cols, rhs.n_rows, "matmul dimension mismatch");
        let mut out = ComplexMatrix::zeros(self.n_rows, rhs.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let aik = self[(i, k)];
                if aik.re == 0.0 && aik.im == 0.0 {
                    continue;
                }
                for j in 0..rhs.n_cols {
                    out[(i, j)] += aik * rhs[(k, j)];
                }
            }
        }
        out
    }
}

/// Hermitian matrix. The constructor re-hermitizes via (X + X*)/2, so the
/// stored value satisfies X = X* exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    mat: ComplexMatrix,
}

impl HermitianMatrix {
    /// Re-hermitize a square matrix. Fails on non-square or non-finite input.
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::DimensionMismatch { expected: mat.n_rows(), got: mat.n_cols() });
        }
        if !mat.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        let n = mat.n_rows();
        let mut sym = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            sym[(i, i)] = Complex64::new(mat[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let avg = (mat[(i, j)] + mat[(j, i)].conj()).scale(0.5);
                sym[(i, j)] = avg;
                sym[(j, i)] = avg.conj();
            }
        }
        Ok(Self { mat: sym })
    }

    pub fn identity(n: usize) -> Self {
        Self { mat: ComplexMatrix::identity(n) }
    }

    /// diag(d) for real d.
    pub fn from_real_diag(diag: &[f64]) -> Self {
        Self { mat: ComplexMatrix::from_real_diag(diag) }
    }

    /// The maximally mixed matrix I/n.
    pub fn maximally_mixed(n: usize) -> Self {
        Self { mat: ComplexMatrix::identity(n).scale_re(1.0 / n as f64) }
    }

    pub fn n(&self) -> usize {
        self.mat.n_rows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.frobenius_norm()
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        self.mat.frobenius_distance(&other.mat)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self { mat: self.mat.scale_re(s) }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self { mat: &self.mat + &other.mat }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self { mat: &self.mat - &other.mat }
    }

    /// A * B * A for Hermitian A, B (the result is Hermitian again).
    pub fn conjugate_by(&self, outer: &ComplexMatrix) -> Self {
        let prod = &(outer * &self.mat) * &outer.adjoint();
        Self::new(prod).expect("conjugation of a finite Hermitian matrix is finite")
    }

    /// Real Frobenius inner product tr(A B).
    pub fn inner(&self, other: &Self) -> f64 {
        (&self.mat * &other.mat).trace().re
    }
}

/// Classification of a density matrix: positive semidefinite or strictly
/// positive definite, both with unit trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensityClass {
    PsdTrace1,
    PdTrace1,
}

/// Unit-trace positive (semi)definite Hermitian matrix. The constructor
/// renormalizes the trace, so `trace() == 1` up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    base: HermitianMatrix,
    class: DensityClass,
}

impl DensityMatrix {
    /// Positive semidefinite density: requires lambda_min >= -EPS_PSD * lambda_max.
    pub fn new_psd(h: HermitianMatrix) -> Result<Self> {
        Self::build(h, DensityClass::PsdTrace1)
    }

    /// Positive definite density: requires lambda_min > EPS_PD.
    pub fn new_pd(h: HermitianMatrix) -> Result<Self> {
        Self::build(h, DensityClass::PdTrace1)
    }

    fn build(h: HermitianMatrix, class: DensityClass) -> Result<Self> {
        let tr = h.trace();
        if tr <= 0.0 || !tr.is_finite() {
            return Err(Error::ZeroTrace { trace: tr });
        }
        // Skip the renormalization when the trace is already one to within
        // a few ulps, so already-normalized values survive bit-exactly.
        let scaled = if (tr - 1.0).abs() <= h.n() as f64 * f64::EPSILON {
            h
        } else {
            h.scale_re(1.0 / tr)
        };
        let eig = hermitian_eig(&scaled)?;
        let lambda_min = *eig.eigenvalues.last().expect("n >= 1");
        let lambda_max = eig.eigenvalues[0];
        match class {
            DensityClass::PsdTrace1 => {
                // lambda_max > 0 here since the trace is positive.
                if lambda_min < -EPS_PSD * lambda_max {
                    return Err(Error::NotPsd { lambda_min });
                }
            }
            DensityClass::PdTrace1 => {
                if lambda_min <= EPS_PD {
                    return Err(Error::NotPd { lambda_min });
                }
            }
        }
        Ok(Self { base: scaled, class })
    }

    /// The maximally mixed density I/n.
    pub fn maximally_mixed(n: usize) -> Self {
        Self { base: HermitianMatrix::maximally_mixed(n), class: DensityClass::PdTrace1 }
    }

    /// Strictly positive diagonal density from a probability vector.
    pub fn from_positive_diag(diag: &[f64]) -> Result<Self> {
        if diag.iter().any(|&d| d <= 0.0 || !d.is_finite()) {
            return Err(Error::NotPd {
                lambda_min: diag.iter().cloned().fold(f64::INFINITY, f64::min),
            });
        }
        Self::new_pd(HermitianMatrix::from_real_diag(diag))
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn class(&self) -> DensityClass {
        self.class
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix {
        &self.base
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        self.base.as_matrix()
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        self.base.frobenius_distance(&other.base)
    }

    /// Real diagonal of the density.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.as_matrix()[(i, i)].re).collect()
    }
}
