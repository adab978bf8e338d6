//! Hilbert projective metric on rays of positive definite matrices, the
//! orthonormal traceless basis, and spectral band extraction.

use super::{hermitian_eig, pd_inv_sqrt, HermitianMatrix};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Spectral band [a, b] of a Hermitian matrix, with a unit-trace flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBand {
    pub a: f64,
    pub b: f64,
    pub trace_one: bool,
}

/// Hilbert projective distance between positive definite X and Y:
/// log lambda_1(M) - log lambda_n(M) for M = Y^{-1/2} X Y^{-1/2}.
///
/// The Hermitian form is used instead of X Y^{-1}: the two share a spectrum
/// and the former keeps the eigensolve symmetric.
pub fn hilbert_distance(x: &HermitianMatrix, y: &HermitianMatrix) -> Result<f64> {
    if x.n() != y.n() {
        return Err(Error::DimensionMismatch { expected: y.n(), got: x.n() });
    }
    let y_inv_sqrt = pd_inv_sqrt(y)?;
    let m = x.conjugate_by(y_inv_sqrt.as_matrix());
    let eig = hermitian_eig(&m)?;
    if eig.lambda_min() <= 0.0 {
        return Err(Error::NotPd { lambda_min: eig.lambda_min() });
    }
    Ok(eig.lambda_max().ln() - eig.lambda_min().ln())
}

/// Orthonormal basis (Frobenius inner product) of the real vector space of
/// traceless Hermitian n x n matrices; dimension n^2 - 1.
///
/// Generalized Gell-Mann ordering: symmetric pair matrices, antisymmetric
/// pair matrices, then diagonal matrices.
pub fn traceless_basis(n: usize) -> Vec<HermitianMatrix> {
    let mut basis = Vec::new();
    if n < 2 {
        return basis;
    }
    let inv_sqrt2 = 1.0 / 2.0_f64.sqrt();
    for i in 0..n {
        for j in (i + 1)..n {
            let mut sym = super::ComplexMatrix::zeros(n, n);
            sym[(i, j)] = Complex64::new(inv_sqrt2, 0.0);
            sym[(j, i)] = Complex64::new(inv_sqrt2, 0.0);
            basis.push(HermitianMatrix::new(sym).expect("finite"));
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut skew = super::ComplexMatrix::zeros(n, n);
            skew[(i, j)] = Complex64::new(0.0, -inv_sqrt2);
            skew[(j, i)] = Complex64::new(0.0, inv_sqrt2);
            basis.push(HermitianMatrix::new(skew).expect("finite"));
        }
    }
    for l in 1..n {
        let scale = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; n];
        for d in diag.iter_mut().take(l) {
            *d = scale;
        }
        diag[l] = -(l as f64) * scale;
        basis.push(HermitianMatrix::from_real_diag(&diag));
    }
    basis
}

/// Extreme eigenvalues (lambda_n, lambda_1) of a Hermitian matrix together
/// with a unit-trace flag.
pub fn band_of(x: &HermitianMatrix) -> SpectralBand {
    let eig = hermitian_eig(x).expect("HermitianMatrix is finite by construction");
    SpectralBand {
        a: eig.lambda_min(),
        b: eig.lambda_max(),
        trace_one: (x.trace() - 1.0).abs() <= 1e-10,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ComplexMatrix;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_pd(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
        let g = ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let ridge = ComplexMatrix::identity(n).scale_re(0.05 * n as f64);
        HermitianMatrix::new(&(&g * &g.adjoint()) + &ridge).unwrap()
    }

    #[test]
    fn projective_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_pd(3, &mut rng);
        assert!(hilbert_distance(&x, &x).unwrap() <= 1e-12);
        assert!(hilbert_distance(&x.scale_re(3.0), &x).unwrap() <= 1e-12);
    }

    #[test]
    fn diagonal_case() {
        let x = HermitianMatrix::from_real_diag(&[2.0, 1.0]);
        let d = hilbert_distance(&x, &HermitianMatrix::identity(2)).unwrap();
        assert!((d - 2.0_f64.ln()).abs() <= 1e-12);
    }

    #[test]
    fn triangle_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let x = random_pd(3, &mut rng);
            let y = random_pd(3, &mut rng);
            let z = random_pd(3, &mut rng);
            let dxz = hilbert_distance(&x, &z).unwrap();
            let dxy = hilbert_distance(&x, &y).unwrap();
            let dyz = hilbert_distance(&y, &z).unwrap();
            assert!(dxz <= dxy + dyz + 1e-10);
        }
    }

    #[test]
    fn zero_distance_means_proportional() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let x = random_pd(4, &mut rng);
        let y = x.scale_re(0.37);
        assert!(hilbert_distance(&x, &y).unwrap() <= 1e-12);
        let xn = x.scale_re(1.0 / x.trace());
        let yn = y.scale_re(1.0 / y.trace());
        assert!(xn.frobenius_distance(&yn) <= 1e-8);
    }

    #[test]
    fn inversion_is_isometry() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..20 {
            let x = random_pd(3, &mut rng);
            let y = random_pd(3, &mut rng);
            let xi = crate::linalg::pd_inverse(&x).unwrap();
            let yi = crate::linalg::pd_inverse(&y).unwrap();
            let d = hilbert_distance(&x, &y).unwrap();
            let di = hilbert_distance(&xi, &yi).unwrap();
            assert!((d - di).abs() <= 1e-9);
        }
    }

    #[test]
    fn rejects_non_pd() {
        let x = HermitianMatrix::from_real_diag(&[1.0, -1.0]);
        let y = HermitianMatrix::identity(2);
        assert!(matches!(hilbert_distance(&x, &y), Err(Error::NotPd { .. })));
        assert!(matches!(hilbert_distance(&y, &x), Err(Error::NotPd { .. })));
    }

    #[test]
    fn basis_dimension() {
        assert_eq!(traceless_basis(2).len(), 3);
        assert_eq!(traceless_basis(3).len(), 8);
        assert!(traceless_basis(1).is_empty());
    }

    #[test]
    fn basis_is_orthonormal_and_traceless() {
        for n in [2usize, 3, 5] {
            let basis = traceless_basis(n);
            for (k, e) in basis.iter().enumerate() {
                assert!(e.trace().abs() <= 1e-14);
                for (l, f) in basis.iter().enumerate() {
                    let gram = e.inner(f);
                    let expect = if k == l { 1.0 } else { 0.0 };
                    assert!((gram - expect).abs() <= 1e-13, "n={n} k={k} l={l} gram={gram}");
                }
            }
        }
    }

    #[test]
    fn band_cases() {
        let b = band_of(&HermitianMatrix::maximally_mixed(3));
        assert!((b.a - 1.0 / 3.0).abs() <= 1e-14 && (b.b - 1.0 / 3.0).abs() <= 1e-14);
        assert!(b.trace_one);
        let b = band_of(&HermitianMatrix::from_real_diag(&[0.7, 0.2, 0.1]));
        assert!((b.a - 0.1).abs() <= 1e-14 && (b.b - 0.7).abs() <= 1e-14);
        assert!(b.trace_one);
        let b = band_of(&HermitianMatrix::from_real_diag(&[2.0, 1.0]));
        assert!(!b.trace_one);
    }

    #[test]
    fn density_band_brackets_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..20 {
            let x = random_pd(4, &mut rng);
            let d = crate::linalg::DensityMatrix::new_pd(x).unwrap();
            let b = band_of(d.as_hermitian());
            assert!(0.0 <= b.a && b.a <= 0.25 + 1e-12);
            assert!(0.25 - 1e-12 <= b.b && b.b <= 1.0 + 1e-12);
            assert!(b.trace_one);
        }
    }
}
