//! Cyclic Jacobi eigensolver for dense complex Hermitian matrices, plus the
//! spectral functions built on it (square root, inverse square root, inverse).
//!
//! Jacobi is unconditionally stable and accurate at desk scale (n <= 64);
//! each rotation annihilates one off-diagonal pair, and the off-diagonal
//! Frobenius mass decreases monotonically.

use super::{ComplexMatrix, HermitianMatrix, EPS_PD};
use crate::error::{Error, Result};
use num_complex::Complex64;

/// Off-diagonal mass threshold, relative to the Frobenius norm of the input.
const OFF_DIAG_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 60;

/// Spectral decomposition X = U diag(lambda) U* with eigenvalues sorted in
/// non-increasing order and eigenvectors in the corresponding columns of U.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_min(&self) -> f64 {
        *self.eigenvalues.last().expect("n >= 1")
    }

    /// Rebuild U f(diag) U* for a spectral map f.
    pub fn apply_spectral(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.n();
        let u = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for k in 0..n {
                    acc += u[(i, k)] * f(self.eigenvalues[k]) * u[(j, k)].conj();
                }
                out[(i, j)] = acc;
            }
        }
        HermitianMatrix::new(out).expect("spectral function of a finite matrix is finite")
    }
}

fn off_diagonal_mass(a: &ComplexMatrix) -> f64 {
    let n = a.n_rows();
    let mut sum = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                sum += a[(p, q)].norm_sqr();
            }
        }
    }
    sum.sqrt()
}

/// Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.
pub fn hermitian_eig(x: &HermitianMatrix) -> Result<EigenDecomposition> {
    if !x.as_matrix().is_finite() {
        return Err(Error::NonFiniteInput);
    }
    let n = x.n();
    let mut a = x.as_matrix().clone();
    let mut v = ComplexMatrix::identity(n);
    let tol = OFF_DIAG_TOL * x.frobenius_norm();

    let mut prev_off = f64::INFINITY;
    for _sweep in 0..MAX_SWEEPS {
        let off = off_diagonal_mass(&a);
        if off <= tol || off >= prev_off {
            // Converged, or hit the rounding floor.
            break;
        }
        prev_off = off;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    // Diagonal entries are the eigenvalues; sort descending, carrying columns.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).expect("finite"));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(EigenDecomposition { eigenvalues, eigenvectors })
}

/// One Jacobi rotation annihilating the (p, q) entry of the Hermitian
/// working matrix `a`, accumulated into the eigenvector matrix `v`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r == 0.0 {
        return;
    }
    let phase = apq / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // J differs from the identity in rows/columns p and q:
    //   J[p][p] = c, J[p][q] = s*phase, J[q][p] = -s*conj(phase), J[q][q] = c.
    let sp = phase.scale(s);

    let n = a.n_rows();
    // A <- A J (update columns p, q).
    for i in 0..n {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip.scale(c) - sp.conj() * aiq;
        a[(i, q)] = sp * aip + aiq.scale(c);
    }
    // A <- J* A (update rows p, q).
    for j in 0..n {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = apj.scale(c) - sp * aqj;
        a[(q, j)] = sp.conj() * apj + aqj.scale(c);
    }
    // Enforce what the rotation guarantees in exact arithmetic.
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    // V <- V J.
    for i in 0..n {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip.scale(c) - sp.conj() * viq;
        v[(i, q)] = sp * vip + viq.scale(c);
    }
}

/// Positive semidefinite square root. Eigenvalues in
/// [-EPS_PSD * max(1, lambda_max), 0) are clipped to zero; anything lower
/// is rejected as NOT_PSD.
pub fn psd_sqrt(x: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = hermitian_eig(x)?;
    let floor = -super::EPS_PSD * eig.lambda_max().max(1.0);
    if eig.lambda_min() < floor {
        return Err(Error::NotPsd { lambda_min: eig.lambda_min() });
    }
    Ok(eig.apply_spectral(|l| l.max(0.0).sqrt()))
}

/// Inverse square root of a positive definite matrix.
pub fn pd_inv_sqrt(x: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = hermitian_eig(x)?;
    if eig.lambda_min() <= EPS_PD {
        return Err(Error::NotPd { lambda_min: eig.lambda_min() });
    }
    Ok(eig.apply_spectral(|l| 1.0 / l.sqrt()))
}

/// Inverse of a positive definite matrix.
pub fn pd_inverse(x: &HermitianMatrix) -> Result<HermitianMatrix> {
    let eig = hermitian_eig(x)?;
    if eig.lambda_min() <= EPS_PD {
        return Err(Error::NotPd { lambda_min: eig.lambda_min() });
    }
    Ok(eig.apply_spectral(|l| 1.0 / l))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> HermitianMatrix {
        let raw = ComplexMatrix::from_fn(n, n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        HermitianMatrix::new(raw).unwrap()
    }

    fn reconstruct(e: &EigenDecomposition) -> HermitianMatrix {
        e.apply_spectral(|l| l)
    }

    #[test]
    fn identity_eigenvalues() {
        let e = hermitian_eig(&HermitianMatrix::identity(3)).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
        let u = &e.eigenvectors;
        let defect = (&u.adjoint() * u).frobenius_distance(&ComplexMatrix::identity(3));
        assert!(defect <= 1e-12);
    }

    #[test]
    fn diagonal_sorts_descending() {
        let e = hermitian_eig(&HermitianMatrix::from_real_diag(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![3.0, 2.0, 1.0]);
        // Permutation eigenvectors: column j has a single unit entry.
        for j in 0..3 {
            let col_norms: Vec<f64> = (0..3).map(|i| e.eigenvectors[(i, j)].norm()).collect();
            assert!((col_norms.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn random_reconstruction_residual() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for n in [1usize, 2, 3, 5, 8, 16] {
            let x = random_hermitian(n, &mut rng);
            let e = hermitian_eig(&x).unwrap();
            let scale = x.frobenius_norm().max(1.0);
            assert!(reconstruct(&e).frobenius_distance(&x) <= 1e-10 * scale, "n = {n}");
            let u = &e.eigenvectors;
            let unitary_defect = (&u.adjoint() * u).frobenius_distance(&ComplexMatrix::identity(n));
            assert!(unitary_defect <= 1e-10, "n = {n}");
            for w in e.eigenvalues.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn sqrt_identity_and_diag() {
        let r = psd_sqrt(&HermitianMatrix::identity(2)).unwrap();
        assert!(r.frobenius_distance(&HermitianMatrix::identity(2)) <= 1e-14);
        let r = psd_sqrt(&HermitianMatrix::from_real_diag(&[4.0, 9.0])).unwrap();
        assert!(r.frobenius_distance(&HermitianMatrix::from_real_diag(&[2.0, 3.0])) <= 1e-13);
    }

    #[test]
    fn sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [2usize, 4, 6] {
            let g = ComplexMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let x = HermitianMatrix::new(&g * &g.adjoint()).unwrap();
            let r = psd_sqrt(&x).unwrap();
            let rr = HermitianMatrix::new(r.as_matrix() * r.as_matrix()).unwrap();
            assert!(rr.frobenius_distance(&x) <= 1e-9 * x.frobenius_norm().max(1.0));
        }
    }

    #[test]
    fn sqrt_rejects_indefinite() {
        let x = HermitianMatrix::from_real_diag(&[1.0, -1e-3]);
        assert!(matches!(psd_sqrt(&x), Err(Error::NotPsd { .. })));
        // Tiny negative drift is clipped instead.
        let x = HermitianMatrix::from_real_diag(&[1.0, -1e-13]);
        assert!(psd_sqrt(&x).is_ok());
    }

    #[test]
    fn inv_sqrt_identity_and_diag() {
        let r = pd_inv_sqrt(&HermitianMatrix::identity(2)).unwrap();
        assert!(r.frobenius_distance(&HermitianMatrix::identity(2)) <= 1e-14);
        let r = pd_inv_sqrt(&HermitianMatrix::from_real_diag(&[4.0, 0.25])).unwrap();
        assert!(r.frobenius_distance(&HermitianMatrix::from_real_diag(&[0.5, 2.0])) <= 1e-13);
    }

    #[test]
    fn inv_sqrt_whitens() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [2usize, 3, 5] {
            let g = ComplexMatrix::from_fn(n, n, |_, _| {
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let x = HermitianMatrix::new(
                &(&g * &g.adjoint()) + &ComplexMatrix::identity(n).scale_re(0.1),
            )
            .unwrap();
            let e = hermitian_eig(&x).unwrap();
            let cond = e.lambda_max() / e.lambda_min();
            let r = pd_inv_sqrt(&x).unwrap();
            let rxr = x.conjugate_by(r.as_matrix());
            let defect = rxr.frobenius_distance(&HermitianMatrix::identity(n));
            assert!(defect <= 1e-9 * cond, "defect {defect}, cond {cond}");
        }
    }

    #[test]
    fn inv_sqrt_rejects_singular() {
        let x = HermitianMatrix::from_real_diag(&[1.0, 0.0]);
        assert!(matches!(pd_inv_sqrt(&x), Err(Error::NotPd { .. })));
    }

    #[test]
    fn fourth_root_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = ComplexMatrix::from_fn(4, 4, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let x = HermitianMatrix::new(&g * &g.adjoint()).unwrap();
        let quarter = psd_sqrt(&psd_sqrt(&x).unwrap()).unwrap();
        let sq = HermitianMatrix::new(quarter.as_matrix() * quarter.as_matrix()).unwrap();
        let fourth = HermitianMatrix::new(sq.as_matrix() * sq.as_matrix()).unwrap();
        assert!(fourth.frobenius_distance(&x) <= 1e-8 * x.frobenius_norm());
    }
}
