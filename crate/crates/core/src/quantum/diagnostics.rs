//! Positivity estimation, contraction coefficients, and the linearization
//! of the fixed-point map at the maximally mixed state.

use super::generate::{pure_state, random_unit_vector};
use super::KrausMap;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, traceless_basis, DensityMatrix, HermitianMatrix};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sampled bounds on the extreme eigenvalues of Q over unit-trace PSD
/// inputs. The estimates shrink the true range (a_est >= a(Q),
/// b_est <= b(Q)); they are never certified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityEstimate {
    pub a_est: f64,
    pub b_est: f64,
    pub samples: usize,
    pub certified: bool,
}

impl PositivityEstimate {
    /// Contraction coefficient implied by the estimates, with the sound
    /// fallback of 1 when positivity is not in evidence.
    pub fn kappa(&self) -> f64 {
        if self.a_est > 0.0 {
            (self.b_est - self.a_est) / (self.b_est + self.a_est)
        } else {
            1.0
        }
    }
}

/// Estimate a(Q) and b(Q) by sampling pure states (the extreme points of
/// the unit-trace PSD cone) and refining each sample with an alternating
/// extreme-eigenvector iteration.
///
/// The refinement is monotone by duality: with v the minimizing eigenvector
/// of Q(u u*), the next u minimizes u* Q'(v v*) u, and
/// lambda_min(Q(u' u'*)) <= lambda_min(Q(u u*)). Likewise for the maximum.
pub fn estimate_positivity(
    q: &KrausMap,
    samples: usize,
    refine_steps: usize,
    seed: u64,
) -> PositivityEstimate {
    assert!(samples >= 1, "need at least one sample");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a_est = f64::INFINITY;
    let mut b_est = f64::NEG_INFINITY;
    for _ in 0..samples {
        let u = random_unit_vector(q.n(), &mut rng);
        a_est = a_est.min(refine_extreme(q, &u, refine_steps, false));
        b_est = b_est.max(refine_extreme(q, &u, refine_steps, true));
    }
    PositivityEstimate { a_est: a_est.max(0.0), b_est, samples, certified: false }
}

fn refine_extreme(q: &KrausMap, start: &[Complex64], refine_steps: usize, maximize: bool) -> f64 {
    let mut u = start.to_vec();
    let mut best = if maximize { f64::NEG_INFINITY } else { f64::INFINITY };
    for step in 0..=refine_steps {
        let image = q.apply(&pure_state(&u)).expect("dimensions match");
        let eig = hermitian_eig(&image).expect("finite");
        let (value, col) = if maximize { (eig.lambda_max(), 0) } else { (eig.lambda_min(), q.n() - 1) };
        best = if maximize { best.max(value) } else { best.min(value) };
        if step == refine_steps {
            break;
        }
        let v: Vec<Complex64> = (0..q.n()).map(|i| eig.eigenvectors[(i, col)]).collect();
        let dual_image = q.apply_dual(&pure_state(&v)).expect("dimensions match");
        let dual_eig = hermitian_eig(&dual_image).expect("finite");
        let col = if maximize { 0 } else { q.n() - 1 };
        u = (0..q.n()).map(|i| dual_eig.eigenvectors[(i, col)]).collect();
    }
    best
}

/// Contraction coefficient (b - a) / (b + a) of a positive map whose images
/// have spectrum inside [a, b]; equals tanh(log(b/a) / 2).
pub fn contraction_coefficient(a: f64, b: f64) -> Result<f64> {
    if a.is_nan() || a <= 0.0 {
        return Err(Error::NotPositive { lambda_min: a });
    }
    if b < a {
        return Err(Error::Validation(format!("band upper end {b} below lower end {a}")));
    }
    Ok((b - a) / (b + a))
}

/// The operator W -> Q'(Q(W)) on the traceless Hermitian subspace,
/// represented on the orthonormal traceless basis, together with its
/// spectral radius. This is the linearization of the fixed-point map at the
/// maximally mixed state of a unital channel.
#[derive(Debug, Clone)]
pub struct TracelessOperator {
    /// Matrix dimension n of the underlying channel.
    pub n: usize,
    /// Dimension n^2 - 1 of the traceless subspace.
    pub dim: usize,
    /// Row-major real matrix, symmetric up to rounding.
    pub entries: Vec<f64>,
    /// Max |P_kl - P_lk| of the raw assembled matrix.
    pub symmetry_defect: f64,
    /// Eigenvalues in non-increasing order.
    pub eigenvalues: Vec<f64>,
    pub spectral_radius: f64,
}

/// Assemble the linearization for a unital channel. Errors with NOT_UNITAL
/// otherwise (the reduction to the mixed fixed point needs unitality).
pub fn fixed_point_linearization(q: &KrausMap) -> Result<TracelessOperator> {
    if !q.is_unital() {
        return Err(Error::NotUnital);
    }
    let n = q.n();
    let basis = traceless_basis(n);
    let dim = basis.len();
    let mut entries = vec![0.0; dim * dim];
    for (l, e_l) in basis.iter().enumerate() {
        let image = q.apply_dual(&q.apply(e_l)?)?;
        for (k, e_k) in basis.iter().enumerate() {
            entries[k * dim + l] = e_k.inner(&image);
        }
    }
    let mut symmetry_defect = 0.0_f64;
    for k in 0..dim {
        for l in (k + 1)..dim {
            symmetry_defect = symmetry_defect.max((entries[k * dim + l] - entries[l * dim + k]).abs());
        }
    }
    // Symmetrize and reuse the Hermitian eigensolver.
    let sym = HermitianMatrix::new(crate::linalg::ComplexMatrix::from_fn(dim, dim, |i, j| {
        Complex64::new(0.5 * (entries[i * dim + j] + entries[j * dim + i]), 0.0)
    }))?;
    let eig = hermitian_eig(&sym)?;
    let spectral_radius = eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
    Ok(TracelessOperator {
        n,
        dim,
        entries,
        symmetry_defect,
        eigenvalues: eig.eigenvalues,
        spectral_radius,
    })
}

/// Spectral band [c, d] containing the whitened image of H(a, b, 1) under
/// the alpha-whitening map:
///   c = a l_n / (a l_n + (n-1) b l_1),  d = b l_1 / (b l_1 + (n-1) a l_n),
/// where l_1, l_n are the extreme eigenvalues of alpha. The band (a, b)
/// must satisfy 0 < a <= 1/n <= b <= 1 - (n-1) a.
pub fn whitening_band(a: f64, b: f64, alpha: &DensityMatrix) -> Result<(f64, f64)> {
    let n = alpha.n();
    let nf = n as f64;
    let slack = 1e-12;
    if a.is_nan()
        || a <= 0.0
        || a > 1.0 / nf + slack
        || b + slack < 1.0 / nf
        || b > 1.0 - (nf - 1.0) * a + slack
    {
        return Err(Error::BandInvalid { a, b, n });
    }
    let eig = hermitian_eig(alpha.as_hermitian())?;
    let l1 = eig.lambda_max();
    let ln = eig.lambda_min();
    let c = a * ln / (a * ln + (nf - 1.0) * b * l1);
    let d = b * l1 / (b * l1 + (nf - 1.0) * a * ln);
    Ok((c, d))
}
