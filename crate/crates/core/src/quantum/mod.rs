//! Quantum bridge: completely positive maps in Kraus form, the fixed-point
//! composition that solves the channel scaling problem, construction of the
//! scaled channel, and contraction diagnostics.

mod diagnostics;
mod generate;
mod solve;

pub use diagnostics::{
    contraction_coefficient, estimate_positivity, fixed_point_linearization, whitening_band,
    PositivityEstimate, TracelessOperator,
};
pub use generate::{
    depolarizing_channel, diagonal_embedding, random_channel, random_column_stochastic,
    random_density, random_unital_channel, random_unit_vector, random_unitary, wishart_density,
};
pub use solve::{
    build_scaled_channel, probe_uniqueness, scaling_certificate, solve, solve_from,
    BridgeSolution, CertificateResiduals, ProbeCluster, ProbeReport, ScaledChannel,
    ScalingCertificate,
};

use crate::error::{Error, Result};
use crate::linalg::{pd_inv_sqrt, ComplexMatrix, DensityClass, DensityMatrix, HermitianMatrix, EPS_PD};
use num_complex::Complex64;

/// Frobenius tolerance for the verified channel / unital flags.
pub const CHANNEL_TOL: f64 = 1e-10;

/// Completely positive map given by a list of Kraus operators. The channel
/// and unital flags are verified at construction, never asserted.
#[derive(Debug, Clone)]
pub struct KrausMap {
    n: usize,
    kraus: Vec<ComplexMatrix>,
    is_channel: bool,
    is_unital: bool,
}

impl KrausMap {
    pub fn new(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or(Error::Validation("empty Kraus list".into()))?;
        let n = first.n_rows();
        for op in &kraus {
            if op.n_rows() != n || op.n_cols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: op.n_rows().max(op.n_cols()),
                });
            }
            if !op.is_finite() {
                return Err(Error::NonFiniteInput);
            }
        }
        let mut map = Self { n, kraus, is_channel: false, is_unital: false };
        map.is_channel = map.channel_defect() <= CHANNEL_TOL;
        map.is_unital = map.is_channel && map.unital_defect() <= CHANNEL_TOL;
        Ok(map)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn is_channel(&self) -> bool {
        self.is_channel
    }

    pub fn is_unital(&self) -> bool {
        self.is_unital
    }

    /// || sum A_i* A_i - I ||_F (zero for a trace-preserving channel).
    pub fn channel_defect(&self) -> f64 {
        let mut acc = ComplexMatrix::zeros(self.n, self.n);
        for op in &self.kraus {
            acc = &acc + &(&op.adjoint() * op);
        }
        acc.frobenius_distance(&ComplexMatrix::identity(self.n))
    }

    /// || sum A_i A_i* - I ||_F (zero when the map also fixes the identity).
    pub fn unital_defect(&self) -> f64 {
        let mut acc = ComplexMatrix::zeros(self.n, self.n);
        for op in &self.kraus {
            acc = &acc + &(op * &op.adjoint());
        }
        acc.frobenius_distance(&ComplexMatrix::identity(self.n))
    }

    /// Q(X) = sum A_i X A_i*, re-hermitized.
    pub fn apply(&self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.n() });
        }
        let mut acc = ComplexMatrix::zeros(self.n, self.n);
        for op in &self.kraus {
            acc = &acc + &(&(op * x.as_matrix()) * &op.adjoint());
        }
        HermitianMatrix::new(acc)
    }

    /// Dual map Q'(X) = sum A_i* X A_i; adjoint of `apply` under the trace
    /// inner product.
    pub fn apply_dual(&self, x: &HermitianMatrix) -> Result<HermitianMatrix> {
        if x.n() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: x.n() });
        }
        let mut acc = ComplexMatrix::zeros(self.n, self.n);
        for op in &self.kraus {
            acc = &acc + &(&(&op.adjoint() * x.as_matrix()) * op);
        }
        HermitianMatrix::new(acc)
    }

    /// Trace-normalized dual application: Q'(X) / tr Q'(X). For a unital
    /// channel this is Q' itself on unit-trace input.
    pub fn apply_dual_normalized(&self, x: &DensityMatrix) -> Result<DensityMatrix> {
        let raw = self.apply_dual(x.as_hermitian())?;
        let tr = raw.trace();
        if tr <= EPS_PD {
            return Err(Error::ZeroTrace { trace: tr });
        }
        DensityMatrix::new_psd(raw)
    }
}

/// Density proportional to X^{-1/2} target X^{-1/2}: whitens the target by
/// a positive definite X and renormalizes the trace. A positive definite
/// target yields a positive definite result, and that is enforced (NOT_PD
/// on drift below the floor); a merely PSD target yields a PSD result.
pub fn whiten_density(target: &DensityMatrix, x: &HermitianMatrix) -> Result<DensityMatrix> {
    if target.n() != x.n() {
        return Err(Error::DimensionMismatch { expected: x.n(), got: target.n() });
    }
    let inv_sqrt = pd_inv_sqrt(x)?;
    let m = target.as_hermitian().conjugate_by(inv_sqrt.as_matrix());
    let tr = m.trace();
    if tr <= EPS_PD {
        return Err(Error::ZeroTrace { trace: tr });
    }
    match target.class() {
        DensityClass::PdTrace1 => DensityMatrix::new_pd(m),
        DensityClass::PsdTrace1 => DensityMatrix::new_psd(m),
    }
}

/// Intermediate values of one bridge-map application, reused by the scaled
/// channel construction.
pub(crate) struct BridgeStages {
    pub v: HermitianMatrix,
    pub w: DensityMatrix,
    pub z: DensityMatrix,
    pub next: DensityMatrix,
}

/// Evaluate the stages of whiten(alpha) . normalized-dual . whiten(beta) . Q
/// at X. Failures of positive definiteness at the Q-image stage surface as
/// NOT_POSITIVE (the channel is not positive enough), later stages as NOT_PD.
pub(crate) fn bridge_stages(
    q: &KrausMap,
    alpha: &DensityMatrix,
    beta: &DensityMatrix,
    x: &DensityMatrix,
) -> Result<BridgeStages> {
    let v = q.apply(x.as_hermitian())?;
    let w = whiten_density(beta, &v).map_err(|e| match e {
        Error::NotPd { lambda_min } => Error::NotPositive { lambda_min },
        other => other,
    })?;
    let z = q.apply_dual_normalized(&w)?;
    let next = whiten_density(alpha, z.as_hermitian())?;
    Ok(BridgeStages { v, w, z, next })
}

/// One application of the bridge fixed-point map
/// X -> whiten_alpha(normalized_dual(whiten_beta(Q(X)))).
pub fn bridge_map(
    q: &KrausMap,
    alpha: &DensityMatrix,
    beta: &DensityMatrix,
    x: &DensityMatrix,
) -> Result<DensityMatrix> {
    let stages = bridge_stages(q, alpha, beta, x).map_err(|e| match e {
        Error::NotPositive { lambda_min } => Error::NotPd { lambda_min },
        other => other,
    })?;
    Ok(stages.next)
}

pub(crate) fn unit_matrix(n: usize, i: usize, j: usize, scale: f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(n, n);
    m[(i, j)] = Complex64::new(scale, 0.0);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{band_of, hermitian_eig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn identity_channel(n: usize) -> KrausMap {
        KrausMap::new(vec![ComplexMatrix::identity(n)]).unwrap()
    }

    #[test]
    fn identity_channel_flags_and_action() {
        let q = identity_channel(3);
        assert!(q.is_channel());
        assert!(q.is_unital());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_density(3, 0.1, &mut rng);
        let y = q.apply(x.as_hermitian()).unwrap();
        assert!(y.frobenius_distance(x.as_hermitian()) <= 1e-14);
        let y = q.apply_dual(x.as_hermitian()).unwrap();
        assert!(y.frobenius_distance(x.as_hermitian()) <= 1e-14);
        let y = q.apply_dual_normalized(&x).unwrap();
        assert!(y.frobenius_distance(&x) <= 1e-14);
    }

    #[test]
    fn depolarizing_action_matches_closed_form() {
        let p = 0.3;
        let q = depolarizing_channel(2, p);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_density(2, 0.0, &mut rng);
        let out = q.apply(x.as_hermitian()).unwrap();
        let expect = x
            .as_hermitian()
            .scale_re(1.0 - p)
            .add(&HermitianMatrix::maximally_mixed(2).scale_re(p));
        assert!(out.frobenius_distance(&expect) <= 1e-13);
    }

    #[test]
    fn apply_preserves_psd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let q = random_channel(3, 4, 0.0, 99);
            let x = wishart_density(3, &mut rng);
            let out = q.apply(x.as_hermitian()).unwrap();
            let eig = hermitian_eig(&out).unwrap();
            assert!(eig.lambda_min() >= -1e-12);
        }
    }

    #[test]
    fn dual_is_trace_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = random_channel(3, 3, 0.2, 5);
        for _ in 0..10 {
            let x = random_density(3, 0.0, &mut rng);
            let y = random_density(3, 0.0, &mut rng);
            let lhs = q.apply(x.as_hermitian()).unwrap().inner(y.as_hermitian());
            let rhs = x.as_hermitian().inner(&q.apply_dual(y.as_hermitian()).unwrap());
            assert!((lhs - rhs).abs() <= 1e-10);
        }
        // Channel: dual fixes the identity.
        let qi = q.apply_dual(&HermitianMatrix::identity(3)).unwrap();
        assert!(qi.frobenius_distance(&HermitianMatrix::identity(3)) <= 1e-10);
    }

    #[test]
    fn unital_channel_dual_normalization_is_plain_dual() {
        let q = random_unital_channel(3, 3, 0.3, 11);
        assert!(q.is_unital());
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x = random_density(3, 0.1, &mut rng);
        let tilde = q.apply_dual_normalized(&x).unwrap();
        let plain = q.apply_dual(x.as_hermitian()).unwrap();
        assert!(tilde.as_hermitian().frobenius_distance(&plain) <= 1e-10);
    }

    #[test]
    fn normalized_dual_band_containment_depolarizing() {
        // Exact a = p/n, b = 1 - p + p/n on the depolarizing family; the
        // normalized dual lands inside the derived (e, f) band.
        let n = 3;
        let p = 0.4;
        let q = depolarizing_channel(n, p);
        let a = p / n as f64;
        let b = 1.0 - p + p / n as f64;
        let e = a / (a + (n as f64 - 1.0) * b);
        let f = b / (b + (n as f64 - 1.0) * a);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let x = wishart_density(n, &mut rng);
            let out = q.apply_dual_normalized(&x).unwrap();
            let band = band_of(out.as_hermitian());
            assert!(band.a >= e - 1e-10, "lambda_min {} < e {}", band.a, e);
            assert!(band.b <= f + 1e-10, "lambda_max {} > f {}", band.b, f);
        }
    }

    #[test]
    fn whiten_by_mixed_state_returns_target() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let alpha = random_density(3, 0.05, &mut rng);
        let x = HermitianMatrix::maximally_mixed(3);
        let out = whiten_density(&alpha, &x).unwrap();
        assert!(out.frobenius_distance(&alpha) <= 1e-13);
    }

    #[test]
    fn whiten_uniform_target_inverts() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = random_density(3, 0.1, &mut rng);
        let out = whiten_density(&DensityMatrix::maximally_mixed(3), x.as_hermitian()).unwrap();
        let inv = crate::linalg::pd_inverse(x.as_hermitian()).unwrap();
        let expect = inv.scale_re(1.0 / inv.trace());
        assert!(out.as_hermitian().frobenius_distance(&expect) <= 1e-12);
    }

    #[test]
    fn whiten_rejects_indefinite() {
        let alpha = DensityMatrix::maximally_mixed(2);
        let x = HermitianMatrix::from_real_diag(&[1.0, -0.2]);
        assert!(matches!(whiten_density(&alpha, &x), Err(Error::NotPd { .. })));
    }

    #[test]
    fn bridge_map_fixes_mixed_state_for_unital_channel() {
        let q = random_unital_channel(3, 4, 0.2, 21);
        let mixed = DensityMatrix::maximally_mixed(3);
        let out = bridge_map(&q, &mixed, &mixed, &mixed).unwrap();
        assert!(out.frobenius_distance(&mixed) <= 1e-12);
    }

    #[test]
    fn bridge_map_output_has_unit_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let q = random_channel(3, 3, 0.3, 31);
        let alpha = random_density(3, 0.1, &mut rng);
        let beta = random_density(3, 0.1, &mut rng);
        let x = random_density(3, 0.1, &mut rng);
        let out = bridge_map(&q, &alpha, &beta, &x).unwrap();
        assert!((out.as_hermitian().trace() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn bridge_map_matches_classical_composition_on_diagonal_embedding() {
        use crate::classical::{iteration_map, NonnegMatrix, ProbVector};
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        // Random strictly positive column-stochastic A.
        let n = 4;
        let mut entries = vec![0.0; n * n];
        for j in 0..n {
            let raw: Vec<f64> = (0..n).map(|_| rand::Rng::gen_range(&mut rng, 0.2..1.0)).collect();
            let sum: f64 = raw.iter().sum();
            for i in 0..n {
                entries[i * n + j] = raw[i] / sum;
            }
        }
        let a = NonnegMatrix::new(n, entries).unwrap();
        let q = diagonal_embedding(&a).unwrap();
        let alpha = ProbVector::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let beta = ProbVector::new(vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let x = ProbVector::new(vec![0.25, 0.25, 0.3, 0.2]).unwrap();

        let expected = iteration_map(&a, &alpha, &beta, x.as_slice()).unwrap();
        let out = bridge_map(
            &q,
            &DensityMatrix::from_positive_diag(alpha.as_slice()).unwrap(),
            &DensityMatrix::from_positive_diag(beta.as_slice()).unwrap(),
            &DensityMatrix::from_positive_diag(x.as_slice()).unwrap(),
        )
        .unwrap();
        // The image stays diagonal and matches the classical composition.
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    assert!(out.as_matrix()[(i, j)].norm() <= 1e-12);
                }
            }
        }
        for (got, want) in out.diagonal().iter().zip(expected.iter()) {
            assert!((got - want).abs() <= 1e-12);
        }
    }
}
