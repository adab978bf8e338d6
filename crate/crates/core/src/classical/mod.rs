//! Classical bridge: scale a nonnegative matrix A into a column-stochastic
//! B = D1 A D2 with B alpha = beta, plus the structural tests that govern
//! when such a scaling exists.

mod feasibility;
mod solve;
mod structure;

pub use feasibility::pattern_feasibility;
pub use solve::{simplex_basis, solve, ClassicalSolution};

pub(crate) use solve::solve_dense;

use crate::error::{Error, Result};

/// Dense real matrix, row-major. Classical-side counterpart of
/// [`crate::linalg::ComplexMatrix`].
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<f64>,
}

impl RealMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self { n_rows, n_cols, entries: vec![0.0; n_rows * n_cols] }
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n_rows, n_cols);
        for i in 0..n_rows {
            for j in 0..n_cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n_cols);
        (0..self.n_rows)
            .map(|i| (0..self.n_cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// A^T v without forming the transpose.
    pub fn tr_matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n_rows);
        let mut out = vec![0.0; self.n_cols];
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                out[j] += self[(i, j)] * v[i];
            }
        }
        out
    }

    pub fn column_sums(&self) -> Vec<f64> {
        self.tr_matvec(&vec![1.0; self.n_rows])
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.matvec(&vec![1.0; self.n_cols])
    }
}

impl std::ops::Index<(usize, usize)> for RealMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.entries[i * self.n_cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RealMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.entries[i * self.n_cols + j]
    }
}

/// Strictly positive probability vector; the constructor renormalizes so
/// the entries sum to one up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    entries: Vec<f64>,
}

impl ProbVector {
    /// Accepts a positive vector whose sum is within 1e-9 of one, then
    /// renormalizes exactly. Use [`ProbVector::normalized`] for raw
    /// positive vectors of arbitrary mass.
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        let sum: f64 = entries.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "probability vector sums to {sum}, beyond the 1e-9 renormalization window"
            )));
        }
        Self::normalized(entries)
    }

    /// Normalizes any strictly positive finite vector to unit mass.
    pub fn normalized(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Validation("empty probability vector".into()));
        }
        if entries.iter().any(|&e| e <= 0.0 || !e.is_finite()) {
            return Err(Error::Validation(
                "probability vector entries must be positive and finite".into(),
            ));
        }
        let sum: f64 = entries.iter().sum();
        // Keep already-normalized vectors bit-exact.
        if (sum - 1.0).abs() <= entries.len() as f64 * f64::EPSILON {
            return Ok(Self { entries });
        }
        Ok(Self { entries: entries.into_iter().map(|e| e / sum).collect() })
    }

    pub fn uniform(n: usize) -> Self {
        Self { entries: vec![1.0 / n as f64; n] }
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }
}

/// Positivity-pattern flags of a nonnegative matrix, computed once at
/// construction so the value stays immutable afterwards.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Structure {
    pub strictly_positive: bool,
    pub has_zero_row: bool,
    pub has_zero_col: bool,
    pub aat_irreducible: bool,
    pub fully_indecomposable: bool,
}

/// Nonnegative square matrix with cached structure flags.
#[derive(Debug, Clone, PartialEq)]
pub struct NonnegMatrix {
    mat: RealMatrix,
    structure: Structure,
}

impl NonnegMatrix {
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: entries.len() });
        }
        if entries.iter().any(|&e| !e.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        if entries.iter().any(|&e| e < 0.0) {
            return Err(Error::Validation("matrix entries must be nonnegative".into()));
        }
        let mat = RealMatrix { n_rows: n, n_cols: n, entries };
        let structure = structure::compute(&mat);
        Ok(Self { mat, structure })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            entries.extend_from_slice(row);
        }
        Self::new(n, entries)
    }

    pub fn n(&self) -> usize {
        self.mat.n_rows()
    }

    pub fn as_matrix(&self) -> &RealMatrix {
        &self.mat
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    pub fn is_aat_irreducible(&self) -> bool {
        self.structure.aat_irreducible
    }

    pub fn is_fully_indecomposable(&self) -> bool {
        self.structure.fully_indecomposable
    }

    /// Positivity pattern, row-major.
    pub fn pattern(&self) -> Vec<bool> {
        self.mat.entries().iter().map(|&e| e > 0.0).collect()
    }
}

fn ensure_positive(x: &[f64]) -> Result<()> {
    if x.iter().any(|&e| e <= 0.0 || !e.is_finite()) {
        return Err(Error::Validation("vector must be strictly positive and finite".into()));
    }
    Ok(())
}

/// Column-stochastic scaling of A induced by a positive vector x:
/// B = D(x) A D(A^T x)^{-1}. Scale-invariant in x; every column of the
/// result sums to one.
pub fn stochastic_scaling(a: &NonnegMatrix, x: &[f64]) -> Result<RealMatrix> {
    let n = a.n();
    if x.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    ensure_positive(x)?;
    if a.structure().has_zero_col {
        return Err(Error::ZeroColumn);
    }
    let denom = a.as_matrix().tr_matvec(x);
    Ok(RealMatrix::from_fn(n, n, |i, j| x[i] * a.as_matrix()[(i, j)] / denom[j]))
}

/// Image of the marginal alpha under the x-scaled matrix:
/// x -> (column-stochastic scaling of A at x) * alpha. Strictly positive
/// and unit mass whenever A has no zero row or column.
pub fn scaled_marginal(a: &NonnegMatrix, alpha: &ProbVector, x: &[f64]) -> Result<ProbVector> {
    if a.structure().has_zero_row {
        return Err(Error::ZeroRow);
    }
    if alpha.n() != a.n() {
        return Err(Error::DimensionMismatch { expected: a.n(), got: alpha.n() });
    }
    let b = stochastic_scaling(a, x)?;
    ProbVector::normalized(b.matvec(alpha.as_slice()))
}

/// Jacobian factor of the bridge map at a column-stochastic matrix B:
/// F = D(B alpha) - B D(alpha) B^T. Symmetric with F 1 = 0; its restriction
/// to the zero-sum subspace is positive definite when B B^T is irreducible.
pub fn bridge_jacobian(b: &RealMatrix, alpha: &ProbVector) -> RealMatrix {
    let n = b.n_rows();
    assert_eq!(n, b.n_cols());
    assert_eq!(n, alpha.n());
    let beta = b.matvec(alpha.as_slice());
    let mut f = RealMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let mut acc = 0.0;
            for k in 0..n {
                acc += b[(i, k)] * alpha.as_slice()[k] * b[(j, k)];
            }
            f[(i, j)] = if i == j { beta[i] - acc } else { -acc };
        }
    }
    f
}

/// One application of the bridge iteration map: the diagonal restriction of
/// the quantum composition applied to a positive vector x.
///
///   v = A x,  w = normalize(beta / v),  z = normalize(A^T w),
///   result = normalize(alpha / z).
pub fn iteration_map(
    a: &NonnegMatrix,
    alpha: &ProbVector,
    beta: &ProbVector,
    x: &[f64],
) -> Result<Vec<f64>> {
    let n = a.n();
    if x.len() != n || alpha.n() != n || beta.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.len() });
    }
    if a.structure().has_zero_col {
        return Err(Error::ZeroColumn);
    }
    if a.structure().has_zero_row {
        return Err(Error::ZeroRow);
    }
    ensure_positive(x)?;
    let v = a.as_matrix().matvec(x);
    let w = normalize_ratio(beta.as_slice(), &v)?;
    let z_raw = a.as_matrix().tr_matvec(&w);
    let z_sum: f64 = z_raw.iter().sum();
    let z: Vec<f64> = z_raw.into_iter().map(|e| e / z_sum).collect();
    normalize_ratio(alpha.as_slice(), &z)
}

fn normalize_ratio(num: &[f64], den: &[f64]) -> Result<Vec<f64>> {
    let ratio: Vec<f64> = num.iter().zip(den.iter()).map(|(&p, &q)| p / q).collect();
    let sum: f64 = ratio.iter().sum();
    if !sum.is_finite() || sum <= 0.0 {
        return Err(Error::ZeroTrace { trace: sum });
    }
    Ok(ratio.into_iter().map(|e| e / sum).collect())
}

/// Entrywise l1 distance between equal-length slices.
pub fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).sum()
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scaling_of_identity_is_identity() {
        let a = NonnegMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        let b = stochastic_scaling(&a, &[0.3, 0.7]).unwrap();
        assert_eq!(b, RealMatrix::identity(2));
    }

    #[test]
    fn scaling_of_permutation_is_constant() {
        let p = NonnegMatrix::from_rows(&[&[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]])
            .unwrap();
        let b1 = stochastic_scaling(&p, &[0.2, 0.3, 0.5]).unwrap();
        let b2 = stochastic_scaling(&p, &[0.7, 0.1, 0.2]).unwrap();
        assert_eq!(b1, *p.as_matrix());
        assert_eq!(b2, *p.as_matrix());
    }

    #[test]
    fn scaling_of_flat_matrix_at_uniform() {
        let a = NonnegMatrix::from_rows(&[&[1.0, 1.0], &[1.0, 1.0]]).unwrap();
        let b = stochastic_scaling(&a, &[0.5, 0.5]).unwrap();
        for &e in b.entries() {
            assert!((e - 0.5).abs() <= 1e-15);
        }
    }

    #[test]
    fn scaling_is_scale_invariant_and_stochastic() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_positive(4, &mut rng);
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(0.2..2.0)).collect();
        let base = stochastic_scaling(&a, &x).unwrap();
        for t in [0.1, 7.0, 1000.0] {
            let scaled: Vec<f64> = x.iter().map(|e| e * t).collect();
            let b = stochastic_scaling(&a, &scaled).unwrap();
            for (p, q) in b.entries().iter().zip(base.entries().iter()) {
                assert!((p - q).abs() <= 1e-12);
            }
        }
        for s in base.column_sums() {
            assert!((s - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn scaling_rejects_zero_column() {
        let a = NonnegMatrix::from_rows(&[&[1.0, 0.0], &[1.0, 0.0]]).unwrap();
        assert_eq!(stochastic_scaling(&a, &[0.5, 0.5]).unwrap_err(), Error::ZeroColumn);
    }

    #[test]
    fn marginal_of_stochastic_at_uniform() {
        // For column-stochastic A the scaling at the uniform vector is A itself.
        let a = NonnegMatrix::from_rows(&[&[0.8, 0.3], &[0.2, 0.7]]).unwrap();
        let alpha = ProbVector::new(vec![0.4, 0.6]).unwrap();
        let out = scaled_marginal(&a, &alpha, &[0.5, 0.5]).unwrap();
        let expect = a.as_matrix().matvec(alpha.as_slice());
        assert!(l1_distance(out.as_slice(), &expect) <= 1e-14);
    }

    #[test]
    fn marginal_boundary_family_converges_to_limit() {
        // x(t) = (t c1, t c2, 1 - t(c1 + c2)) with c1 = c2 = 1/2 pushes the
        // scaling to the boundary matrix [[0,c1,0],[0,c2,0],[1,0,1]].
        let a = exdfimat();
        let alpha = ProbVector::uniform(3);
        let blim = [[0.0, 0.5, 0.0], [0.0, 0.5, 0.0], [1.0, 0.0, 1.0]];
        let expect: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| blim[i][j] * alpha.as_slice()[j]).sum())
            .collect();
        let mut prev_gap = f64::INFINITY;
        for t in [1e-2, 1e-4, 1e-6] {
            let x = [t * 0.5, t * 0.5, 1.0 - t];
            let out = scaled_marginal(&a, &alpha, &x).unwrap();
            let gap = l1_distance(out.as_slice(), &expect);
            assert!(gap < prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap <= 1e-5);
    }

    #[test]
    fn marginal_is_positive_unit_mass() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let a = random_positive(5, &mut rng);
            let alpha = random_prob(5, &mut rng);
            let x: Vec<f64> = (0..5).map(|_| rng.gen_range(0.1..1.0)).collect();
            let out = scaled_marginal(&a, &alpha, &x).unwrap();
            assert!(out.as_slice().iter().all(|&e| e > 0.0));
            assert!((out.as_slice().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn jacobian_annihilates_ones() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = random_positive(4, &mut rng);
        let alpha = random_prob(4, &mut rng);
        let x: Vec<f64> = (0..4).map(|_| rng.gen_range(0.1..1.0)).collect();
        let b = stochastic_scaling(&a, &x).unwrap();
        let f = bridge_jacobian(&b, &alpha);
        for s in f.row_sums() {
            assert!(s.abs() <= 1e-12);
        }
        for i in 0..4 {
            for j in 0..4 {
                assert!((f[(i, j)] - f[(j, i)]).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn iteration_map_fixes_alpha_when_transport_is_exact() {
        // If A is column-stochastic and beta = A alpha, alpha is a fixed point.
        let a = NonnegMatrix::from_rows(&[&[0.8, 0.3], &[0.2, 0.7]]).unwrap();
        let alpha = ProbVector::new(vec![0.3, 0.7]).unwrap();
        let beta = ProbVector::normalized(a.as_matrix().matvec(alpha.as_slice())).unwrap();
        let next = iteration_map(&a, &alpha, &beta, alpha.as_slice()).unwrap();
        assert!(l1_distance(&next, alpha.as_slice()) <= 1e-14);
    }
}
