//! Deterministic generators: random channels, unital channels, the
//! depolarizing family, diagonal embeddings of stochastic matrices, and
//! random densities.

use super::{unit_matrix, KrausMap};
use crate::classical::NonnegMatrix;
use crate::error::{Error, Result};
use crate::linalg::{pd_inv_sqrt, psd_sqrt, ComplexMatrix, DensityMatrix, HermitianMatrix};
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub(crate) fn gaussian_matrix(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Uniformly random unit vector on the complex sphere.
pub fn random_unit_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-6 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Wishart-normalized density G G* / tr(G G*), full rank almost surely but
/// possibly ill conditioned.
pub fn wishart_density(n: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    random_density(n, 0.0, rng)
}

/// Random density (G G* + ridge * (tr G G* / n) I) / trace. A relative ridge
/// of 0.1 keeps the condition number around a few hundred.
pub fn random_density(n: usize, ridge: f64, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let g = gaussian_matrix(n, rng);
    let gg = HermitianMatrix::new(&g * &g.adjoint()).expect("finite");
    let shifted = if ridge > 0.0 {
        gg.add(&HermitianMatrix::identity(n).scale_re(ridge * gg.trace() / n as f64))
    } else {
        gg
    };
    DensityMatrix::new_pd(shifted).expect("Gaussian Gram matrix is positive definite")
}

/// The depolarizing channel X -> (1 - p) X + p tr(X) I / n, built from the
/// Kraus set {sqrt(1-p) I} plus {sqrt(p/n) E_ij}.
pub fn depolarizing_channel(n: usize, p: f64) -> KrausMap {
    assert!(n >= 1 && (0.0..=1.0).contains(&p), "need n >= 1 and p in [0, 1]");
    let mut kraus = Vec::new();
    if p < 1.0 {
        kraus.push(ComplexMatrix::identity(n).scale_re((1.0 - p).sqrt()));
    }
    if p > 0.0 {
        let scale = (p / n as f64).sqrt();
        for i in 0..n {
            for j in 0..n {
                kraus.push(unit_matrix(n, i, j, scale));
            }
        }
    }
    KrausMap::new(kraus).expect("depolarizing Kraus set is a channel")
}

/// Right-normalize Kraus operators so that sum A_i* A_i = I. Applied twice
/// when one pass leaves a visible defect.
fn normalize_to_channel(mut kraus: Vec<ComplexMatrix>) -> Vec<ComplexMatrix> {
    for _ in 0..2 {
        let n = kraus[0].n_rows();
        let mut gram = ComplexMatrix::zeros(n, n);
        for op in &kraus {
            gram = &gram + &(&op.adjoint() * op);
        }
        let gram = HermitianMatrix::new(gram).expect("finite");
        let k = pd_inv_sqrt(&gram).expect("Kraus Gram matrix is positive definite");
        kraus = kraus.iter().map(|op| op * k.as_matrix()).collect();
        let defect = KrausMap::new(kraus.clone()).expect("valid Kraus list").channel_defect();
        if defect <= 1e-12 {
            break;
        }
    }
    kraus
}

/// Random quantum channel: k Gaussian Kraus operators right-normalized into
/// an exact channel, then mixed with the depolarizing channel with weight
/// `positivity_mix`, which floors a(Q) at positivity_mix / n.
pub fn random_channel(n: usize, k: usize, positivity_mix: f64, seed: u64) -> KrausMap {
    assert!(n >= 1 && k >= 1, "need n >= 1 and k >= 1");
    assert!((0.0..=1.0).contains(&positivity_mix), "positivity_mix in [0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kraus = Vec::new();
    if positivity_mix < 1.0 {
        let gaussian: Vec<ComplexMatrix> = (0..k).map(|_| gaussian_matrix(n, &mut rng)).collect();
        let scale = (1.0 - positivity_mix).sqrt();
        kraus.extend(normalize_to_channel(gaussian).into_iter().map(|op| op.scale_re(scale)));
    }
    if positivity_mix > 0.0 {
        let scale = (positivity_mix / n as f64).sqrt();
        for i in 0..n {
            for j in 0..n {
                kraus.push(unit_matrix(n, i, j, scale));
            }
        }
    }
    KrausMap::new(kraus).expect("construction yields a channel")
}

/// Random unitary: Gram-Schmidt on Gaussian columns, re-orthogonalized once
/// so the unitarity defect stays at rounding level for any draw.
#[allow(clippy::needless_range_loop)]
pub fn random_unitary(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = gaussian_matrix(n, rng);
    let mut cols: Vec<Vec<Complex64>> =
        (0..n).map(|j| (0..n).map(|i| g[(i, j)]).collect()).collect();
    for j in 0..n {
        for _pass in 0..2 {
            for i in 0..j {
                let proj: Complex64 =
                    (0..n).map(|r| cols[i][r].conj() * cols[j][r]).sum();
                for r in 0..n {
                    let correction = proj * cols[i][r];
                    cols[j][r] -= correction;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for r in 0..n {
            cols[j][r] /= norm;
        }
    }
    ComplexMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// Random positive unital channel: a uniform mixture of k random unitary
/// conjugations, mixed with the depolarizing channel with weight
/// `positivity_mix`. Both ingredients are unital, so the mix is too.
pub fn random_unital_channel(n: usize, k: usize, positivity_mix: f64, seed: u64) -> KrausMap {
    assert!(n >= 1 && k >= 1, "need n >= 1 and k >= 1");
    assert!((0.0..=1.0).contains(&positivity_mix), "positivity_mix in [0, 1]");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kraus = Vec::new();
    if positivity_mix < 1.0 {
        let scale = ((1.0 - positivity_mix) / k as f64).sqrt();
        for _ in 0..k {
            kraus.push(random_unitary(n, &mut rng).scale_re(scale));
        }
    }
    if positivity_mix > 0.0 {
        let scale = (positivity_mix / n as f64).sqrt();
        for i in 0..n {
            for j in 0..n {
                kraus.push(unit_matrix(n, i, j, scale));
            }
        }
    }
    KrausMap::new(kraus).expect("construction yields a unital channel")
}

/// Embed a column-stochastic matrix as the channel with Kraus operators
/// sqrt(a_ij) E_ij. The result maps any X to the diagonal matrix with
/// entries (A diag(X))_i, and its dual fixes the identity exactly.
pub fn diagonal_embedding(a: &NonnegMatrix) -> Result<KrausMap> {
    let n = a.n();
    let defect = a
        .as_matrix()
        .column_sums()
        .iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max);
    if defect > 1e-10 {
        return Err(Error::NotStochastic { defect });
    }
    let mut kraus = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let aij = a.as_matrix()[(i, j)];
            if aij > 0.0 {
                kraus.push(unit_matrix(n, i, j, aij.sqrt()));
            }
        }
    }
    KrausMap::new(kraus)
}

/// Random strictly positive column-stochastic matrix (entries bounded away
/// from zero before normalization).
pub fn random_column_stochastic(n: usize, rng: &mut ChaCha8Rng) -> NonnegMatrix {
    let mut entries = vec![0.0; n * n];
    for j in 0..n {
        let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..1.0)).collect();
        let sum: f64 = raw.iter().sum();
        for i in 0..n {
            entries[i * n + j] = raw[i] / sum;
        }
    }
    NonnegMatrix::new(n, entries).expect("entries are positive")
}

/// Random pure-state density u u*.
pub fn pure_state(u: &[Complex64]) -> HermitianMatrix {
    let n = u.len();
    HermitianMatrix::new(ComplexMatrix::from_fn(n, n, |i, j| u[i] * u[j].conj()))
        .expect("outer product is Hermitian")
}

/// Hermitian square root helper for densities (used by the certificate).
pub(crate) fn density_sqrt(d: &DensityMatrix) -> HermitianMatrix {
    psd_sqrt(d.as_hermitian()).expect("density matrices are PSD")
}
