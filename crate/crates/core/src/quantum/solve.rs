//! Fixed-point solver for the bridge map, construction of the scaled
//! channel from a fixed point, the factorization certificate, and
//! multi-start uniqueness probing.

use super::generate::density_sqrt;
use super::{bridge_stages, KrausMap};
use crate::classical::solve_dense;
use crate::classical::RealMatrix;
use crate::error::{Error, Result};
use crate::linalg::{
    hilbert_distance, pd_inv_sqrt, pd_inverse, psd_sqrt, ComplexMatrix, DensityMatrix,
    HermitianMatrix,
};
use crate::io::SolverConfig;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

/// Solved (or attempted) quantum bridge.
#[derive(Debug, Clone)]
pub struct BridgeSolution {
    /// Fixed point of the bridge map.
    pub u: DensityMatrix,
    /// Left scaling factor S = W^{1/2} (Hermitian positive definite).
    pub s: ComplexMatrix,
    /// Right scaling factor T = t Z^{-1/2} (Hermitian positive definite).
    pub t: ComplexMatrix,
    /// Unitary alignment factor.
    pub o: ComplexMatrix,
    /// The scaled channel with Kraus operators O* S A_i T.
    pub r: KrausMap,
    /// || Phi(U) - U ||_F at the reported fixed point.
    pub residual_fixed: f64,
    /// || sum B_i* B_i - I ||_F of the scaled channel.
    pub residual_channel: f64,
    /// || R(alpha) - beta ||_F.
    pub residual_bridge: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Frobenius fixed-point residual per iteration.
    pub trace: Vec<f64>,
    /// Hilbert-metric step per iteration.
    pub hilbert_trace: Vec<f64>,
}

/// Scaling factors and scaled channel built from a fixed point.
#[derive(Debug, Clone)]
pub struct ScaledChannel {
    pub s: ComplexMatrix,
    pub t: ComplexMatrix,
    pub o: ComplexMatrix,
    pub r: KrausMap,
    /// Unitarity defect of the raw alignment factor before polar projection.
    pub o_defect: f64,
    pub residual_channel: f64,
    pub residual_bridge: f64,
}

/// Anderson mixing over flattened Hermitian iterates; falls back to the
/// plain update when the mixed candidate leaves the positive cone.
struct AndersonMixer {
    memory: usize,
    xs: VecDeque<Vec<f64>>,
    gs: VecDeque<Vec<f64>>,
}

fn flatten(m: &ComplexMatrix) -> Vec<f64> {
    m.entries().iter().flat_map(|z| [z.re, z.im]).collect()
}

fn unflatten(v: &[f64], n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |i, j| {
        let base = 2 * (i * n + j);
        num_complex::Complex64::new(v[base], v[base + 1])
    })
}

impl AndersonMixer {
    fn new(memory: usize) -> Self {
        Self { memory, xs: VecDeque::new(), gs: VecDeque::new() }
    }

    fn push(&mut self, x: Vec<f64>, g: Vec<f64>) {
        self.xs.push_back(x);
        self.gs.push_back(g);
        if self.xs.len() > self.memory {
            self.xs.pop_front();
            self.gs.pop_front();
        }
    }

    /// Type-II Anderson step from the stored history; None when history is
    /// too short or the least-squares system degenerates.
    #[allow(clippy::needless_range_loop)]
    fn candidate(&self, n: usize) -> Option<ComplexMatrix> {
        let m = self.xs.len();
        if m < 2 {
            return None;
        }
        let dim = self.xs[0].len();
        let f: Vec<Vec<f64>> = (0..m)
            .map(|k| (0..dim).map(|i| self.gs[k][i] - self.xs[k][i]).collect())
            .collect();
        let cols = m - 1;
        // df[:, k] = f_{k+1} - f_k
        let mut normal = RealMatrix::zeros(cols, cols);
        let mut rhs = vec![0.0; cols];
        for a in 0..cols {
            for b in 0..cols {
                let mut acc = 0.0;
                for i in 0..dim {
                    acc += (f[a + 1][i] - f[a][i]) * (f[b + 1][i] - f[b][i]);
                }
                normal[(a, b)] = acc;
            }
            let mut acc = 0.0;
            for i in 0..dim {
                acc += (f[a + 1][i] - f[a][i]) * f[m - 1][i];
            }
            rhs[a] = acc;
        }
        let ridge = 1e-12 * (0..cols).map(|a| normal[(a, a)]).fold(0.0, f64::max).max(1e-300);
        for a in 0..cols {
            normal[(a, a)] += ridge;
        }
        let gamma = solve_dense(normal, rhs)?;
        let mut out = self.gs[m - 1].clone();
        for (k, g) in gamma.iter().enumerate() {
            for i in 0..dim {
                out[i] -= g * (self.gs[k + 1][i] - self.gs[k][i]);
            }
        }
        Some(unflatten(&out, n))
    }
}

/// Solve the bridge fixed-point problem from the maximally mixed start,
/// then build the scaled channel. Honors `cfg.starts` by retrying from
/// seeded random densities when the primary start fails to converge.
pub fn solve(
    q: &KrausMap,
    alpha: &DensityMatrix,
    beta: &DensityMatrix,
    cfg: &SolverConfig,
) -> Result<BridgeSolution> {
    let mut attempt = solve_from(q, alpha, beta, &DensityMatrix::maximally_mixed(q.n()), cfg)?;
    let mut start = 1;
    while !attempt.converged && start < cfg.starts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(start as u64));
        let x0 = super::generate::wishart_density(q.n(), &mut rng);
        let retry = solve_from(q, alpha, beta, &x0, cfg)?;
        if retry.converged {
            return Ok(retry);
        }
        attempt = retry;
        start += 1;
    }
    Ok(attempt)
}

/// Picard iteration (optionally damped or Anderson-mixed) on the bridge map
/// from a caller-provided start. Stops when the Frobenius residual falls
/// under `tol` AND the Hilbert step under `10 * tol`; the Frobenius norm
/// alone can stall near-singular iterates.
pub fn solve_from(
    q: &KrausMap,
    alpha: &DensityMatrix,
    beta: &DensityMatrix,
    x0: &DensityMatrix,
    cfg: &SolverConfig,
) -> Result<BridgeSolution> {
    let n = q.n();
    if alpha.n() != n || beta.n() != n || x0.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: alpha.n().max(beta.n()).max(x0.n()) });
    }
    let mut x = x0.clone();
    let mut trace = Vec::new();
    let mut hilbert_trace = Vec::new();
    let mut anderson = cfg.anderson.then(|| AndersonMixer::new(5));
    let mut iterations = 0;
    let mut converged = false;
    let mut residual_fixed = f64::INFINITY;
    let mut last_stages = None;

    while iterations < cfg.max_iter {
        let stages = bridge_stages(q, alpha, beta, &x)?;
        iterations += 1;
        let phi = stages.next.clone();
        residual_fixed = phi.frobenius_distance(&x);
        let step = hilbert_distance(phi.as_hermitian(), x.as_hermitian()).unwrap_or(f64::INFINITY);
        trace.push(residual_fixed);
        hilbert_trace.push(step);
        last_stages = Some(stages);
        if residual_fixed <= cfg.tol && step <= 10.0 * cfg.tol {
            converged = true;
            break;
        }

        // Next iterate: Anderson when enabled, else damped Picard.
        let mut next: Option<DensityMatrix> = None;
        if let Some(mixer) = anderson.as_mut() {
            mixer.push(flatten(x.as_matrix()), flatten(phi.as_matrix()));
            if let Some(candidate) = mixer.candidate(n) {
                if let Ok(h) = HermitianMatrix::new(candidate) {
                    if let Ok(d) = DensityMatrix::new_pd(h) {
                        next = Some(d);
                    }
                }
            }
        }
        let next = match next {
            Some(d) => d,
            None if cfg.damping < 1.0 => {
                let mixed = x
                    .as_hermitian()
                    .scale_re(1.0 - cfg.damping)
                    .add(&phi.as_hermitian().scale_re(cfg.damping));
                DensityMatrix::new_pd(mixed)?
            }
            None => phi,
        };
        x = next;
    }

    // On the converged path the stages belong to the reported iterate; a
    // budget exit leaves them one step behind, so recompute at x.
    let stages = match last_stages {
        Some(s) if converged => s,
        _ => bridge_stages(q, alpha, beta, &x)?,
    };
    let scaled = build_scaled_channel_from_stages(q, alpha, beta, &stages)?;
    let converged = converged
        && scaled.residual_channel <= 100.0 * cfg.tol
        && scaled.residual_bridge <= 100.0 * cfg.tol;
    Ok(BridgeSolution {
        u: x,
        s: scaled.s,
        t: scaled.t,
        o: scaled.o,
        r: scaled.r,
        residual_fixed,
        residual_channel: scaled.residual_channel,
        residual_bridge: scaled.residual_bridge,
        iterations,
        converged,
        trace,
        hilbert_trace,
    })
}

/// Build the scaled channel R(X) = O* S Q(T X T) S O from an (approximate)
/// fixed point U:
///   V = Q(U), W = whiten_beta(V), Z = normalized_dual(W),
///   t = 1/sqrt(tr Q'(W)), T = t Z^{-1/2}, S = W^{1/2},
///   O = (1/sqrt(tr V^{-1} beta)) W^{-1/2} V^{-1/2} beta^{1/2},
/// with O polar-projected to the nearest unitary before assembling the
/// Kraus operators O* S A_i T.
pub fn build_scaled_channel(
    q: &KrausMap,
    alpha: &DensityMatrix,
    beta: &DensityMatrix,
    u: &DensityMatrix,
) -> Result<ScaledChannel> {
    let stages = bridge_stages(q, alpha, beta, u)?;
    build_scaled_channel_from_stages(q, alpha, beta, &stages)
}

fn build_scaled_channel_from_stages(
    q: &KrausMap,
    alpha: &DensityMatrix,
    beta: &DensityMatrix,
    stages: &super::BridgeStages,
) -> Result<ScaledChannel> {
    let n = q.n();
    let v = &stages.v;
    let w = stages.w.as_hermitian();
    let z = stages.z.as_hermitian();

    let qw = q.apply_dual(w)?;
    let tr_qw = qw.trace();
    if tr_qw <= crate::linalg::EPS_PD {
        return Err(Error::ZeroTrace { trace: tr_qw });
    }
    let t_scalar = 1.0 / tr_qw.sqrt();
    let t_mat = pd_inv_sqrt(z)?.scale_re(t_scalar);
    let s_mat = psd_sqrt(w)?;

    let v_inv = pd_inverse(v)?;
    let tr_vinv_beta = (v_inv.as_matrix() * beta.as_matrix()).trace().re;
    if tr_vinv_beta <= 0.0 {
        return Err(Error::ZeroTrace { trace: tr_vinv_beta });
    }
    let r_scalar = 1.0 / tr_vinv_beta.sqrt();
    let w_inv_sqrt = pd_inv_sqrt(w)?;
    let v_inv_sqrt = pd_inv_sqrt(v)?;
    let beta_sqrt = density_sqrt(beta);
    let o_raw = (&(w_inv_sqrt.as_matrix() * v_inv_sqrt.as_matrix()) * beta_sqrt.as_matrix())
        .scale_re(r_scalar);

    let o_defect = (&o_raw * &o_raw.adjoint()).frobenius_distance(&ComplexMatrix::identity(n));
    if o_defect > 1e-6 {
        return Err(Error::NotUnitary { defect: o_defect });
    }
    let o = polar_unitary(&o_raw)?;

    let o_adj_s = &o.adjoint() * s_mat.as_matrix();
    let kraus: Vec<ComplexMatrix> = q
        .kraus()
        .iter()
        .map(|a_i| &(&o_adj_s * a_i) * t_mat.as_matrix())
        .collect();
    let r = KrausMap::new(kraus)?;
    let residual_channel = r.channel_defect();
    let image = r.apply(alpha.as_hermitian())?;
    let residual_bridge = image.frobenius_distance(beta.as_hermitian());

    Ok(ScaledChannel {
        s: s_mat.into_matrix(),
        t: t_mat.into_matrix(),
        o,
        r,
        o_defect,
        residual_channel,
        residual_bridge,
    })
}

/// Nearest unitary (polar factor) of an invertible matrix:
/// M (M* M)^{-1/2}.
fn polar_unitary(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let gram = HermitianMatrix::new(&m.adjoint() * m)?;
    let inv_sqrt = pd_inv_sqrt(&gram)?;
    Ok(m * inv_sqrt.as_matrix())
}

/// Certificate that the converged solve factorizes the marginals through
/// the channel, in the form of the four potentials and two factors:
///   phi_T = T alpha T,         phi_0 = S^{-1} O beta O* S^{-1},
///   phihat_0 = S^2,            phihat_T = T^{-2},
///   chi_0 = beta^{1/2} O* S^{-1},   chi_T = alpha^{1/2} T,
/// satisfying Q(phi_T) = phi_0, Q'(phihat_0) = phihat_T, the rho
/// reconstructions and the Gram relations.
#[derive(Debug, Clone)]
pub struct ScalingCertificate {
    pub phi_0: HermitianMatrix,
    pub phi_t: HermitianMatrix,
    pub phihat_0: HermitianMatrix,
    pub phihat_t: HermitianMatrix,
    pub chi_0: ComplexMatrix,
    pub chi_t: ComplexMatrix,
    pub residuals: CertificateResiduals,
}

/// Frobenius residuals of the six certificate relations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateResiduals {
    /// || Q(phi_T) - phi_0 ||_F
    pub transport: f64,
    /// || Q'(phihat_0) - phihat_T ||_F
    pub dual_transport: f64,
    /// || rho_0 - chi_0 phihat_0 chi_0* ||_F
    pub rho_0: f64,
    /// || rho_T - chi_T phihat_T chi_T* ||_F
    pub rho_t: f64,
    /// || phi_0 - chi_0* chi_0 ||_F
    pub gram_0: f64,
    /// || phi_T - chi_T* chi_T ||_F
    pub gram_t: f64,
}

impl CertificateResiduals {
    pub fn max(&self) -> f64 {
        [self.transport, self.dual_transport, self.rho_0, self.rho_t, self.gram_0, self.gram_t]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// Build the factorization certificate from a converged solve. The solve
/// must have been run with alpha = rho_T and beta = rho_0.
pub fn scaling_certificate(
    q: &KrausMap,
    rho_0: &DensityMatrix,
    rho_t: &DensityMatrix,
    sol: &BridgeSolution,
) -> Result<ScalingCertificate> {
    if !sol.converged {
        return Err(Error::NotConverged);
    }
    let alpha = rho_t;
    let beta = rho_0;
    let s = HermitianMatrix::new(sol.s.clone())?;
    let t = HermitianMatrix::new(sol.t.clone())?;
    let s_inv = pd_inverse(&s)?;
    let t_inv = pd_inverse(&t)?;

    let phi_t = alpha.as_hermitian().conjugate_by(t.as_matrix());
    let s_inv_o = &(s_inv.as_matrix().clone()) * &sol.o;
    let phi_0 = beta.as_hermitian().conjugate_by(&s_inv_o);
    let phihat_0 = HermitianMatrix::new(s.as_matrix() * s.as_matrix())?;
    let phihat_t = HermitianMatrix::new(t_inv.as_matrix() * t_inv.as_matrix())?;
    let chi_0 = &(density_sqrt(beta).as_matrix() * &sol.o.adjoint()) * s_inv.as_matrix();
    let chi_t = density_sqrt(alpha).as_matrix() * t.as_matrix();

    let transport = q.apply(&phi_t)?.frobenius_distance(&phi_0);
    let dual_transport = q.apply_dual(&phihat_0)?.frobenius_distance(&phihat_t);
    let rho_0_res = phihat_0
        .conjugate_by(&chi_0)
        .frobenius_distance(beta.as_hermitian());
    let rho_t_res = phihat_t
        .conjugate_by(&chi_t)
        .frobenius_distance(alpha.as_hermitian());
    let gram_0 = HermitianMatrix::new(&chi_0.adjoint() * &chi_0)?.frobenius_distance(&phi_0);
    let gram_t = HermitianMatrix::new(&chi_t.adjoint() * &chi_t)?.frobenius_distance(&phi_t);

    Ok(ScalingCertificate {
        phi_0,
        phi_t,
        phihat_0,
        phihat_t,
        chi_0,
        chi_t,
        residuals: CertificateResiduals {
            transport,
            dual_transport,
            rho_0: rho_0_res,
            rho_t: rho_t_res,
            gram_0,
            gram_t,
        },
    })
}

/// One cluster of numerically coincident fixed points.
#[derive(Debug, Clone)]
pub struct ProbeCluster {
    pub representative: DensityMatrix,
    pub count: usize,
}

/// Outcome of a multi-start uniqueness probe.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub clusters: Vec<ProbeCluster>,
    pub non_converged: usize,
    pub starts: usize,
}

/// Run the solver from `starts` seeded Wishart starts and cluster the
/// converged fixed points by Frobenius distance. Start k derives its seed
/// as seed + k and the fixed points are sorted canonically before
/// clustering, so the report does not depend on execution order.
pub fn probe_uniqueness(
    q: &KrausMap,
    alpha: &DensityMatrix,
    beta: &DensityMatrix,
    starts: usize,
    cfg: &SolverConfig,
    seed: u64,
) -> Result<ProbeReport> {
    assert!(starts >= 1, "need at least one start");
    let mut fixed_points = Vec::new();
    let mut non_converged = 0;
    for k in 0..starts {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
        let x0 = super::generate::wishart_density(q.n(), &mut rng);
        match solve_from(q, alpha, beta, &x0, cfg) {
            Ok(sol) if sol.converged => fixed_points.push(sol.u),
            Ok(_) => non_converged += 1,
            Err(_) => non_converged += 1,
        }
    }

    // Canonical order: index-weighted diagonal trace, then rounded entries.
    fixed_points.sort_by(|a, b| canonical_key(a).partial_cmp(&canonical_key(b)).expect("finite"));

    let threshold = 10.0 * cfg.tol.sqrt();
    let mut clusters: Vec<ProbeCluster> = Vec::new();
    for u in fixed_points {
        match clusters
            .iter_mut()
            .find(|c| c.representative.frobenius_distance(&u) <= threshold)
        {
            Some(cluster) => cluster.count += 1,
            None => clusters.push(ProbeCluster { representative: u, count: 1 }),
        }
    }
    Ok(ProbeReport { clusters, non_converged, starts })
}

fn canonical_key(u: &DensityMatrix) -> Vec<f64> {
    let n = u.n();
    let weighted: f64 = (0..n).map(|i| (i + 1) as f64 * u.as_matrix()[(i, i)].re).sum();
    let mut key = vec![weighted];
    key.extend(u.as_matrix().entries().iter().flat_map(|z| {
        [(z.re * 1e9).round() / 1e9, (z.im * 1e9).round() / 1e9]
    }));
    key
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{
        depolarizing_channel, diagonal_embedding, random_channel, random_density,
        random_unital_channel,
    };
    use rand::SeedableRng;

    fn cfg() -> SolverConfig {
        SolverConfig::default()
    }

    #[test]
    fn unital_mixed_marginals_fix_instantly() {
        let q = random_unital_channel(3, 3, 0.3, 1);
        let mixed = DensityMatrix::maximally_mixed(3);
        let sol = solve(&q, &mixed, &mixed, &cfg()).unwrap();
        assert!(sol.converged);
        assert!(sol.iterations <= 2);
        assert!(sol.u.frobenius_distance(&mixed) <= 1e-12);
    }

    #[test]
    fn depolarizing_bridge_converges() {
        let q = depolarizing_channel(2, 0.5);
        let alpha = DensityMatrix::from_positive_diag(&[0.7, 0.3]).unwrap();
        let beta = DensityMatrix::from_positive_diag(&[0.2, 0.8]).unwrap();
        let sol = solve(&q, &alpha, &beta, &cfg()).unwrap();
        assert!(sol.converged);
        assert!(sol.residual_bridge <= 1e-8);
        assert!(sol.residual_channel <= 1e-9);
        // Independent verification through the channel.
        let image = sol.r.apply(alpha.as_hermitian()).unwrap();
        assert!(image.frobenius_distance(beta.as_hermitian()) <= 1e-8);
    }

    #[test]
    fn diagonal_embedding_matches_classical_fixed_point() {
        use crate::classical::{self, NonnegMatrix, ProbVector};
        let a = NonnegMatrix::from_rows(&[
            &[0.5, 0.25, 0.4],
            &[0.3, 0.25, 0.35],
            &[0.2, 0.5, 0.25],
        ])
        .unwrap();
        let q = diagonal_embedding(&a).unwrap();
        let alpha = ProbVector::new(vec![0.2, 0.3, 0.5]).unwrap();
        let beta = ProbVector::new(vec![0.5, 0.2, 0.3]).unwrap();
        let classical_sol =
            classical::solve(&a, &alpha, &beta, &SolverConfig::default()).unwrap();
        assert!(classical_sol.converged);

        let sol = solve(
            &q,
            &DensityMatrix::from_positive_diag(alpha.as_slice()).unwrap(),
            &DensityMatrix::from_positive_diag(beta.as_slice()).unwrap(),
            &cfg(),
        )
        .unwrap();
        assert!(sol.converged);
        for (quantum, classical) in sol.u.diagonal().iter().zip(classical_sol.x_star.as_slice()) {
            assert!((quantum - classical).abs() <= 1e-8);
        }
    }

    #[test]
    fn scaled_channel_factors_are_positive_and_unitary() {
        let q = random_channel(3, 4, 0.3, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let alpha = random_density(3, 0.1, &mut rng);
        let beta = random_density(3, 0.1, &mut rng);
        let sol = solve(&q, &alpha, &beta, &cfg()).unwrap();
        assert!(sol.converged);

        // O unitary after projection, and nearly so before.
        let o_gram = &sol.o * &sol.o.adjoint();
        assert!(o_gram.frobenius_distance(&ComplexMatrix::identity(3)) <= 1e-12);
        let rebuilt = build_scaled_channel(&q, &alpha, &beta, &sol.u).unwrap();
        assert!(rebuilt.o_defect <= 1e-8);

        // S, T Hermitian positive definite.
        for factor in [&sol.s, &sol.t] {
            let h = HermitianMatrix::new(factor.clone()).unwrap();
            assert!(h.frobenius_distance(&HermitianMatrix::new(factor.clone()).unwrap()) == 0.0);
            let eig = crate::linalg::hermitian_eig(&h).unwrap();
            assert!(eig.lambda_min() > 0.0);
        }

        // The scaled channel is trace preserving: R'(I) = I.
        let id = HermitianMatrix::identity(3);
        let dual_id = sol.r.apply_dual(&id).unwrap();
        assert!(dual_id.frobenius_distance(&id) <= 100.0 * cfg().tol);
    }

    #[test]
    fn unital_mixed_case_scaling_is_trivial() {
        // alpha = beta = I/n with a unital channel: U = I/n and S, T come
        // out proportional to the identity, O to a phase.
        let q = random_unital_channel(2, 3, 0.4, 17);
        let mixed = DensityMatrix::maximally_mixed(2);
        let sol = solve(&q, &mixed, &mixed, &cfg()).unwrap();
        assert!(sol.converged);
        let s00 = sol.s[(0, 0)];
        let t00 = sol.t[(0, 0)];
        assert!(sol.s.frobenius_distance(&ComplexMatrix::identity(2).scale(s00)) <= 1e-9);
        assert!(sol.t.frobenius_distance(&ComplexMatrix::identity(2).scale(t00)) <= 1e-9);
        let o00 = sol.o[(0, 0)];
        assert!((o00.norm() - 1.0).abs() <= 1e-9);
        assert!(sol.o.frobenius_distance(&ComplexMatrix::identity(2).scale(o00)) <= 1e-8);
    }

    #[test]
    fn certificate_residuals_vanish_on_converged_solves() {
        let q = random_channel(3, 3, 0.25, 29);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let rho_t = random_density(3, 0.1, &mut rng);
        let rho_0 = random_density(3, 0.1, &mut rng);
        // Certificate convention: solve with alpha = rho_T, beta = rho_0.
        let sol = solve(&q, &rho_t, &rho_0, &cfg()).unwrap();
        assert!(sol.converged);
        let cert = scaling_certificate(&q, &rho_0, &rho_t, &sol).unwrap();
        assert!(cert.residuals.max() <= 1e-8, "residuals: {:?}", cert.residuals);
    }

    #[test]
    fn certificate_identity_channel_equal_marginals() {
        let q = KrausMap::new(vec![ComplexMatrix::identity(2)]).unwrap();
        let rho = DensityMatrix::from_positive_diag(&[0.6, 0.4]).unwrap();
        let sol = solve(&q, &rho, &rho, &cfg()).unwrap();
        assert!(sol.converged);
        let cert = scaling_certificate(&q, &rho, &rho, &sol).unwrap();
        assert!(cert.residuals.max() <= 1e-9);
        assert!(cert.phi_0.frobenius_distance(&cert.phi_t) <= 1e-9);
    }

    #[test]
    fn certificate_requires_convergence() {
        let q = random_channel(2, 2, 0.3, 31);
        let alpha = DensityMatrix::maximally_mixed(2);
        let mut config = cfg();
        config.max_iter = 1;
        config.tol = 1e-16;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let beta = random_density(2, 0.1, &mut rng);
        let sol = solve(&q, &alpha, &beta, &config).unwrap();
        if !sol.converged {
            assert!(matches!(
                scaling_certificate(&q, &beta, &alpha, &sol),
                Err(Error::NotConverged)
            ));
        }
    }

    #[test]
    fn probe_unital_mixed_is_unique() {
        let q = random_unital_channel(2, 3, 0.3, 41);
        let mixed = DensityMatrix::maximally_mixed(2);
        let report = probe_uniqueness(&q, &mixed, &mixed, 8, &cfg(), 7).unwrap();
        assert_eq!(report.non_converged, 0);
        assert_eq!(report.clusters.len(), 1);
        assert_eq!(report.clusters[0].count, 8);
        assert!(report.clusters[0].representative.frobenius_distance(&mixed) <= 1e-9);
    }

    #[test]
    fn probe_single_start_single_cluster() {
        let q = random_channel(2, 2, 0.4, 43);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let alpha = random_density(2, 0.1, &mut rng);
        let beta = random_density(2, 0.1, &mut rng);
        let report = probe_uniqueness(&q, &alpha, &beta, 1, &cfg(), 3).unwrap();
        assert!(report.clusters.len() + report.non_converged == 1);
    }

    #[test]
    fn probe_is_deterministic() {
        let q = random_channel(3, 3, 0.3, 47);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let alpha = random_density(3, 0.1, &mut rng);
        let beta = random_density(3, 0.1, &mut rng);
        let r1 = probe_uniqueness(&q, &alpha, &beta, 4, &cfg(), 99).unwrap();
        let r2 = probe_uniqueness(&q, &alpha, &beta, 4, &cfg(), 99).unwrap();
        assert_eq!(r1.clusters.len(), r2.clusters.len());
        for (c1, c2) in r1.clusters.iter().zip(r2.clusters.iter()) {
            assert_eq!(c1.count, c2.count);
            assert!(c1.representative.frobenius_distance(&c2.representative) == 0.0);
        }
    }

    #[test]
    fn anderson_reaches_the_same_fixed_point() {
        let q = random_channel(3, 3, 0.25, 53);
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let alpha = random_density(3, 0.1, &mut rng);
        let beta = random_density(3, 0.1, &mut rng);
        let plain = solve(&q, &alpha, &beta, &cfg()).unwrap();
        let mut accel = cfg();
        accel.anderson = true;
        let mixed = solve(&q, &alpha, &beta, &accel).unwrap();
        assert!(plain.converged && mixed.converged);
        assert!(plain.u.frobenius_distance(&mixed.u) <= 1e-8);
    }

    #[test]
    fn damping_converges_too() {
        let q = depolarizing_channel(2, 0.6);
        let alpha = DensityMatrix::from_positive_diag(&[0.55, 0.45]).unwrap();
        let beta = DensityMatrix::from_positive_diag(&[0.35, 0.65]).unwrap();
        let mut config = cfg();
        config.damping = 0.7;
        let sol = solve(&q, &alpha, &beta, &config).unwrap();
        assert!(sol.converged);
        assert!(sol.residual_bridge <= 1e-8);
    }
}
