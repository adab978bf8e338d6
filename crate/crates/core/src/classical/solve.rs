//! Classical bridge solver: damped fixed-point iteration on the bridge
//! iteration map, followed by Newton refinement on the scaling root.
//!
//! Two linked unknowns appear. The iteration map has a fixed point x* (the
//! diagonal restriction of the quantum fixed point); the stochastic scaling
//! root y solves (scaling of A at y) * alpha = beta. They determine each
//! other exactly:
//!
//!   y  = normalize(beta / (A x*)),    x* = normalize(alpha / (A^T y)).
//!
//! When beta sits outside the reachable set the marginal residual still
//! drains to zero along iterates collapsing to the simplex boundary (the
//! map extends to the boundary and fixes boundary points), so a small
//! residual alone cannot certify a solution. The witness of collapse is
//! scaling degeneracy: the diagonal factors span the full f64 range while
//! a genuine interior solution keeps them within problem conditioning.
//! Convergence therefore additionally requires the scaling factors to stay
//! within a 1e12 dynamic range and the fixed point to be fixed in the
//! projective (Hilbert) metric, not just in l1.
//!
//! In the Schrödinger system u, v, x, y of the scaling equations, d1 plays
//! u and d2 the reciprocal of v = A^T d1; the auxiliary x, y of that system
//! are recovered as x = d2-scaled alpha and y = B x and are not stored.

use super::{
    bridge_jacobian, iteration_map, l1_distance, scaled_marginal, stochastic_scaling,
    NonnegMatrix, ProbVector, RealMatrix,
};
use crate::error::{Error, Result};
use crate::io::SolverConfig;

/// Hilbert-step ceiling for handing the iterate to Newton.
const HANDOFF_HILBERT: f64 = 1e-4;

/// Largest max/min ratio the diagonal scaling factors may span before the
/// solve is declared degenerate (boundary collapse). At the default
/// tolerance, residuals of scalings beyond this range carry no f64
/// information.
const SCALING_RANGE_LIMIT: f64 = 1e12;

/// Solved (or attempted) classical bridge.
///
/// `B = D(d1) A D(d2)` entrywise; on convergence B is column-stochastic and
/// `B alpha = beta` within the configured tolerance.
#[derive(Debug, Clone)]
pub struct ClassicalSolution {
    /// Fixed point of the bridge iteration map.
    pub x_star: ProbVector,
    /// The scaled bridge matrix.
    pub b: RealMatrix,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    /// l1 gap between the marginal image at the scaling root and beta,
    /// recomputed through the scaling map rather than from `b`.
    pub residual_map: f64,
    /// Max column-sum deviation of B from stochasticity.
    pub residual_stoch: f64,
    /// l1 gap between B alpha and beta.
    pub residual_bridge: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Fixed-point residual per iteration.
    pub trace: Vec<f64>,
}

/// Orthonormal basis of the zero-sum subspace, returned as the columns of
/// an n x (n-1) matrix (Helmert construction).
pub fn simplex_basis(n: usize) -> RealMatrix {
    let mut h = RealMatrix::zeros(n, n.saturating_sub(1));
    for k in 1..n {
        let scale = 1.0 / ((k * (k + 1)) as f64).sqrt();
        for i in 0..k {
            h[(i, k - 1)] = scale;
        }
        h[(k, k - 1)] = -(k as f64) * scale;
    }
    h
}

/// Hilbert projective distance between positive vectors:
/// max_i log(x_i / y_i) - min_i log(x_i / y_i).
pub(crate) fn vector_hilbert_distance(x: &[f64], y: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (&a, &b) in x.iter().zip(y.iter()) {
        let r = (a / b).ln();
        lo = lo.min(r);
        hi = hi.max(r);
    }
    hi - lo
}

/// Gaussian elimination with partial pivoting; None when singular.
pub(crate) fn solve_dense(mut a: RealMatrix, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    assert_eq!(a.n_rows(), n);
    assert_eq!(a.n_cols(), n);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[(i, col)].abs().partial_cmp(&a[(j, col)].abs()).expect("finite")
        })?;
        if a[(pivot, col)].abs() <= 1e-14 {
            return None;
        }
        if pivot != col {
            for j in 0..n {
                let tmp = a[(col, j)];
                a[(col, j)] = a[(pivot, j)];
                a[(pivot, j)] = tmp;
            }
            rhs.swap(col, pivot);
        }
        for row in (col + 1)..n {
            let factor = a[(row, col)] / a[(col, col)];
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[(row, j)] -= factor * a[(col, j)];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = rhs[row];
        for j in (row + 1)..n {
            acc -= a[(row, j)] * x[j];
        }
        x[row] = acc / a[(row, row)];
    }
    Some(x)
}

fn normalize(v: &[f64]) -> Vec<f64> {
    let sum: f64 = v.iter().sum();
    v.iter().map(|e| e / sum).collect()
}

fn ratio_normalized(num: &[f64], den: &[f64]) -> Vec<f64> {
    normalize(&num.iter().zip(den.iter()).map(|(&p, &q)| p / q).collect::<Vec<f64>>())
}

/// Newton steps on G(y) = scaled_marginal(y) - beta, restricted to the
/// zero-sum subspace. The Jacobian of the marginal map at y is
/// F(scaling(y), alpha) D(y)^{-1}; backtracking keeps y interior and the
/// residual monotone. Returns the number of steps taken.
fn newton_polish(
    a: &NonnegMatrix,
    alpha: &ProbVector,
    beta: &ProbVector,
    y: &mut Vec<f64>,
) -> usize {
    let n = a.n();
    let basis = simplex_basis(n);
    let mut steps = 0;
    let mut residual = match scaled_marginal(a, alpha, y) {
        Ok(g) => l1_distance(g.as_slice(), beta.as_slice()),
        Err(_) => return 0,
    };
    for _ in 0..25 {
        if residual <= 1e-15 * n as f64 {
            break;
        }
        let b = match stochastic_scaling(a, y) {
            Ok(b) => b,
            Err(_) => break,
        };
        let g: Vec<f64> = b
            .matvec(alpha.as_slice())
            .iter()
            .zip(beta.as_slice())
            .map(|(p, q)| p - q)
            .collect();
        let f = bridge_jacobian(&b, alpha);
        // Reduced system M dw = H^T g with M = H^T F D(y)^{-1} H.
        let mut m = RealMatrix::zeros(n - 1, n - 1);
        for k in 0..(n - 1) {
            let col: Vec<f64> = (0..n).map(|i| basis[(i, k)] / y[i]).collect();
            let jcol = f.matvec(&col);
            for l in 0..(n - 1) {
                m[(l, k)] = (0..n).map(|i| basis[(i, l)] * jcol[i]).sum();
            }
        }
        let rhs: Vec<f64> = (0..n - 1)
            .map(|l| (0..n).map(|i| basis[(i, l)] * g[i]).sum())
            .collect();
        let Some(dw) = solve_dense(m, rhs) else { break };
        let delta: Vec<f64> = (0..n)
            .map(|i| (0..n - 1).map(|k| basis[(i, k)] * dw[k]).sum())
            .collect();

        let mut step = 1.0;
        let mut accepted = false;
        while step >= 1e-8 {
            let candidate: Vec<f64> =
                y.iter().zip(delta.iter()).map(|(v, d)| v - step * d).collect();
            if candidate.iter().all(|&v| v > 0.0) {
                if let Ok(out) = scaled_marginal(a, alpha, &candidate) {
                    let new_residual = l1_distance(out.as_slice(), beta.as_slice());
                    if new_residual < residual {
                        *y = normalize(&candidate);
                        residual = new_residual;
                        accepted = true;
                        break;
                    }
                }
            }
            step *= 0.5;
        }
        steps += 1;
        if !accepted {
            break;
        }
    }
    steps
}

struct Attempt {
    y: Vec<f64>,
    x_star: Vec<f64>,
    bridge_res: f64,
    stoch_res: f64,
    fixed_point_step: f64,
    degenerate: bool,
    newton_steps: usize,
}

fn dynamic_range(v: &[f64]) -> f64 {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(0.0_f64, f64::max);
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Transport the Picard iterate to the scaling root, polish with Newton,
/// and measure everything the convergence verdict needs.
fn attempt_finish(
    a: &NonnegMatrix,
    alpha: &ProbVector,
    beta: &ProbVector,
    x: &[f64],
) -> Option<Attempt> {
    let v = a.as_matrix().matvec(x);
    let mut y = ratio_normalized(beta.as_slice(), &v);
    if y.iter().any(|&e| e <= 0.0 || !e.is_finite()) {
        return None;
    }
    let newton_steps = newton_polish(a, alpha, beta, &mut y);
    let b = stochastic_scaling(a, &y).ok()?;
    let bridge_res = l1_distance(&b.matvec(alpha.as_slice()), beta.as_slice());
    let stoch_res = b.column_sums().iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    let denom = a.as_matrix().tr_matvec(&y);
    let x_star = ratio_normalized(alpha.as_slice(), &denom);
    let fixed_point_step = match iteration_map(a, alpha, beta, &x_star) {
        Ok(nx) => vector_hilbert_distance(&x_star, &nx),
        Err(_) => f64::INFINITY,
    };
    let degenerate = dynamic_range(&y) > SCALING_RANGE_LIMIT
        || dynamic_range(&denom) > SCALING_RANGE_LIMIT
        || dynamic_range(&x_star) > SCALING_RANGE_LIMIT;
    Some(Attempt { y, x_star, bridge_res, stoch_res, fixed_point_step, degenerate, newton_steps })
}

/// Solve the classical bridge for A, alpha, beta.
///
/// Damped fixed-point iteration carries the solve into the Newton basin;
/// Newton on the scaling root then drives the bridge residuals to rounding
/// level. Non-convergence within the budget is reported via the `converged`
/// flag (infeasible-or-stuck; the method cannot certify infeasibility).
pub fn solve(
    a: &NonnegMatrix,
    alpha: &ProbVector,
    beta: &ProbVector,
    cfg: &SolverConfig,
) -> Result<ClassicalSolution> {
    let n = a.n();
    if alpha.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: alpha.n() });
    }
    if beta.n() != n {
        return Err(Error::DimensionMismatch { expected: n, got: beta.n() });
    }
    if a.structure().has_zero_col {
        return Err(Error::ZeroColumn);
    }
    if a.structure().has_zero_row {
        return Err(Error::ZeroRow);
    }
    if n == 1 {
        return Ok(ClassicalSolution {
            x_star: ProbVector::uniform(1),
            b: RealMatrix::identity(1),
            d1: vec![1.0 / a.as_matrix()[(0, 0)]],
            d2: vec![1.0],
            residual_map: 0.0,
            residual_stoch: 0.0,
            residual_bridge: 0.0,
            iterations: 0,
            converged: true,
            trace: Vec::new(),
        });
    }

    // A genuine fixed point sits at rounding level on the Hilbert step;
    // boundary collapse keeps it O(1).
    let genuine_step_tol = (10.0 * cfg.tol).max(1e-10);
    let mut handoff_tol = cfg.tol.max(1e-8);

    let mut x: Vec<f64> = ProbVector::uniform(n).as_slice().to_vec();
    let mut omega = cfg.damping.clamp(1.0 / 16.0, 1.0);
    let mut prev_res = f64::INFINITY;
    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut last_attempt: Option<Attempt> = None;

    while iterations < cfg.max_iter {
        let nx = match iteration_map(a, alpha, beta, &x) {
            Ok(nx) => nx,
            // Underflow to the boundary: stuck.
            Err(_) => break,
        };
        iterations += 1;
        let res = l1_distance(&nx, &x);
        let step = vector_hilbert_distance(&nx, &x);
        trace.push(res);
        if res > prev_res {
            omega = (omega / 2.0).max(1.0 / 16.0);
        }
        prev_res = res;
        if omega >= 1.0 {
            x = nx;
        } else {
            x = normalize(
                &x.iter()
                    .zip(nx.iter())
                    .map(|(old, new)| (1.0 - omega) * old + omega * new)
                    .collect::<Vec<f64>>(),
            );
        }

        if res <= handoff_tol && step <= HANDOFF_HILBERT {
            if let Some(attempt) = attempt_finish(a, alpha, beta, &x) {
                iterations += attempt.newton_steps;
                let done = attempt.bridge_res <= cfg.tol
                    && attempt.stoch_res <= cfg.tol
                    && attempt.fixed_point_step <= genuine_step_tol
                    && !attempt.degenerate;
                last_attempt = Some(attempt);
                if done {
                    break;
                }
            }
            // Not genuinely fixed yet: iterate further before retrying.
            handoff_tol = (handoff_tol * 1e-3).max(cfg.tol.min(1e-14));
        }
    }

    let attempt = match last_attempt {
        Some(att) => att,
        None => attempt_finish(a, alpha, beta, &x).ok_or(Error::ZeroTrace { trace: 0.0 })?,
    };

    let b = stochastic_scaling(a, &attempt.y)?;
    let denom = a.as_matrix().tr_matvec(&attempt.y);
    let d2: Vec<f64> = denom.iter().map(|e| 1.0 / e).collect();
    let residual_map = scaled_marginal(a, alpha, &attempt.y)
        .map(|g| l1_distance(g.as_slice(), beta.as_slice()))
        .unwrap_or(f64::INFINITY);
    let converged = attempt.bridge_res <= cfg.tol
        && attempt.stoch_res <= cfg.tol
        && attempt.fixed_point_step <= genuine_step_tol
        && !attempt.degenerate;

    Ok(ClassicalSolution {
        x_star: ProbVector::normalized(attempt.x_star)?,
        d1: attempt.y,
        d2,
        b,
        residual_map,
        residual_stoch: attempt.stoch_res,
        residual_bridge: attempt.bridge_res,
        iterations,
        converged,
        trace,
    })
}
