//! Command implementations. Every function returns the process exit code
//! (0 success, 2 no convergence / failed verification) or a classified
//! failure (1 usage, 3 validation, 4 numerical).

use crate::output::{self, kv};
use crate::Format;
use bridgescale_core::classical::{self, iteration_map, l1_distance};
use bridgescale_core::io::{
    self, ClassicalInstance, Instance, QuantumInstance, Solution, SolverConfig, StoredSolution,
};
use bridgescale_core::linalg::{ComplexMatrix, DensityMatrix, HermitianMatrix};
use bridgescale_core::quantum::{self, KrausMap};
use bridgescale_core::Error;
use std::path::Path;

pub struct Failure {
    pub exit: u8,
    pub code: &'static str,
    pub message: String,
}

impl Failure {
    fn usage(message: String) -> Self {
        Failure { exit: 1, code: "USAGE", message }
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let exit = match &err {
            Error::Parse(_)
            | Error::Validation(_)
            | Error::DimensionMismatch { .. }
            | Error::ZeroRow
            | Error::ZeroColumn
            | Error::NotStochastic { .. }
            | Error::TargetMismatch { .. }
            | Error::BandInvalid { .. }
            | Error::NotUnital => 3,
            Error::NotConverged => 2,
            Error::NonFiniteInput
            | Error::NotPsd { .. }
            | Error::NotPd { .. }
            | Error::NotPositive { .. }
            | Error::NotUnitary { .. }
            | Error::ZeroTrace { .. } => 4,
        };
        Failure { exit, code: err.code(), message: err.to_string() }
    }
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::usage(format!("cannot read {}: {e}", path.display())))
}

fn env_seed() -> Option<u64> {
    std::env::var("BRIDGESCALE_SEED").ok().and_then(|s| s.parse().ok())
}

/// Effective seed: --seed flag, then BRIDGESCALE_SEED, then the instance
/// config (or zero).
fn resolve_seed(flag: Option<u64>, config_seed: u64) -> u64 {
    flag.or_else(env_seed).unwrap_or(config_seed)
}

pub struct SolveFlags {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub seed: Option<u64>,
    pub starts: Option<usize>,
    pub damping: Option<f64>,
    pub anderson: bool,
    pub certificate: bool,
    pub format: Format,
}

fn merge_config(base: &SolverConfig, flags: &SolveFlags) -> Result<SolverConfig, Failure> {
    let cfg = SolverConfig {
        tol: flags.tol.unwrap_or(base.tol),
        max_iter: flags.max_iter.unwrap_or(base.max_iter),
        damping: flags.damping.unwrap_or(base.damping),
        seed: resolve_seed(flags.seed, base.seed),
        starts: flags.starts.unwrap_or(base.starts),
        anderson: flags.anderson || base.anderson,
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn solve(path: &Path, flags: SolveFlags) -> Result<u8, Failure> {
    let instance = io::parse_instance(&read_file(path)?)?;
    let cfg = merge_config(instance.config(), &flags)?;
    match instance {
        Instance::Classical(inst) => {
            if flags.certificate {
                return Err(Failure::usage(
                    "--certificate applies to quantum instances only".into(),
                ));
            }
            let sol = classical::solve(&inst.a, &inst.alpha, &inst.beta, &cfg)?;
            match flags.format {
                Format::Json => {
                    print!("{}", io::serialize_solution(&Solution::Classical(&sol, &cfg)))
                }
                Format::Text => print!("{}", output::classical_text(&sol)),
            }
            Ok(if sol.converged { 0 } else { 2 })
        }
        Instance::Quantum(inst) => {
            let sol = quantum::solve(&inst.q, &inst.alpha, &inst.beta, &cfg)?;
            let mut exit = if sol.converged { 0 } else { 2 };
            match flags.format {
                Format::Json => {
                    if flags.certificate {
                        if sol.converged {
                            // Certificate assignment: alpha plays rho_T, beta rho_0.
                            let cert = quantum::scaling_certificate(
                                &inst.q,
                                &inst.beta,
                                &inst.alpha,
                                &sol,
                            )?;
                            let doc = serde_json::json!({
                                "solution": io::solution_value(&Solution::Quantum(&sol, &cfg)),
                                "certificate": io::solution_value(&Solution::Certificate(&cert)),
                            });
                            println!("{}", serde_json::to_string_pretty(&doc).expect("serializes"));
                        } else {
                            exit = 2;
                            print!("{}", io::serialize_solution(&Solution::Quantum(&sol, &cfg)));
                        }
                    } else {
                        print!("{}", io::serialize_solution(&Solution::Quantum(&sol, &cfg)));
                    }
                }
                Format::Text => print!("{}", output::quantum_text(&sol)),
            }
            Ok(exit)
        }
    }
}

struct Check {
    name: &'static str,
    value: f64,
    bound: f64,
}

impl Check {
    fn pass(&self) -> bool {
        self.value <= self.bound
    }
}

fn print_verification(checks: &[Check]) -> u8 {
    let all_pass = checks.iter().all(Check::pass);
    let doc = serde_json::json!({
        "kind": "verification",
        "pass": all_pass,
        "checks": checks.iter().map(|c| serde_json::json!({
            "name": c.name,
            "value": c.value,
            "bound": c.bound,
            "pass": c.pass(),
        })).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("serializes"));
    if all_pass {
        0
    } else {
        2
    }
}

/// Recompute all residuals of a stored solution from the instance payload;
/// stored residual fields are never trusted.
pub fn verify(solution_path: &Path, instance_path: &Path) -> Result<u8, Failure> {
    let stored = io::parse_solution(&read_file(solution_path)?)?;
    let instance = io::parse_instance(&read_file(instance_path)?)?;
    if stored.n() != instance.n() {
        return Err(Error::DimensionMismatch { expected: instance.n(), got: stored.n() }.into());
    }
    match (stored, instance) {
        (StoredSolution::Classical(sol), Instance::Classical(inst)) => {
            verify_classical(&sol, &inst)
        }
        (StoredSolution::Quantum(sol), Instance::Quantum(inst)) => verify_quantum(&sol, &inst),
        _ => Err(Error::Validation("solution and instance kinds differ".into()).into()),
    }
}

fn verify_classical(
    sol: &io::StoredClassicalSolution,
    inst: &ClassicalInstance,
) -> Result<u8, Failure> {
    let n = sol.n;
    let tol = sol.config.tol;
    let a = inst.a.as_matrix();

    // B must be exactly the scaling of A by d1, d2 (relative, entrywise),
    // with the same positivity pattern.
    let mut scaling_defect = 0.0_f64;
    let mut pattern_defect = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let recon = sol.d1[i] * a[(i, j)] * sol.d2[j];
            let b = sol.b[(i, j)];
            scaling_defect = scaling_defect.max((recon - b).abs() / b.abs().max(1e-300));
            if (b > 0.0) != (a[(i, j)] > 0.0) {
                pattern_defect = 1.0;
            }
        }
    }
    let stoch = sol.b.column_sums().iter().map(|s| (s - 1.0).abs()).fold(0.0, f64::max);
    let bridge = l1_distance(&sol.b.matvec(inst.alpha.as_slice()), inst.beta.as_slice());
    let fixed_point = match iteration_map(&inst.a, &inst.alpha, &inst.beta, &sol.x_star) {
        Ok(nx) => l1_distance(&nx, &sol.x_star),
        Err(_) => f64::INFINITY,
    };
    let checks = [
        Check { name: "scaling_reconstruction", value: scaling_defect, bound: 1e-10 },
        Check { name: "pattern_match", value: pattern_defect, bound: 0.0 },
        Check { name: "residual_stoch", value: stoch, bound: tol },
        Check { name: "residual_bridge", value: bridge, bound: tol },
        Check { name: "fixed_point", value: fixed_point, bound: 100.0 * tol },
        Check { name: "claimed_converged", value: if sol.converged { 0.0 } else { 1.0 }, bound: 0.0 },
    ];
    Ok(print_verification(&checks))
}

fn verify_quantum(sol: &io::StoredQuantumSolution, inst: &QuantumInstance) -> Result<u8, Failure> {
    let n = sol.n;
    let tol = sol.config.tol;

    // Kraus reconstruction: R_i must equal O* S A_i T.
    let o_adj_s = &sol.o.adjoint() * &sol.s;
    let mut kraus_defect = 0.0_f64;
    if sol.r.len() != inst.q.kraus().len() {
        kraus_defect = f64::INFINITY;
    } else {
        for (r_i, a_i) in sol.r.iter().zip(inst.q.kraus()) {
            let recon = &(&o_adj_s * a_i) * &sol.t;
            kraus_defect = kraus_defect.max(recon.frobenius_distance(r_i));
        }
    }
    let unitary_defect =
        (&sol.o * &sol.o.adjoint()).frobenius_distance(&ComplexMatrix::identity(n));

    let r = KrausMap::new(sol.r.clone())?;
    let channel = r.channel_defect();
    let image = r.apply(inst.alpha.as_hermitian())?;
    let bridge = image.frobenius_distance(inst.beta.as_hermitian());

    // Fixed-point residual of the stored U under the instance map.
    let fixed = HermitianMatrix::new(sol.u.clone())
        .and_then(DensityMatrix::new_pd)
        .and_then(|u| {
            quantum::bridge_map(&inst.q, &inst.alpha, &inst.beta, &u)
                .map(|phi| phi.frobenius_distance(&u))
        })
        .unwrap_or(f64::INFINITY);

    let checks = [
        Check { name: "kraus_reconstruction", value: kraus_defect, bound: 1e-9 },
        Check { name: "unitary_factor", value: unitary_defect, bound: 1e-9 },
        Check { name: "residual_fixed", value: fixed, bound: tol },
        Check { name: "residual_channel", value: channel, bound: 100.0 * tol },
        Check { name: "residual_bridge", value: bridge, bound: 100.0 * tol },
        Check { name: "claimed_converged", value: if sol.converged { 0.0 } else { 1.0 }, bound: 0.0 },
    ];
    Ok(print_verification(&checks))
}

pub fn gen(kind: &str, n: usize, k: usize, positivity: f64, seed: Option<u64>) -> Result<u8, Failure> {
    if n == 0 || n > io::MAX_DIMENSION {
        return Err(Failure::usage(format!("--n must be in 1..={}", io::MAX_DIMENSION)));
    }
    if k == 0 {
        return Err(Failure::usage("--k must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&positivity) {
        return Err(Failure::usage("--positivity must lie in [0, 1]".into()));
    }
    let seed = resolve_seed(seed, 0);
    let config = SolverConfig { seed, ..Default::default() };
    let instance = match kind {
        "classical" => {
            use rand::Rng;
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let entries: Vec<f64> = (0..n * n).map(|_| rng.gen_range(0.1..1.0)).collect();
            let a = classical::NonnegMatrix::new(n, entries)?;
            let alpha = random_prob(n, &mut rng);
            let beta = random_prob(n, &mut rng);
            Instance::Classical(ClassicalInstance { a, alpha, beta, config })
        }
        "quantum" => {
            use rand::SeedableRng;
            let q = quantum::random_channel(n, k, positivity, seed);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
            let alpha = quantum::random_density(n, 0.1, &mut rng);
            let beta = quantum::random_density(n, 0.1, &mut rng);
            Instance::Quantum(QuantumInstance { q, alpha, beta, config })
        }
        other => {
            return Err(Failure::usage(format!("--kind must be classical or quantum, got {other}")))
        }
    };
    print!("{}", io::serialize_instance(&instance));
    Ok(0)
}

fn random_prob(n: usize, rng: &mut rand_chacha::ChaCha8Rng) -> classical::ProbVector {
    use rand::Rng;
    classical::ProbVector::normalized((0..n).map(|_| rng.gen_range(0.3..1.2)).collect())
        .expect("entries are positive")
}

pub fn diagnose(
    path: &Path,
    samples: usize,
    refine: usize,
    seed: Option<u64>,
    format: Format,
) -> Result<u8, Failure> {
    let instance = io::parse_instance(&read_file(path)?)?;
    let Instance::Quantum(inst) = instance else {
        return Err(Error::Validation("diagnose needs a quantum instance".into()).into());
    };
    if samples == 0 {
        return Err(Failure::usage("--samples must be at least 1".into()));
    }
    let seed = resolve_seed(seed, inst.config.seed);
    let est = quantum::estimate_positivity(&inst.q, samples, refine, seed);
    let positive_evidence = est.a_est > 0.0;
    let kappa_est = est.kappa();
    // Birkhoff bound tanh(Delta/4) with Delta <= 2 log(b/a); degenerates to
    // 1 when positivity is not in evidence.
    let birkhoff = if positive_evidence {
        (0.5 * (est.b_est / est.a_est).ln()).tanh()
    } else {
        1.0
    };
    let rho_p = inst
        .q
        .is_unital()
        .then(|| quantum::fixed_point_linearization(&inst.q).map(|lin| lin.spectral_radius))
        .transpose()?;

    let sol = quantum::solve(&inst.q, &inst.alpha, &inst.beta, &inst.config)?;
    match format {
        Format::Json => {
            let doc = serde_json::json!({
                "kind": "diagnostics",
                "n": inst.q.n(),
                "unital": inst.q.is_unital(),
                "channel": inst.q.is_channel(),
                "positive_evidence": positive_evidence,
                "a_est": est.a_est,
                "b_est": est.b_est,
                "certified": est.certified,
                "kappa_est": kappa_est,
                "birkhoff_bound": birkhoff,
                "rho_p": rho_p,
                "samples": samples,
                "refine_steps": refine,
                "seed": seed,
                "converged": sol.converged,
                "convergence_curve": sol.hilbert_trace,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("serializes"));
        }
        Format::Text => {
            let mut out = String::new();
            kv(&mut out, "kind", "diagnostics");
            kv(&mut out, "unital", inst.q.is_unital());
            kv(&mut out, "positive_evidence", positive_evidence);
            kv(&mut out, "a_est", format!("{:e}", est.a_est));
            kv(&mut out, "b_est", format!("{:e}", est.b_est));
            kv(&mut out, "kappa_est", format!("{:e}", kappa_est));
            kv(&mut out, "birkhoff_bound", format!("{:e}", birkhoff));
            if let Some(rho) = rho_p {
                kv(&mut out, "rho_p", format!("{rho:e}"));
            }
            kv(&mut out, "converged", sol.converged);
            kv(&mut out, "iterations", sol.iterations);
            print!("{out}");
        }
    }
    Ok(0)
}

pub fn probe(path: &Path, starts: Option<usize>, seed: Option<u64>) -> Result<u8, Failure> {
    let instance = io::parse_instance(&read_file(path)?)?;
    let Instance::Quantum(inst) = instance else {
        return Err(Error::Validation("probe needs a quantum instance".into()).into());
    };
    let starts = starts.unwrap_or(inst.config.starts);
    if starts == 0 {
        return Err(Failure::usage("--starts must be at least 1".into()));
    }
    let seed = resolve_seed(seed, inst.config.seed);
    let report = quantum::probe_uniqueness(&inst.q, &inst.alpha, &inst.beta, starts, &inst.config, seed)?;
    let doc = serde_json::json!({
        "kind": "probe_report",
        "n": inst.q.n(),
        "starts": report.starts,
        "seed": seed,
        "num_clusters": report.clusters.len(),
        "non_converged": report.non_converged,
        "clusters": report.clusters.iter().map(|c| serde_json::json!({
            "count": c.count,
            "U": output::complex_rows(c.representative.as_matrix()),
        })).collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&doc).expect("serializes"));
    Ok(0)
}
