//! Instance and solution serialization. JSON throughout, UTF-8, doubles
//! only; complex scalars cross the boundary as two-element [re, im] arrays
//! and matrices as dense row-major nested arrays. Finite doubles round-trip
//! bit-exactly.

mod config;

pub use config::SolverConfig;

use crate::classical::{ClassicalSolution, NonnegMatrix, ProbVector, RealMatrix};
use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, DensityMatrix, HermitianMatrix};
use crate::quantum::{BridgeSolution, KrausMap, ScalingCertificate};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Largest accepted instance dimension; the numerics are dense throughout.
pub const MAX_DIMENSION: usize = 64;

type RawComplexMatrix = Vec<Vec<[f64; 2]>>;

/// Validated problem instance.
#[derive(Debug, Clone)]
pub enum Instance {
    Classical(ClassicalInstance),
    Quantum(QuantumInstance),
}

#[derive(Debug, Clone)]
pub struct ClassicalInstance {
    pub a: NonnegMatrix,
    pub alpha: ProbVector,
    pub beta: ProbVector,
    pub config: SolverConfig,
}

#[derive(Debug, Clone)]
pub struct QuantumInstance {
    pub q: KrausMap,
    pub alpha: DensityMatrix,
    pub beta: DensityMatrix,
    pub config: SolverConfig,
}

impl Instance {
    pub fn n(&self) -> usize {
        match self {
            Instance::Classical(c) => c.a.n(),
            Instance::Quantum(q) => q.q.n(),
        }
    }

    pub fn config(&self) -> &SolverConfig {
        match self {
            Instance::Classical(c) => &c.config,
            Instance::Quantum(q) => &q.config,
        }
    }

    pub fn with_config(mut self, config: SolverConfig) -> Self {
        match &mut self {
            Instance::Classical(c) => c.config = config,
            Instance::Quantum(q) => q.config = config,
        }
        self
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    kind: String,
    n: usize,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    a: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kraus: Option<Vec<RawComplexMatrix>>,
    alpha: RawMarginal,
    beta: RawMarginal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<SolverConfig>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawMarginal {
    Vector(Vec<f64>),
    Matrix(RawComplexMatrix),
}

fn complex_to_raw(m: &ComplexMatrix) -> RawComplexMatrix {
    (0..m.n_rows())
        .map(|i| (0..m.n_cols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn raw_to_complex(raw: &RawComplexMatrix, n: usize, what: &str) -> Result<ComplexMatrix> {
    if raw.len() != n || raw.iter().any(|row| row.len() != n) {
        return Err(Error::Validation(format!("{what} must be a dense {n} x {n} matrix")));
    }
    let entries: Vec<Complex64> =
        raw.iter().flatten().map(|&[re, im]| Complex64::new(re, im)).collect();
    ComplexMatrix::new(n, n, entries)
        .map_err(|e| Error::Validation(format!("{what}: {e}")))
}

fn real_to_raw(m: &RealMatrix) -> Vec<Vec<f64>> {
    (0..m.n_rows()).map(|i| (0..m.n_cols()).map(|j| m[(i, j)]).collect()).collect()
}

/// Validate a user-supplied Hermitian marginal: Hermitian within 1e-12,
/// trace within 1e-9 of one, positive definite; re-hermitized and
/// trace-renormalized on the way in.
fn validate_density(raw: &RawComplexMatrix, n: usize, what: &str) -> Result<DensityMatrix> {
    let m = raw_to_complex(raw, n, what)?;
    let defect = m.hermitian_defect();
    if defect > 1e-12 {
        return Err(Error::Validation(format!(
            "{what} is not Hermitian (defect {defect:.3e} beyond 1e-12)"
        )));
    }
    let h = HermitianMatrix::new(m)?;
    let trace = h.trace();
    if (trace - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!(
            "{what} has trace {trace}, beyond the 1e-9 renormalization window"
        )));
    }
    DensityMatrix::new_pd(h)
        .map_err(|e| Error::Validation(format!("{what} must be positive definite: {e}")))
}

/// Parse and validate an instance file. Malformed JSON reports PARSE_ERROR;
/// anything that would violate a solver precondition reports
/// VALIDATION_ERROR here rather than mid-solve.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let raw: RawInstance =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let n = raw.n;
    if n == 0 || n > MAX_DIMENSION {
        return Err(Error::Validation(format!("n must be in 1..={MAX_DIMENSION}, got {n}")));
    }
    let config = raw.config.unwrap_or_default();
    config.validate()?;
    match raw.kind.as_str() {
        "classical" => {
            let a_rows =
                raw.a.ok_or_else(|| Error::Validation("classical instance needs field A".into()))?;
            if raw.kraus.is_some() {
                return Err(Error::Validation("classical instance must not carry kraus".into()));
            }
            if a_rows.len() != n || a_rows.iter().any(|r| r.len() != n) {
                return Err(Error::Validation(format!("A must be a dense {n} x {n} matrix")));
            }
            let a = NonnegMatrix::new(n, a_rows.into_iter().flatten().collect())?;
            // Solver preconditions are rejected here, not mid-solve.
            if a.structure().has_zero_row {
                return Err(Error::ZeroRow);
            }
            if a.structure().has_zero_col {
                return Err(Error::ZeroColumn);
            }
            let alpha = classical_marginal(raw.alpha, n, "alpha")?;
            let beta = classical_marginal(raw.beta, n, "beta")?;
            Ok(Instance::Classical(ClassicalInstance { a, alpha, beta, config }))
        }
        "quantum" => {
            let kraus_raw = raw
                .kraus
                .ok_or_else(|| Error::Validation("quantum instance needs field kraus".into()))?;
            if raw.a.is_some() {
                return Err(Error::Validation("quantum instance must not carry A".into()));
            }
            let kraus = kraus_raw
                .iter()
                .enumerate()
                .map(|(i, m)| raw_to_complex(m, n, &format!("kraus[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            let q = KrausMap::new(kraus)?;
            let alpha = quantum_marginal(raw.alpha, n, "alpha")?;
            let beta = quantum_marginal(raw.beta, n, "beta")?;
            Ok(Instance::Quantum(QuantumInstance { q, alpha, beta, config }))
        }
        other => Err(Error::Validation(format!("unknown kind {other:?}"))),
    }
}

fn classical_marginal(raw: RawMarginal, n: usize, what: &str) -> Result<ProbVector> {
    match raw {
        RawMarginal::Vector(v) => {
            if v.len() != n {
                return Err(Error::Validation(format!("{what} must have length {n}")));
            }
            ProbVector::new(v).map_err(|e| Error::Validation(format!("{what}: {e}")))
        }
        RawMarginal::Matrix(_) => {
            Err(Error::Validation(format!("{what} of a classical instance must be a vector")))
        }
    }
}

fn quantum_marginal(raw: RawMarginal, n: usize, what: &str) -> Result<DensityMatrix> {
    match raw {
        RawMarginal::Matrix(m) => validate_density(&m, n, what),
        RawMarginal::Vector(_) => Err(Error::Validation(format!(
            "{what} of a quantum instance must be a Hermitian matrix of [re, im] pairs"
        ))),
    }
}

/// Serialize an instance; deterministic bytes for identical values.
pub fn serialize_instance(instance: &Instance) -> String {
    let raw = match instance {
        Instance::Classical(c) => RawInstance {
            kind: "classical".into(),
            n: c.a.n(),
            a: Some(real_to_raw(c.a.as_matrix())),
            kraus: None,
            alpha: RawMarginal::Vector(c.alpha.as_slice().to_vec()),
            beta: RawMarginal::Vector(c.beta.as_slice().to_vec()),
            config: Some(c.config.clone()),
        },
        Instance::Quantum(q) => RawInstance {
            kind: "quantum".into(),
            n: q.q.n(),
            a: None,
            kraus: Some(q.q.kraus().iter().map(complex_to_raw).collect()),
            alpha: RawMarginal::Matrix(complex_to_raw(q.alpha.as_matrix())),
            beta: RawMarginal::Matrix(complex_to_raw(q.beta.as_matrix())),
            config: Some(q.config.clone()),
        },
    };
    serde_json::to_string_pretty(&raw).expect("instances serialize") + "\n"
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClassicalSolution {
    kind: String,
    n: usize,
    x_star: Vec<f64>,
    #[serde(rename = "B")]
    b: Vec<Vec<f64>>,
    d1: Vec<f64>,
    d2: Vec<f64>,
    residual_map: f64,
    residual_stoch: f64,
    residual_bridge: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
    config: SolverConfig,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuantumSolution {
    kind: String,
    n: usize,
    #[serde(rename = "U")]
    u: RawComplexMatrix,
    #[serde(rename = "S")]
    s: RawComplexMatrix,
    #[serde(rename = "T")]
    t: RawComplexMatrix,
    #[serde(rename = "O")]
    o: RawComplexMatrix,
    #[serde(rename = "R")]
    r: Vec<RawComplexMatrix>,
    residual_fixed: f64,
    residual_channel: f64,
    residual_bridge: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
    hilbert_trace: Vec<f64>,
    config: SolverConfig,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCertificate {
    kind: String,
    n: usize,
    phi_0: RawComplexMatrix,
    #[serde(rename = "phi_T")]
    phi_t: RawComplexMatrix,
    phihat_0: RawComplexMatrix,
    #[serde(rename = "phihat_T")]
    phihat_t: RawComplexMatrix,
    chi_0: RawComplexMatrix,
    #[serde(rename = "chi_T")]
    chi_t: RawComplexMatrix,
    residuals: RawCertificateResiduals,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCertificateResiduals {
    transport: f64,
    dual_transport: f64,
    rho_0: f64,
    #[serde(rename = "rho_T")]
    rho_t: f64,
    gram_0: f64,
    #[serde(rename = "gram_T")]
    gram_t: f64,
}

/// Any serializable result document.
pub enum Solution<'a> {
    Classical(&'a ClassicalSolution, &'a SolverConfig),
    Quantum(&'a BridgeSolution, &'a SolverConfig),
    Certificate(&'a ScalingCertificate),
}

/// Serialize a solution or certificate with full-precision doubles,
/// residuals and the iteration trace included.
pub fn serialize_solution(solution: &Solution) -> String {
    serde_json::to_string_pretty(&solution_value(solution)).expect("solutions serialize") + "\n"
}

/// The same document as a JSON value, for embedding.
pub fn solution_value(solution: &Solution) -> serde_json::Value {
    match solution {
        Solution::Classical(sol, config) => serde_json::to_value(RawClassicalSolution {
            kind: "classical_solution".into(),
            n: sol.x_star.n(),
            x_star: sol.x_star.as_slice().to_vec(),
            b: real_to_raw(&sol.b),
            d1: sol.d1.clone(),
            d2: sol.d2.clone(),
            residual_map: sol.residual_map,
            residual_stoch: sol.residual_stoch,
            residual_bridge: sol.residual_bridge,
            iterations: sol.iterations,
            converged: sol.converged,
            trace: sol.trace.clone(),
            config: (*config).clone(),
        }),
        Solution::Quantum(sol, config) => serde_json::to_value(RawQuantumSolution {
            kind: "quantum_solution".into(),
            n: sol.u.n(),
            u: complex_to_raw(sol.u.as_matrix()),
            s: complex_to_raw(&sol.s),
            t: complex_to_raw(&sol.t),
            o: complex_to_raw(&sol.o),
            r: sol.r.kraus().iter().map(complex_to_raw).collect(),
            residual_fixed: sol.residual_fixed,
            residual_channel: sol.residual_channel,
            residual_bridge: sol.residual_bridge,
            iterations: sol.iterations,
            converged: sol.converged,
            trace: sol.trace.clone(),
            hilbert_trace: sol.hilbert_trace.clone(),
            config: (*config).clone(),
        }),
        Solution::Certificate(cert) => serde_json::to_value(RawCertificate {
            kind: "certificate".into(),
            n: cert.phi_0.n(),
            phi_0: complex_to_raw(cert.phi_0.as_matrix()),
            phi_t: complex_to_raw(cert.phi_t.as_matrix()),
            phihat_0: complex_to_raw(cert.phihat_0.as_matrix()),
            phihat_t: complex_to_raw(cert.phihat_t.as_matrix()),
            chi_0: complex_to_raw(&cert.chi_0),
            chi_t: complex_to_raw(&cert.chi_t),
            residuals: RawCertificateResiduals {
                transport: cert.residuals.transport,
                dual_transport: cert.residuals.dual_transport,
                rho_0: cert.residuals.rho_0,
                rho_t: cert.residuals.rho_t,
                gram_0: cert.residuals.gram_0,
                gram_t: cert.residuals.gram_t,
            },
        }),
    }
    .expect("document structs serialize")
}

/// Stored solution reloaded for verification. Matrices come back raw; the
/// verifier recomputes every residual from these and the instance.
#[derive(Debug, Clone)]
pub enum StoredSolution {
    Classical(StoredClassicalSolution),
    Quantum(StoredQuantumSolution),
}

#[derive(Debug, Clone)]
pub struct StoredClassicalSolution {
    pub n: usize,
    pub x_star: Vec<f64>,
    pub b: RealMatrix,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
    pub converged: bool,
    pub config: SolverConfig,
}

#[derive(Debug, Clone)]
pub struct StoredQuantumSolution {
    pub n: usize,
    pub u: ComplexMatrix,
    pub s: ComplexMatrix,
    pub t: ComplexMatrix,
    pub o: ComplexMatrix,
    pub r: Vec<ComplexMatrix>,
    pub converged: bool,
    pub config: SolverConfig,
}

impl StoredSolution {
    pub fn n(&self) -> usize {
        match self {
            StoredSolution::Classical(c) => c.n,
            StoredSolution::Quantum(q) => q.n,
        }
    }
}

/// Parse a solution document produced by [`serialize_solution`].
pub fn parse_solution(text: &str) -> Result<StoredSolution> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let kind = value
        .get("kind")
        .and_then(|k| k.as_str())
        .ok_or_else(|| Error::Validation("solution document lacks kind".into()))?
        .to_string();
    match kind.as_str() {
        "classical_solution" => {
            let raw: RawClassicalSolution =
                serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
            let n = raw.n;
            if raw.b.len() != n
                || raw.b.iter().any(|r| r.len() != n)
                || raw.x_star.len() != n
                || raw.d1.len() != n
                || raw.d2.len() != n
            {
                return Err(Error::Validation("solution fields disagree on dimension".into()));
            }
            let mut b = RealMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    b[(i, j)] = raw.b[i][j];
                }
            }
            raw.config.validate()?;
            Ok(StoredSolution::Classical(StoredClassicalSolution {
                n,
                x_star: raw.x_star,
                b,
                d1: raw.d1,
                d2: raw.d2,
                converged: raw.converged,
                config: raw.config,
            }))
        }
        "quantum_solution" => {
            let raw: RawQuantumSolution =
                serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
            let n = raw.n;
            raw.config.validate()?;
            Ok(StoredSolution::Quantum(StoredQuantumSolution {
                n,
                u: raw_to_complex(&raw.u, n, "U")?,
                s: raw_to_complex(&raw.s, n, "S")?,
                t: raw_to_complex(&raw.t, n, "T")?,
                o: raw_to_complex(&raw.o, n, "O")?,
                r: raw
                    .r
                    .iter()
                    .enumerate()
                    .map(|(i, m)| raw_to_complex(m, n, &format!("R[{i}]")))
                    .collect::<Result<Vec<_>>>()?,
                converged: raw.converged,
                config: raw.config,
            }))
        }
        other => Err(Error::Validation(format!("unknown solution kind {other:?}"))),
    }
}
