//! Solver configuration shared by the classical and quantum solvers.

use serde::{Deserialize, Serialize};

/// Tunables accepted by every solver entry point. Instance files may carry
/// a partial `config` object; missing fields take these defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    /// Fixed-point stopping tolerance.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Mixing weight of the fixed-point update, in (0, 1].
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default)]
    pub seed: u64,
    /// Number of starts used by multi-start probing (and by solve as
    /// fallback restarts).
    #[serde(default = "default_starts")]
    pub starts: usize,
    /// Anderson mixing for the quantum fixed-point iteration.
    #[serde(default)]
    pub anderson: bool,
}

fn default_tol() -> f64 {
    1e-11
}

fn default_max_iter() -> usize {
    10_000
}

fn default_damping() -> f64 {
    1.0
}

fn default_starts() -> usize {
    1
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            max_iter: default_max_iter(),
            damping: default_damping(),
            seed: 0,
            starts: default_starts(),
            anderson: false,
        }
    }
}

impl SolverConfig {
    /// Basic sanity checks used at parse time.
    pub fn validate(&self) -> crate::error::Result<()> {
        if self.tol <= 0.0 || !self.tol.is_finite() {
            return Err(crate::error::Error::Validation("tol must be positive".into()));
        }
        if self.max_iter == 0 {
            return Err(crate::error::Error::Validation("max_iter must be at least 1".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(crate::error::Error::Validation("damping must lie in (0, 1]".into()));
        }
        if self.starts == 0 {
            return Err(crate::error::Error::Validation("starts must be at least 1".into()));
        }
        Ok(())
    }
}
