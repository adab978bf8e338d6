//! Text rendering: a stable line-oriented `key value` table for shell
//! pipelines, plus JSON fragments.

use bridgescale_core::classical::ClassicalSolution;
use bridgescale_core::linalg::ComplexMatrix;
use bridgescale_core::quantum::BridgeSolution;
use std::fmt::Display;
use std::fmt::Write;

pub fn kv(out: &mut String, key: &str, value: impl Display) {
    writeln!(out, "{key} {value}").expect("string write");
}

fn status(converged: bool) -> &'static str {
    if converged {
        "converged"
    } else {
        "no_convergence"
    }
}

pub fn classical_text(sol: &ClassicalSolution) -> String {
    let mut out = String::new();
    kv(&mut out, "kind", "classical");
    kv(&mut out, "status", status(sol.converged));
    kv(&mut out, "iterations", sol.iterations);
    kv(&mut out, "residual_map", format!("{:e}", sol.residual_map));
    kv(&mut out, "residual_stoch", format!("{:e}", sol.residual_stoch));
    kv(&mut out, "residual_bridge", format!("{:e}", sol.residual_bridge));
    out
}

pub fn quantum_text(sol: &BridgeSolution) -> String {
    let mut out = String::new();
    kv(&mut out, "kind", "quantum");
    kv(&mut out, "status", status(sol.converged));
    kv(&mut out, "iterations", sol.iterations);
    kv(&mut out, "residual_fixed", format!("{:e}", sol.residual_fixed));
    kv(&mut out, "residual_channel", format!("{:e}", sol.residual_channel));
    kv(&mut out, "residual_bridge", format!("{:e}", sol.residual_bridge));
    out
}

/// Nested-array JSON value of a complex matrix ([re, im] entries).
pub fn complex_rows(m: &ComplexMatrix) -> serde_json::Value {
    serde_json::json!((0..m.n_rows())
        .map(|i| (0..m.n_cols()).map(|j| vec![m[(i, j)].re, m[(i, j)].im]).collect::<Vec<_>>())
        .collect::<Vec<_>>())
}
