//! Schrödinger bridge scaling for stochastic matrices and quantum channels.
//!
//! Given a nonnegative matrix A (or a positive quantum channel Q in Kraus
//! form) and a pair of marginals, the solvers here find the diagonal
//! (resp. Hermitian) scaling that turns the object into a stochastic matrix
//! B with B alpha = beta (resp. a quantum channel R with R(alpha) = beta),
//! verify the result, and report contraction diagnostics in the Hilbert
//! projective metric.

pub mod classical;
pub mod error;
pub mod io;
pub mod linalg;
pub mod quantum;

pub use error::{Error, Result};
