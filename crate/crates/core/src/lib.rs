//! SYK and sparse-SYK Trotter-error laboratory.
//!
//! The crate builds Sachdev–Ye–Kitaev Hamiltonians on Majorana fermions
//! (Jordan–Wigner encoded as Pauli strings), Trotterizes them with
//! Lie–Trotter–Suzuki product formulas, measures the actual Trotter error by
//! disorder-averaged Monte Carlo, and evaluates closed-form error bounds,
//! Trotter-number solvers and gate counts. Brute-force oracles check the
//! commutator combinatorics the bounds rest on.
//!
//! Module map:
//!
//! * [`pauli`] — exact Pauli-string algebra and dense Pauli exponentials;
//! * [`fermion`] — Majorana operators and k-local term operators;
//! * [`model`] — hyperedge ordering, dense/sparse instance sampling;
//! * [`linalg`] — dense operators, exact evolution, Schatten norms, Monte Carlo;
//! * [`trotter`] — product-formula schedules and observed Trotter errors;
//! * [`bounds`] — `Q(n,k)`, error bounds, Trotter-number solver, gate counts, fits;
//! * [`oracle`] — commutator-chain indicator, `G_w`, anti-commutation graph;
//! * [`experiment`] — configuration, scan drivers and CSV output.

// `!(x >= 0.0)` is used deliberately so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod error;
pub mod experiment;
pub mod fermion;
pub mod linalg;
pub mod math;
pub mod model;
pub mod oracle;
pub mod pauli;
pub mod rng;
pub mod trotter;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
