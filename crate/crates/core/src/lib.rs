//! Resource-constrained Max-SAT heuristic.
//!
//! An outer loop repeatedly picks a small set of *dynamic* variables from the
//! current assignment ([`decompose`]), prunes the formula down to the clauses
//! those variables can still affect, hands the resulting sub-problem to a
//! size-constrained inner optimizer ([`inner`]), and writes the improved
//! assignment back ([`solve`]). The QUBO route ([`qubo`]) converts each
//! sub-problem into a quadratic binary program and minimizes it with Tabu
//! search; [`subqubo`] implements the decompose-after-conversion baseline.

pub mod cnf;
pub mod decompose;
pub mod error;
pub mod experiments;
pub mod inner;
pub mod qubo;
pub mod solve;
pub mod subqubo;

pub use cnf::{energy_of, Assignment, CnfFormula, Literal, SatState};
pub use error::{Error, Result};
