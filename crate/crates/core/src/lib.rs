//! Multiobjective controller synthesis over matrix-inequality constraints.
//!
//! The crate couples an interior-point solver for the eigenvalue problem
//! `min λ s.t. G_k(x) ≺ λI` with a hybrid multiobjective differential
//! evolution search over the scalar design parameters `α`. Every candidate
//! `α` is turned into a [`lmi::ConstraintSystem`], solved for its optimal
//! matrix variables, and kept when strictly feasible. The search output is an
//! archive of mutually nondominated objective vectors plus a knee design.
//!
//! Module map:
//! - [`matrix`]: dense symmetric linear algebra (Jacobi eigenvalues, Cholesky).
//! - [`lmi`]: affine symmetric blocks, variable layouts and the EVP solver.
//! - [`problem`]: the reduced multiobjective problem and Pareto utilities.
//! - [`hmode`]: the two-phase evolutionary search and knee selection.
//! - [`problems`]: the robust fuzzy H∞ and bounded-input/output designs.
//! - [`sim`]: RK4 closed-loop simulation and performance metrics.
//! - [`cli`]: configuration, artifact writers and the command drivers.

pub mod cli;
pub mod error;
pub mod hmode;
pub mod lmi;
pub mod matrix;
pub mod problem;
pub mod problems;
pub mod sim;

pub use error::{Error, Result};

/// Default strictness margin: a point counts as feasible when `λ* ≤ -EPS_FEAS`.
pub const EPS_FEAS: f64 = 1e-7;
