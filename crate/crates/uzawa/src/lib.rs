//! Adaptive-relaxation Uzawa solvers for sparse generalized saddle-point
//! systems
//!
//! ```text
//! [ A   B ] [x]   [f]
//! [ Bᵀ -D ] [y] = [g]
//! ```
//!
//! with a possibly nonsymmetric `A` whose symmetric part is positive
//! definite. The crate provides:
//!
//! - sparse CSR kernels, exact sparse factorizations, and dense
//!   eigen-workspace for desk-scale diagnostics ([`linalg`]);
//! - a preconditioner suite (Jacobi, threshold ILU/IC, exact factors,
//!   scaled identity) and the composite Schur-block operators ([`operators`]);
//! - four Uzawa-type iterations with self-tuning relaxation parameters and
//!   full residual traces, plus an unpreconditioned GMRES baseline
//!   ([`solvers`]);
//! - spectral diagnostics that measure the constants governing convergence
//!   and evaluate the admissible parameter windows ([`diagnostics`]);
//! - problem generators: a staggered-grid Oseen discretization of the
//!   lid-driven cavity, a Navier-Stokes driver via Picard iteration, and a
//!   seeded synthetic generator with planted solutions ([`problems`]).

// Index loops mirror the stencil and matrix formulas in the kernels.
#![allow(clippy::needless_range_loop)]

pub mod diagnostics;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod problems;
pub mod solvers;
pub mod system;

pub use error::{Error, Result};
pub use linalg::CsrMatrix;
pub use operators::{LinearOperator, PreconditionerSpec};
pub use solvers::{Algorithm, IterationTrace, SaddleSystem, SolverConfig, TauStrategy};

/// Largest dimension the dense diagnostics accept by default.
pub const DEFAULT_DENSE_CAP: usize = 2000;
