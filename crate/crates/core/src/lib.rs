//! Relaxed Jacobi and Gauss-Seidel solvers for dense linear systems, plus a
//! hybrid evolutionary solver that adapts the relaxation factor on the fly.
//!
//! The [`oracle`] module holds dense reference computations used to check the
//! iterative methods; [`problem`] generates and stores random test systems.

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classical;
pub mod error;
pub mod evo;
pub mod linsys;
pub mod oracle;
pub mod problem;
pub mod rng;

pub use classical::{gauss_seidel_sr_solve, jacobi_sr_solve, SolveConfig, SolveResult, Status};
pub use error::{Error, Result};
pub use evo::{
    evolve, AdaptationMode, AdaptationParams, Evolution, EvolutionConfig, GenerationTrace, Individual, Pairing,
};
pub use linsys::{residual_error, JacobiOperator, LinearSystem, NormKind};
pub use oracle::{direct_solve, iteration_matrix, operator_norm_inf, spectral_radius};
pub use problem::{generate, load_problem, save_problem, ProblemFamily};
