//! Experiment harness behind the `hybrid-sr` binary. Settings arrive as flat
//! key/value pairs from config files or command-line flags.

// `!(a < b)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod experiment;
pub mod keyvalue;
pub mod params;
pub mod spectra;

pub use experiment::{run_bench, solve_once, BenchOutput, ExperimentConfig, ExperimentReport};
pub use keyvalue::Settings;
pub use params::{Algorithm, ProblemSource, SolverParams};
