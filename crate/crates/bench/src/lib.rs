//! Fixtures shared by the benchmarks.

use hybrid_sr_core::rng::start_vector;
use hybrid_sr_core::{generate, LinearSystem, ProblemFamily};

/// Dominance-enforced sample system of size `n`.
pub fn dominant_system(n: usize, seed: u64) -> LinearSystem {
    generate(&ProblemFamily::p2().diagonally_dominant(true), n, seed).expect("fixture parameters are valid")
}

/// Start vector on the default initialization range.
pub fn start(n: usize, seed: u64) -> Vec<f64> {
    start_vector(seed, n, -30.0, 30.0)
}
