//! Fixed-relaxation iterative solvers (relaxed Jacobi and SOR).

use crate::error::{Error, Result};
use crate::linsys::{residual_error, JacobiOperator, LinearSystem, NormKind};

pub const DEFAULT_ETA: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 50_000;
pub const DEFAULT_DIVERGENCE_CAP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub omega: f64,
    /// Threshold error: the solve stops once the residual drops below it.
    pub eta: f64,
    pub max_iters: usize,
    pub norm: NormKind,
    /// Residual at or above this (or any non-finite value) counts as divergence.
    pub divergence_cap: f64,
    pub record_trace: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            omega: 1.0,
            eta: DEFAULT_ETA,
            max_iters: DEFAULT_MAX_ITERS,
            norm: NormKind::Euclidean,
            divergence_cap: DEFAULT_DIVERGENCE_CAP,
            record_trace: false,
        }
    }
}

impl SolveConfig {
    pub fn with_omega(omega: f64) -> Self {
        Self {
            omega,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega.is_finite() {
            return Err(Error::InvalidConfig("omega must be finite".into()));
        }
        check_termination(self.eta, self.max_iters, self.divergence_cap)
    }
}

pub(crate) fn check_termination(eta: f64, max_iters: usize, cap: f64) -> Result<()> {
    if !(eta > 0.0) {
        return Err(Error::InvalidConfig("eta must be positive".into()));
    }
    if max_iters == 0 {
        return Err(Error::InvalidConfig("iteration limit must be at least 1".into()));
    }
    if !(cap > eta) {
        return Err(Error::InvalidConfig("divergence cap must exceed eta".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Converged,
    Diverged,
    IterationLimit,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "converged",
            Status::Diverged => "diverged",
            Status::IterationLimit => "iteration_limit",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Outcome of an iterative solve.
///
/// `trace`, when recorded, starts with the error of the initial vector at
/// iteration 0 and has one further entry per sweep, so its length is
/// `iterations + 1`. A non-finite error is stored as `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    pub final_error: f64,
    pub status: Status,
    pub trace: Option<Vec<(usize, f64)>>,
}

pub fn jacobi_sr_solve(system: &LinearSystem, x0: &[f64], config: &SolveConfig) -> Result<SolveResult> {
    let op = JacobiOperator::new(system);
    iterate(system, x0, config, |x| op.sr_sweep(x, config.omega))
}

pub fn gauss_seidel_sr_solve(system: &LinearSystem, x0: &[f64], config: &SolveConfig) -> Result<SolveResult> {
    let op = JacobiOperator::new(system);
    iterate(system, x0, config, |x| op.gs_sweep(x, config.omega))
}

fn iterate<F>(system: &LinearSystem, x0: &[f64], config: &SolveConfig, sweep: F) -> Result<SolveResult>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    config.validate()?;
    if x0.len() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            got: x0.len(),
        });
    }

    let mut trace = config.record_trace.then(Vec::new);
    let mut x = x0.to_vec();
    let mut error = error_or_inf(system, &x, config.norm)?;
    let mut iterations = 0;
    if let Some(t) = trace.as_mut() {
        t.push((0, error));
    }

    let status = loop {
        if error < config.eta {
            break Status::Converged;
        }
        if error >= config.divergence_cap {
            break Status::Diverged;
        }
        if iterations == config.max_iters {
            break Status::IterationLimit;
        }
        iterations += 1;
        match sweep(&x) {
            Ok(next) => {
                x = next;
                error = error_or_inf(system, &x, config.norm)?;
            }
            Err(Error::Overflow) => error = f64::INFINITY,
            Err(e) => return Err(e),
        }
        if let Some(t) = trace.as_mut() {
            t.push((iterations, error));
        }
    };

    Ok(SolveResult {
        x,
        iterations,
        final_error: error,
        status,
        trace,
    })
}

pub(crate) fn error_or_inf(system: &LinearSystem, x: &[f64], norm: NormKind) -> Result<f64> {
    match residual_error(system, x, norm) {
        Ok(e) => Ok(e),
        Err(Error::Overflow) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}
