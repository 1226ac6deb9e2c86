//! Spectral radius and `||H||_inf` over a grid of relaxation factors.

use std::fmt::Write as _;

use anyhow::{bail, Result};

use hybrid_sr_core::{operator_norm_inf, spectral_radius, Error, LinearSystem};

/// Largest system the dense oracles are run on.
pub const MAX_DENSE_DIM: usize = 500;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRow {
    pub omega: f64,
    pub rho: f64,
    pub norm_inf: f64,
    /// `false` when power iteration did not reach the tolerance; `rho` is then
    /// the best estimate.
    pub converged: bool,
}

/// `steps` evenly spaced points from `from` to `to` inclusive.
pub fn linear_grid(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    match steps {
        0 => bail!("grid needs at least one point"),
        1 => Ok(vec![from]),
        _ => Ok((0..steps)
            .map(|k| from + (to - from) * k as f64 / (steps - 1) as f64)
            .collect()),
    }
}

pub fn scan(system: &LinearSystem, grid: &[f64], tol: f64, max_iters: usize) -> Result<Vec<SpectrumRow>> {
    if system.dim() > MAX_DENSE_DIM {
        bail!(
            "spectra materializes the iteration matrix; n = {} exceeds {MAX_DENSE_DIM}",
            system.dim()
        );
    }
    grid.iter()
        .map(|&omega| {
            let norm_inf = operator_norm_inf(system, omega);
            let (rho, converged) = match spectral_radius(system, omega, tol, max_iters) {
                Ok(r) => (r, true),
                Err(Error::SpectralEstimate { best, .. }) => (best, false),
                Err(e) => return Err(e.into()),
            };
            Ok(SpectrumRow {
                omega,
                rho,
                norm_inf,
                converged,
            })
        })
        .collect()
}

pub fn to_csv(rows: &[SpectrumRow]) -> String {
    let mut out = String::from("omega,rho,norm_inf,status\n");
    for r in rows {
        let status = if r.converged { "ok" } else { "estimate_failed" };
        let _ = writeln!(out, "{},{},{},{status}", r.omega, r.rho, r.norm_inf);
    }
    out
}
