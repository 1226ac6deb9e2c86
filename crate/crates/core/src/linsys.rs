//! Dense linear systems `Ax = b` and the relaxed sweeps used by every solver.
//!
//! With the splitting `A = D - L - U` the relaxed Jacobi (JOR) iteration is
//!
//! ```text
//! x' = H(w) x + V(w),   H(w) = I - w D^-1 A,   V(w) = w D^-1 b
//! ```
//!
//! The sweeps below apply it component-wise and never build `H(w)`; see
//! [`crate::oracle`] for the dense forms.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Rows per rayon task in [`JacobiOperator::sr_sweep_par`].
const PAR_ROW_CHUNK: usize = 32;

/// Square system `Ax = b` with a nonzero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
}

impl LinearSystem {
    /// Builds a system from a row-major `n x n` matrix and a right-hand side.
    pub fn new(n: usize, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        if a.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: a.len(),
            });
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: b.len(),
            });
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("coefficient matrix"));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput("right-hand side"));
        }
        if let Some(row) = (0..n).find(|&i| a[i * n + i] == 0.0) {
            return Err(Error::ZeroDiagonal { row });
        }
        Ok(Self { n, a, b })
    }

    /// Convenience constructor from nested rows.
    pub fn from_rows(rows: &[Vec<f64>], b: Vec<f64>) -> Result<Self> {
        let n = rows.len();
        let mut a = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            a.extend_from_slice(row);
        }
        Self::new(n, a, b)
    }

    pub fn identity(b: Vec<f64>) -> Result<Self> {
        let n = b.len();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 1.0;
        }
        Self::new(n, a, b)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Row-major coefficient matrix.
    pub fn matrix(&self) -> &[f64] {
        &self.a
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    /// `true` when `|a_ii| > sum_{j != i} |a_ij|` for every row.
    pub fn is_strictly_diagonally_dominant(&self) -> bool {
        (0..self.n).all(|i| {
            let off: f64 = self
                .row(i)
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v.abs())
                .sum();
            self.get(i, i).abs() > off
        })
    }

    fn check_len(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Residual vector `Ax - b`.
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x)?;
        Ok((0..self.n).map(|i| dot(self.row(i), x) - self.b[i]).collect())
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Vector norm used for residual errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum NormKind {
    #[default]
    Euclidean,
    MaxAbsolute,
}

impl NormKind {
    pub fn apply(self, v: &[f64]) -> f64 {
        match self {
            NormKind::Euclidean => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormKind::MaxAbsolute => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

impl std::str::FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l2" | "euclidean" => Ok(NormKind::Euclidean),
            "linf" | "max" | "max-absolute" => Ok(NormKind::MaxAbsolute),
            other => Err(Error::InvalidConfig(format!("unknown norm `{other}`"))),
        }
    }
}

impl std::fmt::Display for NormKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormKind::Euclidean => "l2",
            NormKind::MaxAbsolute => "linf",
        })
    }
}

/// Residual error `||Ax - b||`.
///
/// Returns [`Error::Overflow`] when the residual is not finite.
pub fn residual_error(system: &LinearSystem, x: &[f64], norm: NormKind) -> Result<f64> {
    let r = system.residual(x)?;
    let e = norm.apply(&r);
    if e.is_finite() {
        Ok(e)
    } else {
        Err(Error::Overflow)
    }
}

/// A system together with its precomputed inverse diagonal.
#[derive(Debug, Clone)]
pub struct JacobiOperator<'a> {
    system: &'a LinearSystem,
    inv_diag: Vec<f64>,
}

impl<'a> JacobiOperator<'a> {
    pub fn new(system: &'a LinearSystem) -> Self {
        let inv_diag = (0..system.n).map(|i| 1.0 / system.get(i, i)).collect();
        Self { system, inv_diag }
    }

    pub fn system(&self) -> &'a LinearSystem {
        self.system
    }

    pub fn inv_diag(&self) -> &[f64] {
        &self.inv_diag
    }

    #[inline]
    fn jacobi_row(&self, i: usize, x: &[f64], omega: f64) -> f64 {
        let s = self.system;
        x[i] + omega * self.inv_diag[i] * (s.b[i] - dot(s.row(i), x))
    }

    /// One relaxed Jacobi sweep: `x'_i = x_i + (w / a_ii)(b_i - sum_j a_ij x_j)`,
    /// every read taken from the old vector.
    pub fn sr_sweep(&self, x: &[f64], omega: f64) -> Result<Vec<f64>> {
        self.system.check_len(x)?;
        let out: Vec<f64> = (0..self.system.n).map(|i| self.jacobi_row(i, x, omega)).collect();
        finite_or_overflow(out)
    }

    /// Row-parallel variant of [`Self::sr_sweep`]; bit-identical output.
    pub fn sr_sweep_par(&self, x: &[f64], omega: f64) -> Result<Vec<f64>> {
        self.system.check_len(x)?;
        let mut out = vec![0.0; self.system.n];
        out.par_chunks_mut(PAR_ROW_CHUNK).enumerate().for_each(|(c, chunk)| {
            for (k, slot) in chunk.iter_mut().enumerate() {
                *slot = self.jacobi_row(c * PAR_ROW_CHUNK + k, x, omega);
            }
        });
        finite_or_overflow(out)
    }

    /// One relaxed Gauss-Seidel (SOR) sweep: components `j < i` are read from
    /// the partially updated vector.
    pub fn gs_sweep(&self, x: &[f64], omega: f64) -> Result<Vec<f64>> {
        let s = self.system;
        s.check_len(x)?;
        let mut out = x.to_vec();
        for i in 0..s.n {
            let r = s.b[i] - dot(s.row(i), &out);
            out[i] += omega * self.inv_diag[i] * r;
        }
        finite_or_overflow(out)
    }
}

fn finite_or_overflow(v: Vec<f64>) -> Result<Vec<f64>> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::Overflow)
    }
}
