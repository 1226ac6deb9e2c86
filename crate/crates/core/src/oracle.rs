//! Dense reference computations on the iteration matrix, plus a direct solve.
//!
//! These materialize the iteration matrix and are meant for checking the
//! iterative solvers on small systems (a few hundred unknowns at most).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linsys::LinearSystem;

/// Restarts allowed in [`spectral_radius`] before giving up.
const MAX_RESTARTS: usize = 8;
/// Fixed seed for power-iteration start vectors, so estimates are reproducible.
const POWER_SEED: u64 = 0x9e37_79b9_7f4a_7c15;
/// Relative Gram determinant below which two iterates are treated as parallel.
const GRAM_DEGENERACY: f64 = 1e-10;
/// Consecutive in-tolerance steps required before an estimate is accepted.
const SETTLE_STEPS: usize = 8;

/// Dense row-major `H(w) = I - w D^-1 A`.
pub fn iteration_matrix(system: &LinearSystem, omega: f64) -> Vec<f64> {
    let n = system.dim();
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        let scale = omega / system.get(i, i);
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            h[i * n + j] = delta - scale * system.get(i, j);
        }
    }
    h
}

/// Maximum absolute row sum of `H(w)`.
pub fn operator_norm_inf(system: &LinearSystem, omega: f64) -> f64 {
    let n = system.dim();
    iteration_matrix(system, omega)
        .chunks(n)
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Solves `Ax = b` by Gaussian elimination with partial pivoting.
pub fn direct_solve(system: &LinearSystem) -> Result<Vec<f64>> {
    let n = system.dim();
    let mut a = system.matrix().to_vec();
    let mut b = system.rhs().to_vec();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tiny = f64::EPSILON * n as f64 * scale;

    for k in 0..n {
        let (p, pivot) =
            (k..n)
                .map(|i| (i, a[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot <= tiny {
            return Err(Error::Singular { column: k });
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
        }
        let akk = a[k * n + k];
        for i in k + 1..n {
            let f = a[i * n + k] / akk;
            if f == 0.0 {
                continue;
            }
            a[i * n + k] = 0.0;
            for j in k + 1..n {
                a[i * n + j] -= f * a[k * n + j];
            }
            b[i] -= f * b[k];
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i * n + j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i * n + i];
    }
    Ok(x)
}

fn matvec(m: &[f64], v: &[f64], out: &mut [f64]) {
    let n = v.len();
    for (i, o) in out.iter_mut().enumerate() {
        *o = m[i * n..(i + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum();
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// One candidate from a power step: the estimate and its residual.
#[derive(Clone, Copy)]
struct Estimate {
    rho: f64,
    residual: f64,
}

/// Estimates the dominant eigenvalue modulus from `u1 = H u0`, `u2 = H u1`
/// with `||u0|| = 1`.
///
/// A single real dominant eigenvalue shows up as `u1 ~ l u0`. A dominant pair
/// (complex conjugate or `+-l`) makes the plain ratio oscillate, so the
/// two-term recurrence `u2 ~ a u1 + b u0` is fitted and the larger root of
/// `z^2 - a z - b` is taken. Returns the single-vector estimate and, when the
/// two iterates are not parallel, the pair estimate.
fn estimate(u0: &[f64], u1: &[f64], u2: &[f64]) -> (Estimate, Option<Estimate>) {
    let l = dot(u0, u1);
    let r1: f64 = u1.iter().zip(u0).map(|(a, b)| (a - l * b).powi(2)).sum::<f64>().sqrt();
    let single = Estimate {
        rho: l.abs(),
        residual: r1,
    };

    let g11 = dot(u1, u1);
    let g01 = l;
    let det = g11 - g01 * g01;
    if det <= GRAM_DEGENERACY * g11 {
        return (single, None);
    }
    let c1 = dot(u2, u1);
    let c0 = dot(u2, u0);
    let alpha = (c1 - g01 * c0) / det;
    let beta = (g11 * c0 - g01 * c1) / det;
    let disc = alpha * alpha / 4.0 + beta;
    let rho = if disc >= 0.0 {
        let s = disc.sqrt();
        (alpha / 2.0 + s).abs().max((alpha / 2.0 - s).abs())
    } else {
        // complex pair: |z|^2 = -beta
        (-beta).sqrt()
    };
    let r2 = u2
        .iter()
        .zip(u1.iter().zip(u0))
        .map(|(c, (b, a))| (c - alpha * b - beta * a).powi(2))
        .sum::<f64>()
        .sqrt();
    // r2 carries one more factor of H than r1; put it on the same scale.
    let pair = Estimate {
        rho,
        residual: r2 / rho.max(1.0),
    };
    (single, Some(pair))
}

/// Per-estimator progress within one start vector.
struct Track {
    best_residual: f64,
    since_improved: usize,
    /// Consecutive steps with residual within tol and a steady estimate.
    settled: usize,
    prev_rho: f64,
}

impl Track {
    fn new() -> Self {
        Self {
            best_residual: f64::INFINITY,
            since_improved: 0,
            settled: 0,
            prev_rho: f64::NAN,
        }
    }

    /// Feeds one estimate; returns true once it has settled.
    fn update(&mut self, est: Estimate, tol: f64) -> bool {
        if est.residual < 0.99 * self.best_residual {
            self.best_residual = est.residual;
            self.since_improved = 0;
        } else {
            self.since_improved += 1;
        }
        if est.residual <= tol && (est.rho - self.prev_rho).abs() <= tol {
            self.settled += 1;
        } else {
            self.settled = 0;
        }
        self.prev_rho = est.rho;
        self.settled >= SETTLE_STEPS
    }
}

/// Spectral radius of `H(w)` by power iteration.
///
/// Two estimators run side by side (single eigenvalue and dominant pair). One
/// of them must hold its eigen-residual below `tol` with consecutive estimates
/// agreeing to `tol` for a few steps in a row. The start vector is redrawn when
/// the iterate collapses to zero or neither residual keeps improving. On
/// failure the best estimate seen is returned inside the error.
///
/// The residual bounds the eigenvalue error only up to the conditioning of the
/// eigenproblem, so for non-normal `H` with nearly tied dominant moduli the
/// returned value can be off by more than `tol`.
pub fn spectral_radius(system: &LinearSystem, omega: f64, tol: f64, max_iters: usize) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidConfig("spectral tolerance must be positive".into()));
    }
    let n = system.dim();
    let h = iteration_matrix(system, omega);
    let mut rng = ChaCha8Rng::seed_from_u64(POWER_SEED);
    let window = 64.max(4 * n);

    let mut best = Estimate {
        rho: f64::NAN,
        residual: f64::INFINITY,
    };
    let mut used = 0usize;
    let mut collapses = 0usize;

    // u0 = v_k (unit), u1 = H v_k, u2 = H u1
    let mut u0 = vec![0.0; n];
    let mut u1 = vec![0.0; n];
    let mut u2 = vec![0.0; n];
    let mut hv = vec![0.0; n];

    'restart: for _attempt in 0..=MAX_RESTARTS {
        for v in u0.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let s = norm2(&u0);
        u0.iter_mut().for_each(|v| *v /= s);
        matvec(&h, &u0, &mut u1);

        let mut single_track = Track::new();
        let mut pair_track = Track::new();

        while used < max_iters {
            used += 1;
            let s1 = norm2(&u1);
            if s1 == 0.0 {
                // H u0 = 0; a second collapse from a fresh start means H is nilpotent
                // on everything we can reach.
                collapses += 1;
                if collapses >= 2 {
                    return Ok(0.0);
                }
                continue 'restart;
            }
            // hv = H (u1 / s1), so u2 = s1 * hv
            u2.copy_from_slice(&u1);
            u2.iter_mut().for_each(|v| *v /= s1);
            matvec(&h, &u2, &mut hv);
            for (dst, src) in u2.iter_mut().zip(&hv) {
                *dst = src * s1;
            }
            if !u2.iter().all(|v| v.is_finite()) {
                break;
            }

            let (single, pair) = estimate(&u0, &u1, &u2);
            for est in std::iter::once(single).chain(pair) {
                if est.residual < best.residual {
                    best = est;
                }
            }
            if single_track.update(single, tol) {
                return Ok(single.rho);
            }
            match pair {
                Some(p) => {
                    if pair_track.update(p, tol) {
                        return Ok(p.rho);
                    }
                }
                None => pair_track = Track::new(),
            }
            if single_track.since_improved >= window && pair_track.since_improved >= window {
                continue 'restart;
            }

            // advance: v_{k+1} = u1 / s1, H v_{k+1} = hv
            for (dst, src) in u0.iter_mut().zip(&u1) {
                *dst = src / s1;
            }
            u1.copy_from_slice(&hv);
        }
        break;
    }

    Err(Error::SpectralEstimate {
        best: best.rho,
        iterations: used,
    })
}
