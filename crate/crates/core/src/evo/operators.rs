//! Population operators: initialization, recombination, mutation, pairing and
//! selection.

use rayon::prelude::*;

use crate::classical::error_or_inf;
use crate::evo::adaptation::AdaptationParams;
use crate::evo::EvolutionConfig;
use crate::linsys::{JacobiOperator, LinearSystem, NormKind};
use crate::rng::{substream, uniform_vector, TAG_INIT};

/// Weight of the better parent in the blended offspring.
pub const BLEND_BEST: f64 = 0.99;
/// Weight of the individual's own vector in the blended offspring.
pub const BLEND_SELF: f64 = 0.01;

/// A candidate solution with its relaxation factor and cached residual error.
///
/// `error` is `f64::INFINITY` for individuals whose vector overflowed.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub x: Vec<f64>,
    pub omega: f64,
    pub error: f64,
}

impl Individual {
    pub fn new(system: &LinearSystem, x: Vec<f64>, omega: f64, norm: NormKind) -> Self {
        let error = error_or_inf(system, &x, norm).expect("individual length matches system");
        Self { x, omega, error }
    }
}

/// Evenly spaced starting factors: `w_1 = lo + d/2`, `w_i = w_{i-1} + d`,
/// `d = (hi - lo)/N`.
pub fn initial_omegas(population_size: usize, omega_lo: f64, omega_hi: f64) -> Vec<f64> {
    let d = (omega_hi - omega_lo) / population_size as f64;
    let mut out = Vec::with_capacity(population_size);
    let mut w = omega_lo + d / 2.0;
    for _ in 0..population_size {
        out.push(w);
        w += d;
    }
    out
}

/// Random vectors on `[init_low, init_high)`, one substream per individual.
pub fn init_population(system: &LinearSystem, config: &EvolutionConfig, params: &AdaptationParams) -> Vec<Individual> {
    let n = system.dim();
    initial_omegas(config.population_size, params.omega_lo, params.omega_hi)
        .into_iter()
        .enumerate()
        .map(|(i, omega)| {
            let mut rng = substream(config.seed, TAG_INIT, i as u64, 0);
            let x = uniform_vector(&mut rng, n, config.init_low, config.init_high);
            Individual::new(system, x, omega, config.norm)
        })
        .collect()
}

/// Row-stochastic recombination matrix (row-major `N x N`) for the current errors.
///
/// For two individuals this is
///
/// ```text
/// [1.00 0.00]             [0.01 0.99]
/// [0.99 0.01]  if e1 < e2, [0.00 1.00]  otherwise.
/// ```
///
/// For larger populations the best individual (lowest error, then lowest
/// index) keeps its row of the identity and every other row blends
/// `0.99 * best + 0.01 * self`.
pub fn recombination_matrix(errors: &[f64]) -> Vec<f64> {
    let n = errors.len();
    let best = if n == 2 {
        if errors[0] < errors[1] {
            0
        } else {
            1
        }
    } else {
        (0..n)
            .min_by(|&a, &b| errors[a].total_cmp(&errors[b]).then(a.cmp(&b)))
            .unwrap_or(0)
    };
    let mut r = vec![0.0; n * n];
    for i in 0..n {
        if i == best {
            r[i * n + i] = 1.0;
        } else {
            r[i * n + best] = BLEND_BEST;
            r[i * n + i] = BLEND_SELF;
        }
    }
    r
}

/// Applies `R X` where the rows of `X` are the population's vectors.
///
/// Each output component is `sum_j r_ij x_j` accumulated in ascending `j`
/// over the nonzero weights. Omegas are carried over unchanged; errors are
/// recomputed.
pub fn recombine(population: &[Individual], system: &LinearSystem, norm: NormKind) -> Vec<Individual> {
    let errors: Vec<f64> = population.iter().map(|p| p.error).collect();
    let r = recombination_matrix(&errors);
    let n_pop = population.len();
    let n = system.dim();
    (0..n_pop)
        .map(|i| {
            let row = &r[i * n_pop..(i + 1) * n_pop];
            if let Some(j) = identity_row(row) {
                return population[j].clone();
            }
            let x: Vec<f64> = (0..n)
                .map(|k| {
                    row.iter()
                        .zip(population)
                        .filter(|(w, _)| **w != 0.0)
                        .fold(0.0, |acc, (w, p)| acc + w * p.x[k])
                })
                .collect();
            Individual::new(system, x, population[i].omega, norm)
        })
        .collect()
}

fn identity_row(row: &[f64]) -> Option<usize> {
    let mut hit = None;
    for (j, &w) in row.iter().enumerate() {
        if w == 1.0 && hit.is_none() {
            hit = Some(j);
        } else if w != 0.0 {
            return None;
        }
    }
    hit
}

/// One relaxed Jacobi sweep per individual with its own factor.
///
/// Individuals are independent, so `parallel` only changes scheduling. An
/// overflowing sweep keeps the old vector and marks the error infinite.
pub fn mutate(population: &[Individual], op: &JacobiOperator<'_>, norm: NormKind, parallel: bool) -> Vec<Individual> {
    let step = |p: &Individual| match op.sr_sweep(&p.x, p.omega) {
        Ok(x) => Individual::new(op.system(), x, p.omega, norm),
        Err(_) => Individual {
            x: p.x.clone(),
            omega: p.omega,
            error: f64::INFINITY,
        },
    };
    if parallel {
        population.par_iter().map(step).collect()
    } else {
        population.iter().map(step).collect()
    }
}

/// How offspring are grouped into pairs for adaptation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Pairing {
    /// Best with worst, second best with second worst, ...
    #[default]
    BestWorst,
    /// Neighbours in the error ranking.
    Adjacent,
}

impl std::str::FromStr for Pairing {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "best-worst" => Ok(Self::BestWorst),
            "adjacent" => Ok(Self::Adjacent),
            other => Err(crate::Error::InvalidConfig(format!("unknown pairing `{other}`"))),
        }
    }
}

/// Indices sorted by `(error, index, omega)`.
pub fn rank(population: &[Individual]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..population.len()).collect();
    idx.sort_by(|&a, &b| {
        population[a]
            .error
            .total_cmp(&population[b].error)
            .then(a.cmp(&b))
            .then(population[a].omega.total_cmp(&population[b].omega))
    });
    idx
}

/// Pairs of population indices, better-ranked member first.
pub fn pair_up(population: &[Individual], pairing: Pairing) -> Vec<(usize, usize)> {
    let order = rank(population);
    let n = order.len();
    match pairing {
        Pairing::BestWorst => (0..n / 2).map(|k| (order[k], order[n - 1 - k])).collect(),
        Pairing::Adjacent => order.chunks_exact(2).map(|c| (c[0], c[1])).collect(),
    }
}

/// Keeps the best half of the offspring and duplicates each survivor.
///
/// Every slot keeps the factor it was given during adaptation. Slots of
/// discarded individuals receive a survivor's vector: first the survivor they
/// were paired with, otherwise the next survivor (in rank order) still lacking
/// a copy.
pub fn select_reproduce(offspring: &[Individual], pairs: &[(usize, usize)]) -> Vec<Individual> {
    let n = offspring.len();
    let order = rank(offspring);
    let mut survivor = vec![false; n];
    for &i in &order[..n / 2] {
        survivor[i] = true;
    }
    let partner = |i: usize| {
        pairs.iter().find_map(|&(a, b)| match i {
            _ if i == a => Some(b),
            _ if i == b => Some(a),
            _ => None,
        })
    };

    // source[slot] = index whose vector fills the slot
    let mut source: Vec<Option<usize>> = (0..n).map(|i| survivor[i].then_some(i)).collect();
    let mut unplaced = Vec::new();
    for &s in &order[..n / 2] {
        match partner(s) {
            Some(p) if !survivor[p] && source[p].is_none() => source[p] = Some(s),
            _ => unplaced.push(s),
        }
    }
    let free: Vec<usize> = order[n / 2..]
        .iter()
        .copied()
        .filter(|&d| source[d].is_none())
        .collect();
    let mut free = free.into_iter();
    for s in unplaced {
        if let Some(d) = free.next() {
            source[d] = Some(s);
        }
    }

    (0..n)
        .map(|slot| {
            let src = &offspring[source[slot].expect("every slot is filled")];
            Individual {
                x: src.x.clone(),
                omega: offspring[slot].omega,
                error: src.error,
            }
        })
        .collect()
}
