//! Hybrid evolutionary solver with self-adapting relaxation factors.
//!
//! A population of candidate vectors, each with its own relaxation factor, is
//! evolved by
//!
//! 1. recombination towards the current best (stochastic matrix),
//! 2. mutation by one relaxed Jacobi sweep per individual,
//! 3. pairwise adaptation of the factors from the residual errors,
//! 4. truncation to the best half followed by duplication,
//!
//! until the best residual drops below `eta`. With
//! [`AdaptationMode::TimeVariant`] the adaptation steps shrink over the
//! generations; [`AdaptationMode::Uniform`] keeps them constant.

pub mod adaptation;
pub mod operators;

pub use adaptation::{adapt_pair, adapt_with_steps, btv_parameter, AdaptationMode, AdaptationParams, CLAMP_MARGIN};
pub use operators::{
    init_population, initial_omegas, mutate, pair_up, rank, recombination_matrix, recombine, select_reproduce,
    Individual, Pairing,
};

use crate::classical::{check_termination, SolveResult, Status, DEFAULT_DIVERGENCE_CAP, DEFAULT_ETA};
use crate::error::{Error, Result};
use crate::linsys::{JacobiOperator, LinearSystem, NormKind};
use crate::rng::{substream, TAG_ADAPT};

pub const DEFAULT_POPULATION: usize = 2;
pub const DEFAULT_MAX_GENERATIONS: usize = 50_000;
pub const DEFAULT_INIT_LOW: f64 = -30.0;
pub const DEFAULT_INIT_HIGH: f64 = 30.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionConfig {
    /// Even, at least 2.
    pub population_size: usize,
    pub eta: f64,
    pub max_generations: usize,
    pub seed: u64,
    pub norm: NormKind,
    pub init_low: f64,
    pub init_high: f64,
    pub divergence_cap: f64,
    pub pairing: Pairing,
    /// Mutate individuals on the rayon pool. Results are identical either way.
    pub parallel: bool,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            population_size: DEFAULT_POPULATION,
            eta: DEFAULT_ETA,
            max_generations: DEFAULT_MAX_GENERATIONS,
            seed: 0,
            norm: NormKind::Euclidean,
            init_low: DEFAULT_INIT_LOW,
            init_high: DEFAULT_INIT_HIGH,
            divergence_cap: DEFAULT_DIVERGENCE_CAP,
            pairing: Pairing::BestWorst,
            parallel: false,
        }
    }
}

impl EvolutionConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 || !self.population_size.is_multiple_of(2) {
            return Err(Error::InvalidConfig(format!(
                "population size must be even and at least 2, got {}",
                self.population_size
            )));
        }
        if !(self.init_low < self.init_high) || !self.init_low.is_finite() || !self.init_high.is_finite() {
            return Err(Error::InvalidConfig(
                "initialization interval must be finite and increasing".into(),
            ));
        }
        check_termination(self.eta, self.max_generations, self.divergence_cap)
    }
}

/// Population snapshot after a generation (generation 0 is the initial population).
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationTrace {
    pub generation: usize,
    pub best_error: f64,
    pub omegas: Vec<f64>,
    /// Step-size factor the next adaptation will use (at generation counter `generation`).
    pub t_omega: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub result: SolveResult,
    pub generations: Vec<GenerationTrace>,
}

fn snapshot(generation: usize, pop: &[Individual], params: &AdaptationParams) -> GenerationTrace {
    GenerationTrace {
        generation,
        best_error: pop.iter().map(|p| p.error).fold(f64::INFINITY, f64::min),
        omegas: pop.iter().map(|p| p.omega).collect(),
        t_omega: params.time_factor(generation as u64),
    }
}

/// Adapts every pair in place. Pair `k` at generation `t` draws from its own
/// substream `(seed, t, k)`.
pub fn adapt_population(
    offspring: &mut [Individual],
    pairs: &[(usize, usize)],
    params: &AdaptationParams,
    seed: u64,
    t: u64,
) {
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let mut rng = substream(seed, TAG_ADAPT, t, k as u64);
        let (wa, wb) = adapt_pair(
            (offspring[a].omega, offspring[a].error),
            (offspring[b].omega, offspring[b].error),
            params,
            t,
            &mut rng,
        );
        offspring[a].omega = wa;
        offspring[b].omega = wb;
    }
}

/// One full generation: recombine, mutate, adapt, select.
pub fn step_generation(
    population: &[Individual],
    op: &JacobiOperator<'_>,
    config: &EvolutionConfig,
    params: &AdaptationParams,
    t: u64,
) -> Vec<Individual> {
    let blended = recombine(population, op.system(), config.norm);
    let mut offspring = mutate(&blended, op, config.norm, config.parallel);
    let pairs = pair_up(&offspring, config.pairing);
    adapt_population(&mut offspring, &pairs, params, config.seed, t);
    select_reproduce(&offspring, &pairs)
}

/// Runs the hybrid solver until a termination test fires; `result.status` says which.
///
/// `result.iterations` counts generations, i.e. sweeps per individual.
pub fn evolve(system: &LinearSystem, config: &EvolutionConfig, params: &AdaptationParams) -> Result<Evolution> {
    config.validate()?;
    params.validate()?;
    let op = JacobiOperator::new(system);

    let mut population = init_population(system, config, params);
    let mut trace = vec![snapshot(0, &population, params)];
    let mut generation = 0usize;

    let status = loop {
        let best = trace.last().expect("trace is never empty").best_error;
        if best < config.eta {
            break Status::Converged;
        }
        if best >= config.divergence_cap {
            break Status::Diverged;
        }
        if generation == config.max_generations {
            break Status::IterationLimit;
        }
        population = step_generation(&population, &op, config, params, generation as u64);
        generation += 1;
        trace.push(snapshot(generation, &population, params));
    };

    let best = &population[rank(&population)[0]];
    Ok(Evolution {
        result: SolveResult {
            x: best.x.clone(),
            iterations: generation,
            final_error: best.error,
            status,
            trace: None,
        },
        generations: trace,
    })
}
