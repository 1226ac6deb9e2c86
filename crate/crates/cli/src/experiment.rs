//! Single solves and repeated-trial reports.

use std::fmt::Write as _;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use hybrid_sr_core::rng::start_vector;
use hybrid_sr_core::{evolve, gauss_seidel_sr_solve, jacobi_sr_solve, GenerationTrace, LinearSystem, Status};

use crate::keyvalue::Settings;
use crate::params::{Algorithm, ProblemSource, SolverParams, PROBLEM_KEYS, SOLVER_KEYS};

/// Result of one solve with its trace rendered as CSV.
#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: Status,
    pub iterations: usize,
    pub final_error: f64,
    pub x: Vec<f64>,
    /// CSV text: `generation,best_error,omega_1..omega_N,t_omega` for the
    /// hybrids, `iteration,error,omega` for the classical solvers.
    pub trace_csv: String,
    /// Every relaxation factor that appeared in the run, generation by generation.
    pub omegas: Vec<Vec<f64>>,
}

/// Runs `params.algorithm` once. `seed` drives the start vector(s) and any
/// adaptation randomness.
pub fn solve_once(system: &LinearSystem, params: &SolverParams, seed: u64) -> Result<SolveOutcome> {
    if params.algorithm.is_hybrid() {
        let ev = evolve(system, &params.evolution_config(seed), &params.adaptation_params())?;
        Ok(SolveOutcome {
            status: ev.result.status,
            iterations: ev.result.iterations,
            final_error: ev.result.final_error,
            trace_csv: hybrid_trace_csv(&ev.generations, params.pop),
            omegas: ev.generations.iter().map(|g| g.omegas.clone()).collect(),
            x: ev.result.x,
        })
    } else {
        let x0 = start_vector(seed, system.dim(), params.init_low, params.init_high);
        let cfg = params.solve_config(true);
        let r = match params.algorithm {
            Algorithm::Jacobi => jacobi_sr_solve(system, &x0, &cfg)?,
            _ => gauss_seidel_sr_solve(system, &x0, &cfg)?,
        };
        let omega = cfg.omega;
        let mut csv = String::from("iteration,error,omega\n");
        for (k, e) in r.trace.as_deref().unwrap_or_default() {
            let _ = writeln!(csv, "{k},{e},{omega}");
        }
        Ok(SolveOutcome {
            status: r.status,
            iterations: r.iterations,
            final_error: r.final_error,
            trace_csv: csv,
            omegas: vec![vec![omega]; r.iterations + 1],
            x: r.x,
        })
    }
}

pub fn hybrid_trace_csv(trace: &[GenerationTrace], pop: usize) -> String {
    let mut csv = String::from("generation,best_error");
    for i in 1..=pop {
        let _ = write!(csv, ",omega_{i}");
    }
    csv.push_str(",t_omega\n");
    for g in trace {
        let _ = write!(csv, "{},{}", g.generation, g.best_error);
        for w in &g.omegas {
            let _ = write!(csv, ",{w}");
        }
        let _ = writeln!(csv, ",{}", g.t_omega);
    }
    csv
}

/// Protocol for repeated trials on one fixed problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub problem: ProblemSource,
    pub solver: SolverParams,
    pub trials: usize,
    /// Trial `i` runs with seed `trial_seed_base + i`.
    pub trial_seed_base: u64,
    /// Adds wall-clock times to the trial rows (makes reports run-dependent).
    #[serde(skip)]
    pub timing: bool,
}

pub const EXPERIMENT_KEYS: &[&str] = &["trials", "seed", "timing"];

impl ExperimentConfig {
    /// Builds a config from settings; keys for outputs and scheduling are
    /// accepted but not part of the experiment.
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let known: Vec<&str> = SOLVER_KEYS
            .iter()
            .chain(PROBLEM_KEYS)
            .chain(EXPERIMENT_KEYS)
            .chain(&["out", "trace-dir", "jobs"])
            .copied()
            .collect();
        s.reject_unknown(&known)?;
        let trials: usize = s.get_or("trials", 10)?;
        if trials == 0 {
            bail!("trials must be at least 1");
        }
        Ok(Self {
            problem: ProblemSource::from_settings(s)?,
            solver: SolverParams::from_settings(s)?,
            trials,
            trial_seed_base: s.get_or("seed", 0)?,
            timing: s.get_bool("timing")?,
        })
    }

    pub fn trial_seed(&self, trial: usize) -> u64 {
        self.trial_seed_base.wrapping_add(trial as u64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub trial: usize,
    pub seed: u64,
    pub status: &'static str,
    pub iterations: usize,
    /// `null` in JSON when infinite.
    pub final_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationStats {
    pub mean: f64,
    pub median: f64,
    pub min: usize,
    pub max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregates {
    pub trials: usize,
    pub converged: usize,
    pub convergence_fraction: f64,
    /// Over converged trials only; `null` when none converged.
    pub iterations: Option<IterationStats>,
}

impl Aggregates {
    pub fn from_rows(rows: &[TrialRow]) -> Self {
        let mut its: Vec<usize> = rows
            .iter()
            .filter(|r| r.status == Status::Converged.as_str())
            .map(|r| r.iterations)
            .collect();
        its.sort_unstable();
        let converged = its.len();
        let iterations = (!its.is_empty()).then(|| IterationStats {
            mean: its.iter().sum::<usize>() as f64 / converged as f64,
            median: median_sorted(&its),
            min: its[0],
            max: its[converged - 1],
        });
        Self {
            trials: rows.len(),
            converged,
            convergence_fraction: converged as f64 / rows.len().max(1) as f64,
            iterations,
        }
    }
}

/// Median of a sorted, nonempty slice (mean of the middle two for even length).
pub fn median_sorted(v: &[usize]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2] as f64
    } else {
        (v[n / 2 - 1] + v[n / 2]) as f64 / 2.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub trials: Vec<TrialRow>,
    pub aggregates: Aggregates,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Report plus the per-trial trace CSVs, in trial order.
#[derive(Debug, Clone)]
pub struct BenchOutput {
    pub report: ExperimentReport,
    pub traces: Vec<String>,
    /// Per-trial relaxation factors, as in [`SolveOutcome::omegas`].
    pub omegas: Vec<Vec<Vec<f64>>>,
}

/// Runs all trials on up to `jobs` threads. Output order and content do not
/// depend on `jobs`.
pub fn run_bench(config: &ExperimentConfig, system: &LinearSystem, jobs: usize) -> Result<BenchOutput> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .context("building worker pool")?;
    let results: Vec<Result<(TrialRow, SolveOutcome)>> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|trial| {
                let seed = config.trial_seed(trial);
                let start = Instant::now();
                let out = solve_once(system, &config.solver, seed).with_context(|| format!("trial {trial} failed"))?;
                let elapsed = start.elapsed().as_secs_f64() * 1e3;
                let row = TrialRow {
                    trial,
                    seed,
                    status: out.status.as_str(),
                    iterations: out.iterations,
                    final_error: out.final_error,
                    wall_clock_ms: config.timing.then_some(elapsed),
                };
                Ok((row, out))
            })
            .collect()
    });

    let mut rows = Vec::with_capacity(config.trials);
    let mut traces = Vec::with_capacity(config.trials);
    let mut omegas = Vec::with_capacity(config.trials);
    for r in results {
        let (row, out) = r?;
        rows.push(row);
        traces.push(out.trace_csv);
        omegas.push(out.omegas);
    }
    let aggregates = Aggregates::from_rows(&rows);
    Ok(BenchOutput {
        report: ExperimentReport {
            config: config.clone(),
            trials: rows,
            aggregates,
        },
        traces,
        omegas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(status: Status, iterations: usize) -> TrialRow {
        TrialRow {
            trial: 0,
            seed: 0,
            status: status.as_str(),
            iterations,
            final_error: 0.0,
            wall_clock_ms: None,
        }
    }

    #[test]
    fn aggregates_skip_unconverged() {
        let rows = vec![
            row(Status::Converged, 4),
            row(Status::Diverged, 100),
            row(Status::Converged, 10),
            row(Status::Converged, 7),
            row(Status::IterationLimit, 50),
        ];
        let a = Aggregates::from_rows(&rows);
        assert_eq!(a.converged, 3);
        assert_eq!(a.convergence_fraction, 0.6);
        let it = a.iterations.unwrap();
        assert_eq!((it.min, it.max, it.median, it.mean), (4, 10, 7.0, 7.0));
        assert_eq!(median_sorted(&[1, 2, 3, 10]), 2.5);
        assert!(Aggregates::from_rows(&[row(Status::Diverged, 1)]).iterations.is_none());
    }

    #[test]
    fn identity_problem_converges_everywhere() {
        let s = LinearSystem::identity(vec![1.0, 2.0, 3.0]).unwrap();
        let mut kv = Settings::new();
        kv.set("algorithm", "jacobi");
        kv.set("omega", 1.0);
        let p = SolverParams::from_settings(&kv).unwrap();
        let out = solve_once(&s, &p, 1).unwrap();
        assert_eq!(out.status, Status::Converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.trace_csv.lines().count(), 1 + out.iterations + 1);
        assert!(out.trace_csv.starts_with("iteration,error,omega\n0,"));
    }

    #[test]
    fn hybrid_trace_header() {
        let s = LinearSystem::identity(vec![1.0, 2.0]).unwrap();
        let mut kv = Settings::new();
        kv.set("algorithm", "jbtva");
        kv.set("pop", 4);
        let p = SolverParams::from_settings(&kv).unwrap();
        let out = solve_once(&s, &p, 1).unwrap();
        let header = out.trace_csv.lines().next().unwrap();
        assert_eq!(header, "generation,best_error,omega_1,omega_2,omega_3,omega_4,t_omega");
        assert_eq!(out.trace_csv.lines().count(), out.iterations + 2);
    }
}
