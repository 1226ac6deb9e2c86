//! Solver and problem settings resolved from [`Settings`].

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use hybrid_sr_core::classical::{DEFAULT_DIVERGENCE_CAP, DEFAULT_ETA, DEFAULT_MAX_ITERS};
use hybrid_sr_core::evo::adaptation::{DEFAULT_E_X, DEFAULT_E_Y, DEFAULT_LAMBDA};
use hybrid_sr_core::evo::{DEFAULT_INIT_HIGH, DEFAULT_INIT_LOW, DEFAULT_POPULATION};
use hybrid_sr_core::{
    generate, load_problem, AdaptationMode, AdaptationParams, EvolutionConfig, LinearSystem, NormKind, Pairing,
    ProblemFamily, SolveConfig,
};

use crate::keyvalue::Settings;

pub const SOLVER_KEYS: &[&str] = &[
    "algorithm",
    "omega",
    "eta",
    "max-iters",
    "norm",
    "divergence-cap",
    "init-low",
    "init-high",
    "pop",
    "omega-lo",
    "omega-hi",
    "ex",
    "ey",
    "lambda",
    "pairing",
];

const HYBRID_ONLY: &[&str] = &["pop", "omega-lo", "omega-hi", "ex", "ey", "lambda", "pairing"];

pub const PROBLEM_KEYS: &[&str] = &[
    "problem",
    "preset",
    "n",
    "problem-seed",
    "enforce-dd",
    "diag",
    "offdiag",
    "rhs",
    "min-abs-diag",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Jacobi,
    GaussSeidel,
    Jbua,
    Jbtva,
}

impl Algorithm {
    pub fn is_hybrid(self) -> bool {
        matches!(self, Algorithm::Jbua | Algorithm::Jbtva)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Jacobi => "jacobi",
            Algorithm::GaussSeidel => "gauss_seidel",
            Algorithm::Jbua => "jbua",
            Algorithm::Jbtva => "jbtva",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "jacobi" => Algorithm::Jacobi,
            "gauss_seidel" | "gauss-seidel" | "gs" => Algorithm::GaussSeidel,
            "jbua" => Algorithm::Jbua,
            "jbtva" => Algorithm::Jbtva,
            other => bail!("unknown algorithm `{other}` (expected jacobi, gauss_seidel, jbua or jbtva)"),
        })
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Everything needed to run one solve except the seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverParams {
    pub algorithm: Algorithm,
    /// Fixed relaxation factor; classical solvers only.
    pub omega: Option<f64>,
    pub eta: f64,
    pub max_iters: usize,
    #[serde(serialize_with = "ser_display")]
    pub norm: NormKind,
    pub divergence_cap: f64,
    pub init_low: f64,
    pub init_high: f64,
    pub pop: usize,
    pub omega_lo: f64,
    pub omega_hi: f64,
    pub ex: f64,
    pub ey: f64,
    pub lambda: f64,
    #[serde(serialize_with = "ser_pairing")]
    pub pairing: Pairing,
}

fn ser_display<S: serde::Serializer, T: std::fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn ser_pairing<S: serde::Serializer>(p: &Pairing, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match p {
        Pairing::BestWorst => "best-worst",
        Pairing::Adjacent => "adjacent",
    })
}

impl SolverParams {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        let algorithm: Algorithm = s
            .get("algorithm")?
            .context("missing `algorithm` (jacobi, gauss_seidel, jbua or jbtva)")?;
        if algorithm.is_hybrid() && s.contains("omega") {
            bail!("--omega only applies to jacobi and gauss_seidel; {algorithm} adapts its own factors");
        }
        if !algorithm.is_hybrid() {
            if let Some(k) = HYBRID_ONLY.iter().find(|k| s.contains(k)) {
                bail!("--{k} only applies to jbua and jbtva");
            }
        }
        let params = Self {
            algorithm,
            omega: if algorithm.is_hybrid() {
                None
            } else {
                Some(s.get_or("omega", 1.0)?)
            },
            eta: s.get_or("eta", DEFAULT_ETA)?,
            max_iters: s.get_or("max-iters", DEFAULT_MAX_ITERS)?,
            norm: s.get_or("norm", NormKind::Euclidean)?,
            divergence_cap: s.get_or("divergence-cap", DEFAULT_DIVERGENCE_CAP)?,
            init_low: s.get_or("init-low", DEFAULT_INIT_LOW)?,
            init_high: s.get_or("init-high", DEFAULT_INIT_HIGH)?,
            pop: s.get_or("pop", DEFAULT_POPULATION)?,
            omega_lo: s.get_or("omega-lo", 0.0)?,
            omega_hi: s.get_or("omega-hi", 2.0)?,
            ex: s.get_or("ex", DEFAULT_E_X)?,
            ey: s.get_or("ey", DEFAULT_E_Y)?,
            lambda: s.get_or("lambda", DEFAULT_LAMBDA)?,
            pairing: s.get_or("pairing", Pairing::BestWorst)?,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithm.is_hybrid() {
            self.evolution_config(0).validate()?;
            self.adaptation_params().validate()?;
        } else {
            self.solve_config(false).validate()?;
            if !(self.init_low < self.init_high) {
                bail!("init-low must be below init-high");
            }
        }
        Ok(())
    }

    pub fn solve_config(&self, record_trace: bool) -> SolveConfig {
        SolveConfig {
            omega: self.omega.unwrap_or(1.0),
            eta: self.eta,
            max_iters: self.max_iters,
            norm: self.norm,
            divergence_cap: self.divergence_cap,
            record_trace,
        }
    }

    pub fn evolution_config(&self, seed: u64) -> EvolutionConfig {
        EvolutionConfig {
            population_size: self.pop,
            eta: self.eta,
            max_generations: self.max_iters,
            seed,
            norm: self.norm,
            init_low: self.init_low,
            init_high: self.init_high,
            divergence_cap: self.divergence_cap,
            pairing: self.pairing,
            parallel: false,
        }
    }

    pub fn adaptation_params(&self) -> AdaptationParams {
        AdaptationParams {
            omega_lo: self.omega_lo,
            omega_hi: self.omega_hi,
            e_x: self.ex,
            e_y: self.ey,
            lambda: self.lambda,
            mode: match self.algorithm {
                Algorithm::Jbua => AdaptationMode::Uniform,
                _ => AdaptationMode::TimeVariant,
            },
        }
    }
}

/// Where the system for an experiment comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSource {
    File {
        path: PathBuf,
    },
    Generated {
        n: usize,
        seed: u64,
        diag: (f64, f64),
        offdiag: (f64, f64),
        rhs: (f64, f64),
        enforce_dd: bool,
        min_abs_diag: f64,
    },
}

impl ProblemSource {
    pub fn from_settings(s: &Settings) -> Result<Self> {
        if let Some(path) = s.raw("problem") {
            if let Some(k) = PROBLEM_KEYS[1..].iter().find(|k| s.contains(k)) {
                bail!("`{k}` conflicts with `problem = {path}`");
            }
            return Ok(ProblemSource::File { path: path.into() });
        }
        let family = family_from_settings(s)?;
        Ok(ProblemSource::Generated {
            n: s.get("n")?.context("missing `n` for a generated problem")?,
            seed: s.get_or("problem-seed", 0)?,
            diag: family.diag,
            offdiag: family.offdiag,
            rhs: family.rhs,
            enforce_dd: family.enforce_dd,
            min_abs_diag: family.min_abs_diag,
        })
    }

    pub fn load(&self) -> Result<LinearSystem> {
        match self {
            ProblemSource::File { path } => Ok(load_problem(path)?),
            ProblemSource::Generated {
                n,
                seed,
                diag,
                offdiag,
                rhs,
                enforce_dd,
                min_abs_diag,
            } => {
                let family = ProblemFamily {
                    diag: *diag,
                    offdiag: *offdiag,
                    rhs: *rhs,
                    enforce_dd: *enforce_dd,
                    min_abs_diag: *min_abs_diag,
                };
                Ok(generate(&family, *n, *seed)?)
            }
        }
    }
}

/// A family from `preset` (default `p2`) with `diag`/`offdiag`/`rhs` overrides.
pub fn family_from_settings(s: &Settings) -> Result<ProblemFamily> {
    let mut family = ProblemFamily::preset(s.raw("preset").unwrap_or("p2"))?;
    if let Some(r) = s.get_range("diag")? {
        family.diag = r;
    }
    if let Some(r) = s.get_range("offdiag")? {
        family.offdiag = r;
    }
    if let Some(r) = s.get_range("rhs")? {
        family.rhs = r;
    }
    if let Some(m) = s.get("min-abs-diag")? {
        family.min_abs_diag = m;
    }
    family.enforce_dd = s.get_bool("enforce-dd")?;
    family.validate()?;
    Ok(family)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_reference_settings() {
        let mut s = Settings::new();
        s.set("algorithm", "jbtva");
        let p = SolverParams::from_settings(&s).unwrap();
        assert_eq!(p.eta, 1e-6);
        assert_eq!(p.max_iters, 50_000);
        assert_eq!((p.pop, p.omega_lo, p.omega_hi), (2, 0.0, 2.0));
        assert_eq!((p.ex, p.ey, p.lambda), (0.125, 0.03125, 50.0));
        assert_eq!(p.adaptation_params().mode, AdaptationMode::TimeVariant);
    }

    #[test]
    fn flag_combinations() {
        let mut s = Settings::new();
        s.set("algorithm", "jbtva");
        s.set("omega", 1.2);
        assert!(SolverParams::from_settings(&s).is_err());

        let mut s = Settings::new();
        s.set("algorithm", "jacobi");
        s.set("lambda", 20);
        assert!(SolverParams::from_settings(&s).is_err());

        let mut s = Settings::new();
        s.set("algorithm", "gauss-seidel");
        s.set("omega", 2.5);
        let p = SolverParams::from_settings(&s).unwrap();
        assert_eq!(p.algorithm, Algorithm::GaussSeidel);
        assert_eq!(p.omega, Some(2.5));

        let mut s = Settings::new();
        s.set("algorithm", "jbua");
        s.set("pop", 3);
        assert!(SolverParams::from_settings(&s).is_err());
    }

    #[test]
    fn problem_sources() {
        let mut s = Settings::new();
        s.set("n", 5);
        s.set("enforce-dd", true);
        let src = ProblemSource::from_settings(&s).unwrap();
        assert!(src.load().unwrap().is_strictly_diagonally_dominant());

        s.set("problem", "x.lin");
        assert!(ProblemSource::from_settings(&s).is_err());
        assert!(ProblemSource::from_settings(&Settings::new()).is_err());
    }
}
