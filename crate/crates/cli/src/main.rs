use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use hybrid_sr_cli::params::{family_from_settings, PROBLEM_KEYS, SOLVER_KEYS};
use hybrid_sr_cli::{run_bench, solve_once, spectra, ExperimentConfig, Settings, SolverParams};
use hybrid_sr_core::problem::save_problem_with_comments;
use hybrid_sr_core::{generate, load_problem};

#[derive(Parser)]
#[command(
    name = "hybrid-sr",
    version,
    about = "Relaxed Jacobi / SOR and hybrid evolutionary linear solvers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Sample a random system and write it as a problem file.
    Generate(GenerateArgs),
    /// Run one solver on a problem file.
    Solve(SolveArgs),
    /// Repeat a solver over seeded trials and write a JSON report.
    Bench(BenchArgs),
    /// Tabulate rho(H) and ||H||_inf over a grid of relaxation factors.
    Spectra(SpectraArgs),
}

#[derive(Args)]
struct FamilyArgs {
    /// Sampling preset.
    #[arg(long)]
    preset: Option<String>,
    /// Diagonal range `lo,hi`.
    #[arg(long, allow_hyphen_values = true)]
    diag: Option<String>,
    /// Off-diagonal range `lo,hi`.
    #[arg(long, allow_hyphen_values = true)]
    offdiag: Option<String>,
    /// Right-hand side range `lo,hi`.
    #[arg(long, allow_hyphen_values = true)]
    rhs: Option<String>,
    /// Rescale diagonals to make every row strictly diagonally dominant.
    #[arg(long)]
    enforce_dd: bool,
    #[arg(long)]
    min_abs_diag: Option<f64>,
}

impl FamilyArgs {
    fn fill(&self, s: &mut Settings) {
        s.set_opt("preset", self.preset.as_ref());
        s.set_opt("diag", self.diag.as_ref());
        s.set_opt("offdiag", self.offdiag.as_ref());
        s.set_opt("rhs", self.rhs.as_ref());
        s.set_opt("min-abs-diag", self.min_abs_diag);
        if self.enforce_dd {
            s.set("enforce-dd", true);
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Default)]
struct SolverArgs {
    /// jacobi, gauss_seidel, jbua or jbtva.
    #[arg(long)]
    algorithm: Option<String>,
    /// Fixed relaxation factor (classical solvers).
    #[arg(long, allow_hyphen_values = true)]
    omega: Option<f64>,
    /// Threshold error.
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// l2 or linf.
    #[arg(long)]
    norm: Option<String>,
    #[arg(long)]
    divergence_cap: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    init_low: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    init_high: Option<f64>,
    /// Population size (even).
    #[arg(long)]
    pop: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    omega_lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    omega_hi: Option<f64>,
    #[arg(long)]
    ex: Option<f64>,
    #[arg(long)]
    ey: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// best-worst or adjacent.
    #[arg(long)]
    pairing: Option<String>,
}

impl SolverArgs {
    fn fill(&self, s: &mut Settings) {
        s.set_opt("algorithm", self.algorithm.as_ref());
        s.set_opt("omega", self.omega);
        s.set_opt("eta", self.eta);
        s.set_opt("max-iters", self.max_iters);
        s.set_opt("norm", self.norm.as_ref());
        s.set_opt("divergence-cap", self.divergence_cap);
        s.set_opt("init-low", self.init_low);
        s.set_opt("init-high", self.init_high);
        s.set_opt("pop", self.pop);
        s.set_opt("omega-lo", self.omega_lo);
        s.set_opt("omega-hi", self.omega_hi);
        s.set_opt("ex", self.ex);
        s.set_opt("ey", self.ey);
        s.set_opt("lambda", self.lambda);
        s.set_opt("pairing", self.pairing.as_ref());
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    problem: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Seed for the start vector and adaptation.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the convergence trace CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Accepted for symmetry with `bench`; a single solve runs on one thread.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct BenchArgs {
    /// Experiment file of `key = value` lines; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
    #[arg(long)]
    problem: Option<PathBuf>,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    problem_seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    /// Base trial seed; trial i uses seed + i.
    #[arg(long)]
    seed: Option<u64>,
    /// Report path (JSON). Printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for per-trial trace CSVs.
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Record wall-clock time per trial in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct SpectraArgs {
    #[arg(long)]
    problem: PathBuf,
    /// Explicit grid, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    omegas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.05)]
    omega_from: f64,
    #[arg(long, default_value_t = 1.95)]
    omega_to: f64,
    #[arg(long, default_value_t = 39)]
    omega_steps: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
    /// CSV path. Printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_generate(args: GenerateArgs) -> Result<()> {
    let mut s = Settings::new();
    args.family.fill(&mut s);
    let family = family_from_settings(&s)?;
    let system = generate(&family, args.n, args.seed)?;
    let comments = vec![
        format!(
            "generated: n={} seed={} diag=({},{}) offdiag=({},{}) rhs=({},{})",
            args.n,
            args.seed,
            family.diag.0,
            family.diag.1,
            family.offdiag.0,
            family.offdiag.1,
            family.rhs.0,
            family.rhs.1
        ),
        format!("diagonals rescaled for dominance: {}", family.enforce_dd),
    ];
    save_problem_with_comments(&system, &args.out, &comments)?;
    eprintln!("wrote {} ({} unknowns)", args.out.display(), args.n);
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let mut s = Settings::new();
    args.solver.fill(&mut s);
    s.reject_unknown(SOLVER_KEYS)?;
    let params = SolverParams::from_settings(&s)?;
    let system = load_problem(&args.problem)?;
    let out = solve_once(&system, &params, args.seed)?;
    println!("algorithm: {}", params.algorithm);
    println!("status: {}", out.status);
    println!("iterations: {}", out.iterations);
    println!("final_error: {:e}", out.final_error);
    if let Some(path) = &args.trace {
        write_file(path, &out.trace_csv)?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<()> {
    let mut s = match &args.config {
        Some(path) => Settings::load(path)?,
        None => Settings::new(),
    };
    let mut flags = Settings::new();
    args.solver.fill(&mut flags);
    args.family.fill(&mut flags);
    flags.set_opt("problem", args.problem.as_ref().map(|p| p.display()));
    flags.set_opt("n", args.n);
    flags.set_opt("problem-seed", args.problem_seed);
    flags.set_opt("trials", args.trials);
    flags.set_opt("seed", args.seed);
    flags.set_opt("out", args.out.as_ref().map(|p| p.display()));
    flags.set_opt("trace-dir", args.trace_dir.as_ref().map(|p| p.display()));
    flags.set_opt("jobs", args.jobs);
    if args.timing {
        flags.set("timing", true);
    }
    // a --problem flag replaces any generated-problem keys from the file, and vice versa
    if flags.contains("problem") {
        s = strip(s, &PROBLEM_KEYS[1..]);
    } else if PROBLEM_KEYS[1..].iter().any(|k| flags.contains(k)) {
        s = strip(s, &["problem"]);
    }
    s.merge_from(&flags);

    let config = ExperimentConfig::from_settings(&s)?;
    let jobs: usize = s.get_or("jobs", 1)?;
    let system = config.problem.load()?;
    let out = run_bench(&config, &system, jobs)?;
    let json = out.report.to_json();
    match s.raw("out") {
        Some(path) => write_file(Path::new(path), &json)?,
        None => print!("{json}"),
    }
    if let Some(dir) = s.raw("trace-dir") {
        let dir = Path::new(dir);
        for (i, csv) in out.traces.iter().enumerate() {
            write_file(&dir.join(format!("trial_{i:03}.csv")), csv)?;
        }
    }
    let a = &out.report.aggregates;
    match &a.iterations {
        Some(it) => eprintln!(
            "{}: {}/{} converged, iterations median {} mean {} (min {}, max {})",
            config.solver.algorithm, a.converged, a.trials, it.median, it.mean, it.min, it.max
        ),
        None => eprintln!("{}: 0/{} converged", config.solver.algorithm, a.trials),
    }
    Ok(())
}

fn strip(mut s: Settings, keys: &[&str]) -> Settings {
    for k in keys {
        s.remove(k);
    }
    s
}

fn cmd_spectra(args: SpectraArgs) -> Result<()> {
    let system = load_problem(&args.problem)?;
    let grid = match args.omegas {
        Some(g) => g,
        None => spectra::linear_grid(args.omega_from, args.omega_to, args.omega_steps)?,
    };
    let rows = spectra::scan(&system, &grid, args.tol, args.max_iters)?;
    let csv = spectra::to_csv(&rows);
    match &args.out {
        Some(path) => write_file(path, &csv)?,
        None => print!("{csv}"),
    }
    let failed = rows.iter().filter(|r| !r.converged).count();
    if failed > 0 {
        eprintln!("warning: {failed} grid point(s) did not reach tol; best estimates reported");
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(a) => cmd_generate(a),
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Spectra(a) => cmd_spectra(a),
    }
}
