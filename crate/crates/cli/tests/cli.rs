use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hybrid-sr"))
        .args(args)
        .env_remove("RUST_BACKTRACE")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_identity(path: &Path) {
    fs::write(path, "linsys-problem v1\nn 3\na 1 0 0\na 0 1 0\na 0 0 1\nb 1 2 3\n").unwrap();
}

#[test]
fn generate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.lin");
    let b = dir.path().join("b.lin");
    let c = dir.path().join("c.lin");
    for (path, seed) in [(&a, "7"), (&b, "7"), (&c, "8")] {
        ok(&[
            "generate",
            "--n",
            "20",
            "--seed",
            seed,
            "--enforce-dd",
            "--out",
            p(path),
        ]);
    }
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert_ne!(text, fs::read_to_string(&c).unwrap());
    assert_eq!(text.lines().filter(|l| l.starts_with("a ")).count(), 20);
    assert!(text.lines().any(|l| l == "n 20"));
}

#[test]
fn generate_accepts_custom_ranges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.lin");
    ok(&[
        "generate",
        "--n",
        "4",
        "--diag",
        "1,2",
        "--offdiag",
        "-0.1,0.1",
        "--rhs",
        "-1,1",
        "--out",
        p(&out),
    ]);
    let text = fs::read_to_string(&out).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|l| l.starts_with("a "))
        .map(|l| l[2..].split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect();
    for (i, row) in rows.iter().enumerate() {
        assert!((1.0..2.0).contains(&row[i]));
    }
}

#[test]
fn solve_identity_problem() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("id.lin");
    write_identity(&problem);
    let trace = dir.path().join("trace.csv");
    let stdout = ok(&[
        "solve",
        "--problem",
        p(&problem),
        "--algorithm",
        "jacobi",
        "--omega",
        "1",
        "--trace",
        p(&trace),
    ]);
    assert!(stdout.contains("status: converged"), "{stdout}");
    assert!(stdout.contains("iterations: 1"), "{stdout}");
    let csv = fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("iteration,error,omega\n"));
    assert_eq!(csv.lines().count(), 3);

    let stdout = ok(&["solve", "--problem", p(&problem), "--algorithm", "jbtva", "--pop", "4"]);
    assert!(stdout.contains("status: converged"), "{stdout}");
}

#[test]
fn omega_is_rejected_for_hybrids() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("id.lin");
    write_identity(&problem);
    let out = run(&[
        "solve",
        "--problem",
        p(&problem),
        "--algorithm",
        "jbtva",
        "--omega",
        "1.2",
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--omega"));

    let out = run(&[
        "solve",
        "--problem",
        p(&problem),
        "--algorithm",
        "jacobi",
        "--lambda",
        "20",
    ]);
    assert!(!out.status.success());
}

#[test]
fn large_omega_diverges() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("id.lin");
    write_identity(&problem);
    let stdout = ok(&[
        "solve",
        "--problem",
        p(&problem),
        "--algorithm",
        "jacobi",
        "--omega",
        "2.5",
    ]);
    assert!(stdout.contains("status: diverged"), "{stdout}");
}

#[test]
fn malformed_problem_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("bad.lin");
    fs::write(&problem, "linsys-problem v1\nn 2\na 1 0\na 0 x\nb 1 1\n").unwrap();
    let out = run(&["solve", "--problem", p(&problem), "--algorithm", "jacobi"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));
}

#[test]
fn spectra_on_identity() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("id.lin");
    write_identity(&problem);
    let stdout = ok(&["spectra", "--problem", p(&problem), "--omegas", "0.5,1,1.5"]);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "omega,rho,norm_inf,status");
    assert_eq!(lines.len(), 4);
    // H = (1 - w) I
    for (line, expected) in lines[1..].iter().zip([0.5, 0.0, 0.5]) {
        let fields: Vec<&str> = line.split(',').collect();
        let rho: f64 = fields[1].parse().unwrap();
        assert!((rho - expected).abs() < 1e-9, "{line}");
        assert_eq!(fields[3], "ok");
    }

    let out = dir.path().join("grid.csv");
    ok(&["spectra", "--problem", p(&problem), "--out", p(&out)]);
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 40);
}

#[test]
fn bench_single_trial() {
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("id.lin");
    write_identity(&problem);
    let report = dir.path().join("report.json");
    let traces = dir.path().join("traces");
    ok(&[
        "bench",
        "--problem",
        p(&problem),
        "--algorithm",
        "jbua",
        "--trials",
        "1",
        "--out",
        p(&report),
        "--trace-dir",
        p(&traces),
    ]);
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(json["aggregates"]["trials"], 1);
    assert_eq!(json["aggregates"]["converged"], 1);
    assert_eq!(json["aggregates"]["convergence_fraction"], 1.0);
    assert_eq!(json["config"]["solver"]["algorithm"], "jbua");
    assert!(json["trials"][0].get("wall_clock_ms").is_none());
    assert!(traces.join("trial_000.csv").exists());
}

#[test]
fn bench_config_file_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.cfg");
    fs::write(
        &config,
        "# small experiment\nalgorithm = jacobi\nomega = 1.0\nn = 15\nenforce-dd = true\ntrials = 5\n",
    )
    .unwrap();
    let stdout = ok(&["bench", "--config", p(&config), "--trials", "3", "--timing"]);
    let json: serde_json::Value = serde_json::from_str(&stdout).unwrap();
    assert_eq!(json["config"]["trials"], 3);
    assert_eq!(json["config"]["problem"]["kind"], "generated");
    assert_eq!(json["trials"].as_array().unwrap().len(), 3);
    assert!(json["trials"][0]["wall_clock_ms"].is_number());

    fs::write(&config, "algorithm = jacobi\nbogus = 1\nn = 5\n").unwrap();
    assert!(!run(&["bench", "--config", p(&config)]).status.success());
}
