//! Random test systems and the plain-text problem file format.
//!
//! ```text
//! # comment lines start with '#'
//! linsys-problem v1
//! n 2
//! a 4.0000000000000000e0 1.0000000000000000e0
//! a 1.0000000000000000e0 3.0000000000000000e0
//! b 1.0000000000000000e0 2.0000000000000000e0
//! ```
//!
//! There is one `a` line per matrix row and one `b` line. Values are written
//! with 17 significant digits, so a save/load round trip is exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::linsys::LinearSystem;
use crate::rng::{substream, TAG_PROBLEM};

pub const FORMAT_HEADER: &str = "linsys-problem v1";
pub const DEFAULT_MIN_ABS_DIAG: f64 = 1e-3;
/// The dominance margin is drawn from this fraction of the off-diagonal row sum.
pub const DD_MARGIN: (f64, f64) = (0.1, 1.0);

/// Uniform sampling ranges for a family of random systems.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemFamily {
    pub diag: (f64, f64),
    pub offdiag: (f64, f64),
    pub rhs: (f64, f64),
    /// Rescale diagonals so every row is strictly diagonally dominant.
    /// The sign of the sampled diagonal is kept, its range is not.
    pub enforce_dd: bool,
    /// Diagonal draws with smaller magnitude are redrawn.
    pub min_abs_diag: f64,
}

impl ProblemFamily {
    /// `a_ii ~ U(-70, 70)`, `a_ij ~ U(0, 7)`, `b_i ~ U(0, 70)`.
    pub fn p2() -> Self {
        Self {
            diag: (-70.0, 70.0),
            offdiag: (0.0, 7.0),
            rhs: (0.0, 70.0),
            enforce_dd: false,
            min_abs_diag: DEFAULT_MIN_ABS_DIAG,
        }
    }

    pub fn new(diag: (f64, f64), offdiag: (f64, f64), rhs: (f64, f64)) -> Self {
        Self {
            diag,
            offdiag,
            rhs,
            enforce_dd: false,
            min_abs_diag: DEFAULT_MIN_ABS_DIAG,
        }
    }

    pub fn diagonally_dominant(mut self, on: bool) -> Self {
        self.enforce_dd = on;
        self
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "p2" => Ok(Self::p2()),
            other => Err(Error::InvalidConfig(format!("unknown preset `{other}`"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("diag", self.diag), ("offdiag", self.offdiag), ("rhs", self.rhs)] {
            if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidConfig(format!(
                    "{name} range ({lo}, {hi}) is not increasing"
                )));
            }
        }
        if !(self.min_abs_diag > 0.0) {
            return Err(Error::InvalidConfig("minimum |diagonal| must be positive".into()));
        }
        let (lo, hi) = self.diag;
        if lo.abs().max(hi.abs()) <= self.min_abs_diag {
            return Err(Error::InvalidConfig(
                "diagonal range lies entirely inside the excluded band around zero".into(),
            ));
        }
        Ok(())
    }
}

/// Samples an `n x n` system from `family`; deterministic in `(family, n, seed)`.
pub fn generate(family: &ProblemFamily, n: usize, seed: u64) -> Result<LinearSystem> {
    family.validate()?;
    if n == 0 {
        return Err(Error::Empty);
    }
    let mut rng = substream(seed, TAG_PROBLEM, n as u64, 0);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = if i == j {
                loop {
                    let d = rng.random_range(family.diag.0..family.diag.1);
                    if d.abs() >= family.min_abs_diag {
                        break d;
                    }
                }
            } else {
                rng.random_range(family.offdiag.0..family.offdiag.1)
            };
        }
    }
    let b: Vec<f64> = (0..n).map(|_| rng.random_range(family.rhs.0..family.rhs.1)).collect();

    if family.enforce_dd {
        for i in 0..n {
            let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[i * n + j].abs()).sum();
            if off == 0.0 {
                continue;
            }
            let margin = rng.random_range(DD_MARGIN.0..DD_MARGIN.1) * off;
            let d = &mut a[i * n + i];
            *d = d.signum() * (off + margin);
        }
    }
    LinearSystem::new(n, a, b)
}

fn push_row(out: &mut String, tag: char, values: &[f64]) {
    out.push(tag);
    for v in values {
        let _ = write!(out, " {v:.16e}");
    }
    out.push('\n');
}

/// Renders a system in the problem file format, with optional `#` comment lines.
pub fn format_problem(system: &LinearSystem, comments: &[String]) -> String {
    let n = system.dim();
    let mut out = String::with_capacity((n + 1) * n * 25 + 64);
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    let _ = writeln!(out, "{FORMAT_HEADER}");
    let _ = writeln!(out, "n {n}");
    for i in 0..n {
        push_row(&mut out, 'a', system.row(i));
    }
    push_row(&mut out, 'b', system.rhs());
    out
}

pub fn save_problem(system: &LinearSystem, path: &Path) -> Result<()> {
    save_problem_with_comments(system, path, &[])
}

pub fn save_problem_with_comments(system: &LinearSystem, path: &Path, comments: &[String]) -> Result<()> {
    fs::write(path, format_problem(system, comments)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn load_problem(path: &Path) -> Result<LinearSystem> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_problem(&text)
}

fn parse_values(line_no: usize, rest: &str) -> Result<Vec<f64>> {
    rest.split_whitespace()
        .map(|tok| {
            tok.parse::<f64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("`{tok}` is not a number"),
            })
        })
        .collect()
}

/// Parses the problem file format. Line numbers in errors are 1-based.
pub fn parse_problem(text: &str) -> Result<LinearSystem> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    match lines.next() {
        Some((_, FORMAT_HEADER)) => {}
        Some((line, other)) => {
            return Err(Error::Parse {
                line,
                message: format!("expected `{FORMAT_HEADER}`, found `{other}`"),
            })
        }
        None => return Err(Error::Structure("empty file".into())),
    }

    let n = match lines.next() {
        Some((line, l)) => {
            let (tag, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
            if tag != "n" {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `n <dimension>`, found `{l}`"),
                });
            }
            rest.trim().parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("`{}` is not a dimension", rest.trim()),
            })?
        }
        None => return Err(Error::Structure("missing dimension line".into())),
    };
    if n == 0 {
        return Err(Error::Structure("dimension must be positive".into()));
    }

    let mut a = Vec::with_capacity(n * n);
    let mut rows = 0usize;
    let mut b: Option<Vec<f64>> = None;
    for (line, l) in lines {
        let (tag, rest) = l.split_once(char::is_whitespace).unwrap_or((l, ""));
        match tag {
            "a" => {
                if b.is_some() {
                    return Err(Error::Structure(format!(
                        "line {line}: matrix row after right-hand side"
                    )));
                }
                let row = parse_values(line, rest)?;
                rows += 1;
                if rows > n {
                    return Err(Error::Structure(format!("more than n = {n} matrix rows")));
                }
                if row.len() != n {
                    return Err(Error::Structure(format!(
                        "line {line}: matrix row has {} entries, expected {n}",
                        row.len()
                    )));
                }
                a.extend(row);
            }
            "b" => {
                if b.is_some() {
                    return Err(Error::Structure(format!("line {line}: duplicate right-hand side")));
                }
                let v = parse_values(line, rest)?;
                if v.len() != n {
                    return Err(Error::Structure(format!(
                        "line {line}: right-hand side has {} entries, expected {n}",
                        v.len()
                    )));
                }
                b = Some(v);
            }
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown record `{other}`"),
                })
            }
        }
    }
    if rows != n {
        return Err(Error::Structure(format!("found {rows} matrix rows, expected {n}")));
    }
    let b = b.ok_or_else(|| Error::Structure("missing right-hand side".into()))?;
    LinearSystem::new(n, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p2_ranges() {
        let f = ProblemFamily::p2();
        assert_eq!(f.diag, (-70.0, 70.0));
        assert_eq!(f.offdiag, (0.0, 7.0));
        assert_eq!(f.rhs, (0.0, 70.0));
    }

    #[test]
    fn generated_entries_stay_in_range() {
        let f = ProblemFamily::p2();
        let s = generate(&f, 60, 5).unwrap();
        for i in 0..60 {
            for j in 0..60 {
                let v = s.get(i, j);
                if i == j {
                    assert!((-70.0..70.0).contains(&v) && v.abs() >= f.min_abs_diag);
                } else {
                    assert!((0.0..7.0).contains(&v));
                }
            }
        }
        assert!(s.rhs().iter().all(|v| (0.0..70.0).contains(v)));
    }

    #[test]
    fn dominance_is_enforced() {
        for seed in 0..20 {
            let s = generate(&ProblemFamily::p2().diagonally_dominant(true), 30, seed).unwrap();
            assert!(s.is_strictly_diagonally_dominant());
        }
        assert!(!generate(&ProblemFamily::p2(), 100, 1)
            .unwrap()
            .is_strictly_diagonally_dominant());
    }

    #[test]
    fn generation_is_deterministic() {
        let f = ProblemFamily::p2().diagonally_dominant(true);
        assert_eq!(generate(&f, 40, 9).unwrap(), generate(&f, 40, 9).unwrap());
        assert_ne!(generate(&f, 40, 9).unwrap(), generate(&f, 40, 10).unwrap());
    }

    #[test]
    fn zero_band_diagonals_are_redrawn() {
        let f = ProblemFamily {
            min_abs_diag: 0.9,
            ..ProblemFamily::new((-1.0, 1.0), (0.0, 1.0), (0.0, 1.0))
        };
        let s = generate(&f, 50, 3).unwrap();
        assert!((0..50).all(|i| s.get(i, i).abs() >= 0.9));
    }

    #[test]
    fn offdiagonal_mean_within_four_sigma() {
        let s = generate(&ProblemFamily::p2(), 101, 77).unwrap();
        let off: Vec<f64> = (0..101)
            .flat_map(|i| (0..101).filter(move |&j| j != i).map(move |j| (i, j)))
            .take(10_000)
            .map(|(i, j)| s.get(i, j))
            .collect();
        assert_eq!(off.len(), 10_000);
        let mean = off.iter().sum::<f64>() / off.len() as f64;
        let sd = 7.0 / 12f64.sqrt();
        assert!((mean - 3.5).abs() < 4.0 * sd / 100.0, "mean {mean}");
    }

    #[test]
    fn invalid_families_are_rejected() {
        assert!(generate(&ProblemFamily::new((1.0, 1.0), (0.0, 1.0), (0.0, 1.0)), 3, 0).is_err());
        let f = ProblemFamily {
            min_abs_diag: 5.0,
            ..ProblemFamily::new((-1.0, 1.0), (0.0, 1.0), (0.0, 1.0))
        };
        assert!(generate(&f, 3, 0).is_err());
    }

    const SAMPLE: &str = "# two unknowns\nlinsys-problem v1\nn 2\na 4 1\n\na 1 3\nb 1 2\n";

    #[test]
    fn parses_sample_with_comments_and_blank_lines() {
        let s = parse_problem(SAMPLE).unwrap();
        assert_eq!(s.matrix(), &[4.0, 1.0, 1.0, 3.0]);
        assert_eq!(s.rhs(), &[1.0, 2.0]);
    }

    #[test]
    fn too_many_rows_is_structural() {
        let text = "linsys-problem v1\nn 2\na 4 1\na 1 3\na 1 1\nb 1 2\n";
        assert!(matches!(parse_problem(text), Err(Error::Structure(_))));
        let text = "linsys-problem v1\nn 2\na 4 1\nb 1 2\n";
        assert!(matches!(parse_problem(text), Err(Error::Structure(_))));
        let text = "linsys-problem v1\nn 2\na 4 1\na 1 3\nb 1\n";
        assert!(matches!(parse_problem(text), Err(Error::Structure(_))));
    }

    #[test]
    fn bad_token_reports_line() {
        let text = "linsys-problem v1\n# note\nn 2\na 4 1\na 1 x3\nb 1 2\n";
        match parse_problem(text) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 5);
                assert!(message.contains("x3"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_problem("linsys-problem v9\n"),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn file_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.lin");
        let s = generate(&ProblemFamily::p2().diagonally_dominant(true), 25, 4).unwrap();
        save_problem_with_comments(&s, &path, &["seed 4".into()]).unwrap();
        let back = load_problem(&path).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(back.matrix()), bits(s.matrix()));
        assert_eq!(bits(back.rhs()), bits(s.rhs()));
    }

    #[test]
    fn missing_file_names_path() {
        let err = load_problem(Path::new("/nonexistent/p.lin")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/p.lin"));
    }
}
