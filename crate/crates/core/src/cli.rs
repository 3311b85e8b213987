//! Command-line front end.
//!
//! Exit codes: 0 success, 2 mathematical failure (condition fails or a
//! target is not reached), 1 usage or input error.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::fieldmap::OddMap;
use crate::problem::{ParseError, Problem, ProblemMap, ProblemSpec, Witness};
use crate::separation::{check_condition_a, check_condition_b, subset_name};
use crate::solver::{oracle_scan, solve_targets, sweep_cube, CoverageReport, Method, SolveResult};

/// Environment variable holding the default worker count.
pub const THREADS_ENV: &str = "WELLSEP_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_FAILED: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wellsep", version, about = "Hemisphere imbalance targets for well separated densities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the separation witness of a problem file.
    CheckSeparation {
        spec: PathBuf,
        /// Samples of S(U) for a hyperplane witness.
        #[arg(long, default_value_t = 720)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find v with f(v) = t.
    Solve {
        spec: PathBuf,
        /// Comma-separated target, one component per density.
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[arg(long)]
        method: Option<String>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every target of a grid on the shrunken cube and write CSV.
    SweepCube {
        spec: PathBuf,
        /// Grid points per axis.
        #[arg(long, default_value_t = 5)]
        grid: usize,
        #[arg(long)]
        margin: Option<f64>,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustive search for m <= 2.
    Oracle {
        spec: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[arg(long, default_value_t = 400)]
        resolution: usize,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error(transparent)]
    Lib(#[from] crate::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

/// Whether the mathematical check succeeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Holds,
    Fails,
}

impl Outcome {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Outcome::Holds
        } else {
            Outcome::Fails
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Holds => EXIT_OK,
            Outcome::Fails => EXIT_FAILED,
        }
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let result = match cli.command {
        Command::CheckSeparation { spec, grid, out } => check_separation(&spec, grid, out.as_deref(), stdout),
        Command::Solve {
            spec,
            target,
            method,
            tol,
            seed,
            out,
        } => solve(&spec, &target, method.as_deref(), tol, seed, out.as_deref(), stdout),
        Command::SweepCube { spec, grid, margin, out } => sweep(&spec, grid, margin, out.as_deref(), stdout),
        Command::Oracle {
            spec,
            target,
            resolution,
            tol,
            out,
        } => oracle(&spec, &target, resolution, tol, out.as_deref(), stdout),
    };
    match result {
        Ok(o) => o.exit_code(),
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INPUT
        }
    }
}

fn load(path: &Path) -> Result<Problem, CliError> {
    let spec = ProblemSpec::load(path).map_err(|source| CliError::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(Problem::build(&spec)?)
}

fn parse_target(s: &str, m: usize) -> Result<Vec<f64>, CliError> {
    let t = crate::problem::parse_reals(s).map_err(|e| CliError::Usage(format!("--target: {e}")))?;
    if t.len() != m {
        return Err(CliError::Usage(format!(
            "--target has {} components but the problem has m = {m}",
            t.len()
        )));
    }
    if let Some(bad) = t.iter().find(|x| x.abs() > 1.0) {
        return Err(CliError::Usage(format!("--target component {bad} outside [-1, 1]")));
    }
    Ok(t)
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn emit(stdout: &mut dyn Write, text: &str) -> Result<(), CliError> {
    stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

pub fn check_separation(spec: &Path, grid: usize, out: Option<&Path>, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    let problem = load(spec)?;
    let mut report = String::from("command = check-separation\nevidence = sampled\n");
    let holds = match &problem.witness {
        None => return Err(CliError::Usage("problem file has no witness".into())),
        Some(Witness::A(w)) => {
            let r = check_condition_a(&problem.map, w, grid)?;
            let _ = writeln!(report, "witness = a\nholds = {}", r.holds);
            let _ = writeln!(report, "samples = {}\ntol_a = {}", r.n_samples, r.tol_a);
            let _ = writeln!(report, "worst_value = {}\nworst_u = {}", r.worst_value, fmt_vec(r.worst_u.coords()));
            if let Some(side) = r.support_side_holds {
                let _ = writeln!(report, "support_side_holds = {side}");
            }
            r.holds
        }
        Some(Witness::B(w)) => {
            let ProblemMap::Field(fm) = &problem.map else {
                return Err(CliError::Usage("witness (b) needs a density family".into()));
            };
            let r = check_condition_b(fm.densities(), w, fm.rule())?;
            let _ = writeln!(report, "witness = b\nholds = {}\nviolations = {}", r.holds, r.n_violations);
            for v in &r.violations {
                let _ = writeln!(
                    report,
                    "violation = density {} subset {} node {}",
                    v.density,
                    subset_name(v.subset),
                    v.node
                );
            }
            r.holds
        }
    };
    emit(stdout, &report)?;
    if let Some(path) = out {
        write_file(path, &report)?;
    }
    Ok(Outcome::from_bool(holds))
}

fn result_report(command: &str, r: &SolveResult) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "command = {command}");
    let _ = writeln!(s, "method = {}", r.method);
    let _ = writeln!(s, "converged = {}", r.converged);
    let _ = writeln!(s, "residual = {}", r.residual);
    let _ = writeln!(s, "target = {}", fmt_vec(&r.target));
    let _ = writeln!(s, "f = {}", fmt_vec(&r.f_at_v));
    let _ = writeln!(s, "v = {}", fmt_vec(r.v_star.coords()));
    let _ = writeln!(s, "n_evals = {}", r.n_evals);
    if let Some(c) = r.chi_value {
        let _ = writeln!(s, "chi = {c}");
    }
    for w in &r.warnings {
        let _ = writeln!(s, "warning = {w}");
    }
    s
}

#[allow(clippy::too_many_arguments)]
pub fn solve(
    spec: &Path,
    target: &str,
    method: Option<&str>,
    tol: Option<f64>,
    seed: Option<u64>,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let problem = load(spec)?;
    let t = parse_target(target, problem.space.m())?;
    let mut opts = problem.spec.solver.clone();
    if let Some(m) = method {
        opts.method = m.parse::<Method>()?;
    }
    if let Some(tol) = tol {
        opts.tol = tol;
    }
    if let Some(seed) = seed {
        opts.seed = seed;
    }
    let labeler = problem.labeler();
    let r = solve_targets(&problem.map, labeler.as_deref(), &t, &opts)?;
    let report = result_report("solve", &r);
    emit(stdout, &report)?;
    if let Some(path) = out {
        write_file(path, &report)?;
    }
    Ok(Outcome::from_bool(r.converged))
}

/// CSV with header `t_1..t_m,residual,converged,v_0..v_m`.
pub fn coverage_csv(report: &CoverageReport, m: usize) -> String {
    let mut s = String::new();
    let header: Vec<String> = (1..=m)
        .map(|i| format!("t_{i}"))
        .chain(["residual".to_string(), "converged".to_string()])
        .chain((0..=m).map(|j| format!("v_{j}")))
        .collect();
    s.push_str(&header.join(","));
    s.push('\n');
    for r in &report.rows {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_vec(&r.target),
            r.residual,
            r.converged,
            fmt_vec(r.v_star.coords())
        );
    }
    s
}

pub fn sweep(
    spec: &Path,
    grid: usize,
    margin: Option<f64>,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let problem = load(spec)?;
    if grid < 2 {
        return Err(CliError::Usage("--grid must be at least 2".into()));
    }
    let mut opts = problem.spec.solver.clone();
    if let Some(margin) = margin {
        opts.margin = margin;
    }
    let labeler = problem.labeler();
    let report = sweep_cube(&problem.map, labeler.as_deref(), grid, &opts)?;
    let csv = coverage_csv(&report, problem.space.m());
    match out {
        Some(path) => {
            write_file(path, &csv)?;
            let summary = format!(
                "targets = {}\nfraction_converged = {}\nmax_residual = {}\ncsv = {}\n",
                report.rows.len(),
                report.fraction_converged,
                report.max_residual,
                path.display()
            );
            emit(stdout, &summary)?;
        }
        None => emit(stdout, &csv)?,
    }
    Ok(Outcome::from_bool(report.fraction_converged == 1.0))
}

pub fn oracle(
    spec: &Path,
    target: &str,
    resolution: usize,
    tol: Option<f64>,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<Outcome, CliError> {
    let problem = load(spec)?;
    if problem.map.space().m() > 2 {
        return Err(CliError::Usage("oracle supports m <= 2".into()));
    }
    let t = parse_target(target, problem.space.m())?;
    let tol = tol.unwrap_or(problem.spec.solver.tol);
    let mut r = oracle_scan(&problem.map, &t, resolution)?;
    r.converged = r.residual <= tol;
    let report = result_report("oracle", &r);
    emit(stdout, &report)?;
    if let Some(path) = out {
        write_file(path, &report)?;
    }
    Ok(Outcome::from_bool(r.converged))
}
