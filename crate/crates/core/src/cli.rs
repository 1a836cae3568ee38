//! Command-line front end.
//!
//! Reports are `key = value` lines. Exit status: 0 on success, 1 when
//! hypotheses fail or the solver does not converge, 2 on input errors.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::exprlang;
use crate::plaplacian::phi;
use crate::problem::Problem;
use crate::quadrature::{GridFunction, Partition};
use crate::solver::{self, ConvergenceBasis, SolveReport};
use crate::theorems::{self, ConeParams, KrasnoselskiiVariant, TheoremId, TheoremParams, TheoremReport};
use crate::verify::{self, VerificationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

const EX41: &str = include_str!("../fixtures/ex41.problem");
const EX42: &str = include_str!("../fixtures/ex42.problem");
const EX43: &str = include_str!("../fixtures/ex43.problem");

#[derive(Debug, Parser)]
#[command(name = "fracbvp", version, about = "Solve and check three-point fractional p-Laplacian boundary value problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve by damped Picard iteration and verify the result.
    Solve {
        /// Problem file (TOML)
        problem: PathBuf,
        /// Write the solution as CSV (header `t,u`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the number of grid panels.
        #[arg(long)]
        panels: Option<usize>,
        /// Override the convergence tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// Check this theorem first and label the run with the result.
        #[arg(long)]
        theorem: Option<String>,
        #[command(flatten)]
        params: TheoremArgs,
    },
    /// Check the hypotheses of one theorem.
    Check {
        /// Problem file (TOML)
        problem: PathBuf,
        /// One of 3.1, 3.2, 3.3, 3.4, 3.5
        #[arg(long)]
        theorem: String,
        #[command(flatten)]
        params: TheoremArgs,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a saved CSV solution against the integral form and boundary conditions.
    Verify {
        /// Problem file (TOML)
        problem: PathBuf,
        /// CSV written by `solve --out`
        #[arg(long)]
        solution: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run one of the bundled examples.
    Reproduce {
        example: Example,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the canonical problem file.
    Dump {
        /// Problem file (TOML)
        problem: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Example {
    Ex41,
    Ex42,
    Ex43,
}

#[derive(Debug, Clone, Default, Args)]
struct TheoremArgs {
    /// Cone parameter ρ in (0, 1) (3.1, 3.2; default from the problem file)
    #[arg(long)]
    rho: Option<f64>,
    /// Inner radius ρ₁ (3.1, 3.2)
    #[arg(long)]
    rho1: Option<f64>,
    /// Outer radius ρ₂ (3.1, 3.2)
    #[arg(long)]
    rho2: Option<f64>,
    /// Slope M₁ (3.1, 3.2; default Λ₁)
    #[arg(long = "M1")]
    m1: Option<f64>,
    /// Slope M₂ (3.1, 3.2; default Λ₂)
    #[arg(long = "M2")]
    m2: Option<f64>,
    /// Radius ν (3.3)
    #[arg(long)]
    nu: Option<f64>,
    /// Lipschitz constant L of f in u (3.5)
    #[arg(long = "L")]
    l: Option<f64>,
    /// Envelope k(t) with f ≤ k, as an expression in t (3.5)
    #[arg(long = "k-env")]
    k_env: Option<String>,
    /// Lower-bound scale μ in a f ≥ μσt^(σ-1) (3.4)
    #[arg(long)]
    mu: Option<f64>,
    /// Lower-bound exponent σ (3.4)
    #[arg(long)]
    sigma: Option<f64>,
    /// Lipschitz constant k of f in u (3.4)
    #[arg(long)]
    k: Option<f64>,
}

/// Failure that maps to an exit code.
#[derive(Debug)]
enum Failure {
    Input(String),
    Numeric(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NegativeIterate { .. } => Failure::Numeric(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

type Outcome = std::result::Result<(String, i32), Failure>;

fn run_theorem(pb: &Problem, id: TheoremId, a: &TheoremArgs) -> std::result::Result<TheoremReport, Failure> {
    let k_env = match a.k_env.as_deref() {
        Some(text) => Some(exprlang::parse(text).map_err(|e| Failure::Input(format!("--k-env: {e}")))?),
        None => None,
    };
    let params = TheoremParams {
        rho: a.rho,
        rho1: a.rho1,
        rho2: a.rho2,
        m1: a.m1,
        m2: a.m2,
        nu: a.nu,
        l: a.l,
        k_env,
        mu: a.mu,
        sigma: a.sigma,
        k: a.k,
    };
    Ok(theorems::check(pb, id, &params)?)
}

fn load(path: &Path) -> std::result::Result<Problem, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    Problem::from_toml(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// `t,u` CSV at 17 significant digits.
pub fn solution_csv(u: &GridFunction) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "u"]).expect("in-memory write");
    for (t, v) in u.nodes().iter().zip(u.values()) {
        w.write_record([format!("{t:.16e}"), format!("{v:.16e}")]).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Reads a `t,u` CSV back onto the problem's interpolation rule.
pub fn read_solution_csv(text: &str, pb: &Problem) -> Result<GridFunction, String> {
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = r.headers().map_err(|e| e.to_string())?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "u"] {
        return Err(format!("expected header \"t,u\", found \"{}\"", headers.iter().collect::<Vec<_>>().join(",")));
    }
    let (mut ts, mut us) = (Vec::new(), Vec::new());
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        let line = i + 2;
        let field = |j: usize| -> Result<f64, String> {
            let s = rec.get(j).ok_or_else(|| format!("line {line}: missing column"))?;
            s.parse::<f64>().map_err(|_| format!("line {line}: \"{s}\" is not a number"))
        };
        ts.push(field(0)?);
        us.push(field(1)?);
    }
    let partition = Partition::from_nodes(ts).map_err(|e| e.to_string())?;
    GridFunction::new(Arc::new(partition), us, pb.discretization.interpolation).map_err(|e| e.to_string())
}

fn solve_lines(out: &mut String, r: &SolveReport) {
    let _ = writeln!(out, "converged = {}", r.converged);
    let _ = writeln!(out, "iterations = {}", r.iterations);
    let _ = writeln!(out, "final_gap = {:e}", r.successive_diffs.last().copied().unwrap_or(0.0));
    let _ = writeln!(out, "residual = {:e}", r.residual);
    let _ = writeln!(out, "damping = {:?}", r.damping);
    let _ = writeln!(out, "damping_fallback = {}", r.damping_fallback);
    let _ = writeln!(out, "basis = {}", r.basis.label());
    let _ = writeln!(out, "nodes = {}", r.solution.nodes().len());
    let _ = writeln!(out, "u_at_0 = {:?}", r.solution.values()[0]);
}

fn prefixed(out: &mut String, prefix: &str, text: &str) {
    for line in text.lines() {
        let _ = writeln!(out, "{prefix}.{line}");
    }
}

fn basis_from(report: Option<&TheoremReport>) -> ConvergenceBasis {
    match report {
        Some(r) if r.holds() && r.theorem.is_contraction() => ConvergenceBasis::ContractionCertified,
        Some(r) if r.holds() => ConvergenceBasis::ExistenceCertified,
        _ => ConvergenceBasis::Unchecked,
    }
}

fn solve_and_verify(pb: &Problem, certificate: Option<&TheoremReport>) -> std::result::Result<(SolveReport, VerificationReport), Failure> {
    let mut r = solver::solve(pb)?;
    r.basis = basis_from(certificate);
    let v = verify::verify(pb, &r.solution)?;
    Ok((r, v))
}

fn cmd_solve(
    problem: &Path,
    out: Option<&Path>,
    panels: Option<usize>,
    tol: Option<f64>,
    theorem: Option<&str>,
    params: &TheoremArgs,
) -> Outcome {
    let mut pb = load(problem)?;
    if let Some(n) = panels {
        let d = crate::problem::Discretization { panels: n, ..pb.discretization };
        pb = pb.with_discretization(d).map_err(|e| Failure::Input(format!("--panels: {e}")))?;
    }
    if let Some(t) = tol {
        let s = crate::problem::SolverSettings { tol: t, ..pb.solver };
        pb = pb.with_solver(s).map_err(|e| Failure::Input(format!("--tol: {e}")))?;
    }
    let certificate = match theorem {
        Some(id) => Some(run_theorem(&pb, id.parse()?, params)?),
        None => None,
    };
    let (r, v) = solve_and_verify(&pb, certificate.as_ref())?;
    let mut text = String::new();
    if let Some(c) = &certificate {
        let _ = writeln!(text, "certificate = {} {}", c.theorem, c.verdict());
    }
    solve_lines(&mut text, &r);
    prefixed(&mut text, "verify", &v.to_string());
    if let Some(path) = out {
        fs::write(path, solution_csv(&r.solution)).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
        let _ = writeln!(text, "solution_csv = {}", path.display());
    }
    Ok((text, if r.converged { EXIT_OK } else { EXIT_FAIL }))
}

fn cmd_check(problem: &Path, theorem: &str, params: &TheoremArgs) -> Outcome {
    let pb = load(problem)?;
    let report = run_theorem(&pb, theorem.parse()?, params)?;
    Ok((report.to_string(), if report.holds() { EXIT_OK } else { EXIT_FAIL }))
}

fn cmd_verify(problem: &Path, solution: &Path) -> Outcome {
    let pb = load(problem)?;
    let text = fs::read_to_string(solution).map_err(|e| Failure::Input(format!("{}: {e}", solution.display())))?;
    let u = read_solution_csv(&text, &pb).map_err(|e| Failure::Input(format!("{}: {e}", solution.display())))?;
    Ok((verify::verify(&pb, &u)?.to_string(), EXIT_OK))
}

/// Runs a bundled example: theorem check, solve, verify.
fn cmd_reproduce(example: Example) -> Outcome {
    let (name, source) = match example {
        Example::Ex41 => ("ex41", EX41),
        Example::Ex42 => ("ex42", EX42),
        Example::Ex43 => ("ex43", EX43),
    };
    let pb = Problem::from_toml(source).map_err(|e| Failure::Input(e.to_string()))?;
    let mut text = String::new();
    let _ = writeln!(text, "example = {name}");
    let report = match example {
        Example::Ex41 => theorems::check_leray_schauder(&pb, 1.0)?,
        Example::Ex42 => {
            let k_env = exprlang::parse("exp(-t)").expect("static expression");
            theorems::check_contraction_small_p(&pb, &k_env, 2.0)?
        }
        Example::Ex43 => {
            let l1 = theorems::lambda1(&pb)?;
            let closed = 15.0 * crate::specialfn::gamma(0.5).map_err(Error::from)? / 28.0;
            let _ = writeln!(text, "lambda1 = {l1:?}");
            let _ = writeln!(text, "lambda1_closed_form = {closed:?}");
            let _ = writeln!(text, "M1_pow_p_minus_1 = {:?}", phi(pb.p(), l1));
            let params = ConeParams { rho: pb.rho, rho1: 1.0 / 120.0, rho2: 1.0, m1: None, m2: None };
            theorems::check_krasnoselskii(&pb, params, KrasnoselskiiVariant::Expansive)?
        }
    };
    prefixed(&mut text, "check", &report.to_string());
    let (r, v) = solve_and_verify(&pb, Some(&report))?;
    prefixed(&mut text, "solve", &{
        let mut s = String::new();
        solve_lines(&mut s, &r);
        s
    });
    prefixed(&mut text, "verify", &v.to_string());
    let mut ok = report.holds() && r.converged;
    if let Example::Ex43 = example {
        let (lo, hi) = (report.value("rho1").unwrap_or(0.0), report.value("rho2").unwrap_or(0.0));
        let inside = lo < v.sup_norm && v.sup_norm < hi;
        let _ = writeln!(text, "norm_in_annulus = {inside}");
        ok &= inside;
    }
    let _ = writeln!(text, "verdict = {}", report.verdict());
    Ok((text, if ok { EXIT_OK } else { EXIT_FAIL }))
}

fn dispatch(command: Command) -> (Outcome, Option<PathBuf>) {
    match command {
        Command::Solve { problem, out, panels, tol, theorem, params } => {
            (cmd_solve(&problem, out.as_deref(), panels, tol, theorem.as_deref(), &params), None)
        }
        Command::Check { problem, theorem, params, out } => (cmd_check(&problem, &theorem, &params), out),
        Command::Verify { problem, solution, out } => (cmd_verify(&problem, &solution), out),
        Command::Reproduce { example, out } => (cmd_reproduce(example), out),
        Command::Dump { problem, out } => (load(&problem).map(|pb| (pb.to_toml(), EXIT_OK)), out),
    }
}

/// Runs the CLI with explicit output streams.
pub fn run_with<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let (outcome, out) = dispatch(cli.command);
    match outcome {
        Ok((text, code)) => {
            let written = match &out {
                Some(path) => fs::write(path, &text).map_err(|e| format!("{}: {e}", path.display())),
                None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => code,
                Err(e) => {
                    let _ = writeln!(stderr, "error: {e}");
                    EXIT_INPUT
                }
            }
        }
        Err(Failure::Input(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_INPUT
        }
        Err(Failure::Numeric(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_FAIL
        }
    }
}

/// Runs the CLI on the process streams and returns the exit code.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut io::stdout().lock(), &mut io::stderr().lock())
}
