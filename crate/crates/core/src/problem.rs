//! Problem instances and the `.problem` file format.
//!
//! A problem file is TOML:
//!
//! ```toml
//! [problem]
//! alpha = 2.5          # or a constant expression string, e.g. "5/2"
//! eta = 0.5
//! p = 1.5
//! a = "exp(t)"
//! f = "0.5*t*ln(u+1)"
//!
//! [discretization]     # optional
//! panels = 256
//! points_per_panel = 4
//! grading = 2.0
//! interpolation = "cubic"
//!
//! [solver]             # optional
//! tol = 1e-10
//! max_iter = 500
//! damping = 1.0
//!
//! [cone]               # optional
//! rho = 0.5
//! ```

use std::fmt::Write as _;
use std::ops::Range;
use std::sync::Arc;

use serde::Deserialize;
use thiserror::Error;
use toml::Spanned;

use crate::exprlang::{self, Expr, Var};
use crate::greens::KernelParams;
use crate::plaplacian::Exponent;
use crate::quadrature::{Grading, Interpolation, Partition, QuadratureError};

/// A load or validation failure, with the 1-based line when known.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{}{message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
pub struct ProblemError {
    pub line: Option<usize>,
    pub message: String,
}

impl ProblemError {
    fn new(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }

    fn at(line: Option<usize>, message: impl Into<String>) -> Self {
        Self { line, message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discretization {
    pub panels: usize,
    pub points_per_panel: usize,
    /// Exponent of the two-sided grading of the solution grid.
    pub grading: f64,
    pub interpolation: Interpolation,
}

impl Default for Discretization {
    fn default() -> Self {
        Self { panels: 256, points_per_panel: 4, grading: 2.0, interpolation: Interpolation::Cubic }
    }
}

impl Discretization {
    pub fn partition(&self) -> Result<Arc<Partition>, QuadratureError> {
        Partition::new(self.panels, Grading::TowardBoth(self.grading)).map(Arc::new)
    }

    fn validate(&self) -> Result<(), String> {
        if self.panels < crate::quadrature::MIN_PANELS {
            return Err(format!("panels must be at least {}, got {}", crate::quadrature::MIN_PANELS, self.panels));
        }
        if !(1..=64).contains(&self.points_per_panel) {
            return Err(format!("points_per_panel must be in 1..=64, got {}", self.points_per_panel));
        }
        if !(self.grading.is_finite() && self.grading >= 1.0) {
            return Err(format!("grading must be >= 1, got {}", self.grading));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    pub tol: f64,
    pub max_iter: usize,
    /// Relaxation weight ω ∈ (0, 1].
    pub damping: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 500, damping: 1.0 }
    }
}

impl SolverSettings {
    fn validate(&self) -> Result<(), String> {
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return Err("max_iter must be positive".into());
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(format!("damping must lie in (0, 1], got {}", self.damping));
        }
        Ok(())
    }
}

pub const DEFAULT_RHO: f64 = 0.5;

/// Lattice used to sample the sign conditions on a and f at load time.
const SIGN_LATTICE_T: usize = 64;
const SIGN_LATTICE_U: [f64; 12] = [0.0, 1e-6, 0.01, 0.1, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0, 1000.0];

/// One boundary value problem instance with its numerical settings.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    kernel: KernelParams,
    p: Exponent,
    a: Expr,
    f: Expr,
    pub discretization: Discretization,
    pub solver: SolverSettings,
    pub rho: f64,
}

impl Problem {
    /// Validates orders, variables and the sign of a and f on a sampling lattice.
    pub fn new(alpha: f64, eta: f64, p: f64, a: Expr, f: Expr) -> Result<Self, ProblemError> {
        let kernel = KernelParams::new(alpha, eta).map_err(|e| ProblemError::new(e.message))?;
        let p = Exponent::new(p).map_err(|_| ProblemError::new(format!("p must be > 1, got {p}")))?;
        if a.variables().contains(&Var::U) {
            return Err(ProblemError::new("a may depend on t only"));
        }
        let pb = Self {
            kernel,
            p,
            a,
            f,
            discretization: Discretization::default(),
            solver: SolverSettings::default(),
            rho: DEFAULT_RHO,
        };
        pb.check_signs()?;
        Ok(pb)
    }

    pub fn parse_exprs(alpha: f64, eta: f64, p: f64, a: &str, f: &str) -> Result<Self, ProblemError> {
        let a = exprlang::parse(a).map_err(|e| ProblemError::new(format!("a: {e}")))?;
        let f = exprlang::parse(f).map_err(|e| ProblemError::new(format!("f: {e}")))?;
        Self::new(alpha, eta, p, a, f)
    }

    fn check_signs(&self) -> Result<(), ProblemError> {
        for i in 0..=SIGN_LATTICE_T {
            let t = i as f64 / SIGN_LATTICE_T as f64;
            let a = self.a.eval(t, 0.0).map_err(|e| ProblemError::new(format!("a({t}): {e}")))?;
            if a < 0.0 {
                return Err(ProblemError::new(format!("a must be nonnegative, a({t}) = {a}")));
            }
            for &u in &SIGN_LATTICE_U {
                let f = self.f.eval(t, u).map_err(|e| ProblemError::new(format!("f({t}, {u}): {e}")))?;
                if f < 0.0 {
                    return Err(ProblemError::new(format!("f must be nonnegative, f({t}, {u}) = {f}")));
                }
            }
        }
        Ok(())
    }

    pub fn with_discretization(mut self, d: Discretization) -> Result<Self, ProblemError> {
        d.validate().map_err(ProblemError::new)?;
        self.discretization = d;
        Ok(self)
    }

    pub fn with_solver(mut self, s: SolverSettings) -> Result<Self, ProblemError> {
        s.validate().map_err(ProblemError::new)?;
        self.solver = s;
        Ok(self)
    }

    pub fn with_rho(mut self, rho: f64) -> Result<Self, ProblemError> {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(ProblemError::new(format!("rho must lie in (0, 1), got {rho}")));
        }
        self.rho = rho;
        Ok(self)
    }

    pub fn kernel(&self) -> &KernelParams {
        &self.kernel
    }

    pub fn alpha(&self) -> f64 {
        self.kernel.alpha()
    }

    pub fn eta(&self) -> f64 {
        self.kernel.eta()
    }

    pub fn p(&self) -> Exponent {
        self.p
    }

    pub fn q(&self) -> Exponent {
        self.p.conjugate()
    }

    pub fn a(&self) -> &Expr {
        &self.a
    }

    pub fn f(&self) -> &Expr {
        &self.f
    }

    /// Reads a problem file.
    pub fn from_toml(text: &str) -> Result<Self, ProblemError> {
        let lines = &LineIndex::new(text);
        let raw: RawFile = toml::from_str(text)
            .map_err(|e| ProblemError::at(e.span().map(|s| lines.line(s.start)), e.message().to_string()))?;

        let num = |v: &Spanned<NumOrExpr>, key: &str| -> Result<f64, ProblemError> {
            let line = Some(lines.line(v.span().start));
            match v.get_ref() {
                NumOrExpr::Num(x) => Ok(*x),
                NumOrExpr::Text(s) => {
                    let e = exprlang::parse(s).map_err(|e| ProblemError::at(line, format!("{key}: {e}")))?;
                    if !e.variables().is_empty() {
                        return Err(ProblemError::at(line, format!("{key} must be a constant expression")));
                    }
                    e.eval(0.0, 0.0).map_err(|e| ProblemError::at(line, format!("{key}: {e}")))
                }
            }
        };
        let expr = |v: &Spanned<String>, key: &str| -> Result<Expr, ProblemError> {
            let line = lines.line(v.span().start);
            exprlang::parse(v.get_ref()).map_err(|e| ProblemError::at(Some(line), format!("{key}: {e}")))
        };
        let located = |span: Range<usize>| move |e: ProblemError| ProblemError::at(Some(lines.line(span.start)), e.message);

        let pr = &raw.problem;
        let alpha = num(&pr.alpha, "alpha")?;
        let eta = num(&pr.eta, "eta")?;
        let p = num(&pr.p, "p")?;
        let a = expr(&pr.a, "a")?;
        let f = expr(&pr.f, "f")?;

        KernelParams::new(alpha, eta).map_err(|e| {
            let span = if !(alpha > 2.0 && alpha <= 3.0) { pr.alpha.span() } else { pr.eta.span() };
            ProblemError::at(Some(lines.line(span.start)), e.message)
        })?;
        if !(p > 1.0) {
            return Err(ProblemError::at(Some(lines.line(pr.p.span().start)), format!("p must be > 1, got {p}")));
        }
        if a.variables().contains(&Var::U) {
            return Err(ProblemError::at(Some(lines.line(pr.a.span().start)), "a may depend on t only"));
        }
        let mut pb = Problem::new(alpha, eta, p, a, f).map_err(|e| {
            let span = if e.message.starts_with("a") { pr.a.span() } else { pr.f.span() };
            located(span)(e)
        })?;

        if let Some(spanned) = &raw.discretization {
            let (d, span) = (spanned.get_ref(), spanned.span());
            let mut disc = Discretization::default();
            if let Some(v) = d.panels {
                disc.panels = v;
            }
            if let Some(v) = d.points_per_panel {
                disc.points_per_panel = v;
            }
            if let Some(v) = &d.grading {
                disc.grading = num(v, "grading")?;
            }
            if let Some(v) = &d.interpolation {
                disc.interpolation = match v.get_ref().as_str() {
                    "cubic" => Interpolation::Cubic,
                    "linear" => Interpolation::Linear,
                    other => {
                        return Err(ProblemError::at(
                            Some(lines.line(v.span().start)),
                            format!("interpolation must be \"cubic\" or \"linear\", got \"{other}\""),
                        ))
                    }
                };
            }
            pb = pb.with_discretization(disc).map_err(located(span))?;
        }
        if let Some(spanned) = &raw.solver {
            let (s, span) = (spanned.get_ref(), spanned.span());
            let mut settings = SolverSettings::default();
            if let Some(v) = &s.tol {
                settings.tol = num(v, "tol")?;
            }
            if let Some(v) = s.max_iter {
                settings.max_iter = v;
            }
            if let Some(v) = &s.damping {
                settings.damping = num(v, "damping")?;
            }
            pb = pb.with_solver(settings).map_err(located(span))?;
        }
        if let Some(c) = &raw.cone {
            if let Some(v) = &c.rho {
                let rho = num(v, "rho")?;
                pb = pb.with_rho(rho).map_err(located(v.span()))?;
            }
        }
        Ok(pb)
    }

    /// Canonical problem file text; [`Problem::from_toml`] reloads it exactly.
    pub fn to_toml(&self) -> String {
        let d = &self.discretization;
        let s = &self.solver;
        let mut out = String::new();
        let _ = writeln!(out, "[problem]");
        let _ = writeln!(out, "alpha = {:?}", self.alpha());
        let _ = writeln!(out, "eta = {:?}", self.eta());
        let _ = writeln!(out, "p = {:?}", self.p.value());
        let _ = writeln!(out, "a = \"{}\"", self.a);
        let _ = writeln!(out, "f = \"{}\"", self.f);
        let _ = writeln!(out, "\n[discretization]");
        let _ = writeln!(out, "panels = {}", d.panels);
        let _ = writeln!(out, "points_per_panel = {}", d.points_per_panel);
        let _ = writeln!(out, "grading = {:?}", d.grading);
        let interp = match d.interpolation {
            Interpolation::Cubic => "cubic",
            Interpolation::Linear => "linear",
        };
        let _ = writeln!(out, "interpolation = \"{interp}\"");
        let _ = writeln!(out, "\n[solver]");
        let _ = writeln!(out, "tol = {:?}", s.tol);
        let _ = writeln!(out, "max_iter = {}", s.max_iter);
        let _ = writeln!(out, "damping = {:?}", s.damping);
        let _ = writeln!(out, "\n[cone]");
        let _ = writeln!(out, "rho = {:?}", self.rho);
        out
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NumOrExpr {
    Num(f64),
    Text(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    problem: RawProblem,
    discretization: Option<Spanned<RawDiscretization>>,
    solver: Option<Spanned<RawSolver>>,
    cone: Option<RawCone>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    alpha: Spanned<NumOrExpr>,
    eta: Spanned<NumOrExpr>,
    p: Spanned<NumOrExpr>,
    a: Spanned<String>,
    f: Spanned<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDiscretization {
    panels: Option<usize>,
    points_per_panel: Option<usize>,
    grading: Option<Spanned<NumOrExpr>>,
    interpolation: Option<Spanned<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    tol: Option<Spanned<NumOrExpr>>,
    max_iter: Option<usize>,
    damping: Option<Spanned<NumOrExpr>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCone {
    rho: Option<Spanned<NumOrExpr>>,
}

struct LineIndex {
    starts: Vec<usize>,
}

impl LineIndex {
    fn new(text: &str) -> Self {
        let mut starts = vec![0];
        starts.extend(text.match_indices('\n').map(|(i, _)| i + 1));
        Self { starts }
    }

    /// 1-based line of a byte offset.
    fn line(&self, offset: usize) -> usize {
        self.starts.partition_point(|&s| s <= offset)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[problem]\nalpha = \"5/2\"\neta = 0.5\np = 1.5\na = \"exp(t)\"\nf = \"0.5*t*ln(u + 1)\"\n";

    fn line_of(text: &str) -> Option<usize> {
        Problem::from_toml(text).unwrap_err().line
    }

    #[test]
    fn minimal_file_takes_defaults() {
        let pb = Problem::from_toml(MINIMAL).unwrap();
        assert_eq!(pb.alpha(), 2.5);
        assert_eq!(pb.q().value(), 3.0);
        assert_eq!(pb.discretization, Discretization::default());
        assert_eq!(pb.solver, SolverSettings::default());
        assert_eq!(pb.rho, DEFAULT_RHO);
    }

    #[test]
    fn canonical_text_round_trips() {
        let text = format!(
            "{MINIMAL}[discretization]\npanels = 64\ninterpolation = \"linear\"\n[solver]\ntol = \"1/1000\"\n[cone]\nrho = 0.25\n"
        );
        let pb = Problem::from_toml(&text).unwrap();
        assert_eq!(pb.discretization.panels, 64);
        assert_eq!(pb.solver.tol, 1e-3);
        let again = Problem::from_toml(&pb.to_toml()).unwrap();
        assert_eq!(again, pb);
        assert_eq!(again.to_toml(), pb.to_toml());
    }

    #[test]
    fn errors_point_at_the_offending_line() {
        assert_eq!(line_of(&MINIMAL.replace("\"5/2\"", "3.5")), Some(2));
        assert_eq!(line_of(&MINIMAL.replace("eta = 0.5", "eta = 1.0")), Some(3));
        assert_eq!(line_of(&MINIMAL.replace("p = 1.5", "p = 1")), Some(4));
        assert_eq!(line_of(&MINIMAL.replace("exp(t)", "exp(u)")), Some(5));
        assert_eq!(line_of(&MINIMAL.replace("ln(u + 1)", "ln(u + ")), Some(6));
        assert_eq!(line_of(&MINIMAL.replace("0.5*t", "-t")), Some(6));
        assert_eq!(line_of(&MINIMAL.replace("\"5/2\"", "\"t\"")), Some(2));
        assert_eq!(line_of(&format!("{MINIMAL}[cone]\nrho = 1.5\n")), Some(8));
        assert_eq!(line_of(&format!("{MINIMAL}[discretization]\ninterpolation = \"spline\"\n")), Some(8));
    }

    #[test]
    fn unknown_and_missing_keys_are_rejected() {
        let e = Problem::from_toml(&format!("{MINIMAL}beta = 1\n")).unwrap_err();
        assert!(e.message.contains("beta"), "{e}");
        assert_eq!(e.line, Some(7));
        let e = Problem::from_toml(&MINIMAL.replace("p = 1.5\n", "")).unwrap_err();
        assert!(e.message.contains('p'), "{e}");
    }

    #[test]
    fn settings_are_validated() {
        let pb = Problem::from_toml(MINIMAL).unwrap();
        assert!(pb.clone().with_discretization(Discretization { panels: 2, ..Default::default() }).is_err());
        assert!(pb.clone().with_discretization(Discretization { grading: 0.5, ..Default::default() }).is_err());
        assert!(pb.clone().with_solver(SolverSettings { damping: 0.0, ..Default::default() }).is_err());
        assert!(pb.clone().with_solver(SolverSettings { max_iter: 0, ..Default::default() }).is_err());
        assert!(pb.clone().with_rho(0.0).is_err());
        assert!(pb.with_rho(0.9).is_ok());
    }
}
