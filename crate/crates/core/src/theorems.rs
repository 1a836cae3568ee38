//! Λ₁, Λ₂ and mechanical checks of the existence and uniqueness theorems.
//!
//! Inequalities on f are semi-decided by sampling: a failure comes with the
//! witness point, a success holds up to the lattice density recorded in the
//! report.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exprlang::{Expr, Var};
use crate::plaplacian::phi;
use crate::problem::Problem;
use crate::quadrature::{CompositeRule, GaussLegendre, Grading};
use crate::specialfn::{beta, gamma};

/// Side of the t × u lattice used for extrema of f over a box.
pub const BOX_LATTICE: usize = 201;
/// t samples used for conditions over the unbounded strip [0,1] × [0,∞).
pub const STRIP_T_SAMPLES: usize = 101;
const STRIP_DENSE_MAX: f64 = 10.0;
const STRIP_DENSE_STEPS: usize = 4000;
const STRIP_TAIL_MAX: f64 = 1e4;
const STRIP_TAIL_STEPS: usize = 100;

const GOLDEN_SWEEPS: usize = 3;
const GOLDEN_ITERS: usize = 48;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TheoremId {
    /// Cone expansion (Krasnosel'skii).
    T31,
    /// Cone compression (Krasnosel'skii).
    T32,
    /// Leray-Schauder alternative.
    T33,
    /// Contraction for p > 2.
    T34,
    /// Contraction for 1 < p < 2.
    T35,
}

impl TheoremId {
    pub const ALL: [TheoremId; 5] = [TheoremId::T31, TheoremId::T32, TheoremId::T33, TheoremId::T34, TheoremId::T35];

    pub fn label(self) -> &'static str {
        match self {
            TheoremId::T31 => "3.1",
            TheoremId::T32 => "3.2",
            TheoremId::T33 => "3.3",
            TheoremId::T34 => "3.4",
            TheoremId::T35 => "3.5",
        }
    }

    /// Whether a hold verdict certifies a contraction, hence uniqueness.
    pub fn is_contraction(self) -> bool {
        matches!(self, TheoremId::T34 | TheoremId::T35)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|id| id.label() == s)
            .ok_or_else(|| Error::Invalid(format!("unknown theorem \"{s}\"; expected one of 3.1, 3.2, 3.3, 3.4, 3.5")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Lt,
    Le,
    Gt,
    Ge,
}

impl Relation {
    pub fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Relation::Lt => lhs < rhs,
            Relation::Le => lhs <= rhs,
            Relation::Gt => lhs > rhs,
            Relation::Ge => lhs >= rhs,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Gt => ">",
            Relation::Ge => ">=",
        }
    }
}

/// One inequality of a theorem, evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: &'static str,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
    /// Sample (t, u) where the sampled side attains its extremum.
    pub witness: Option<(f64, f64)>,
}

impl Condition {
    fn new(name: &'static str, lhs: f64, relation: Relation, rhs: f64) -> Self {
        Self { name, lhs, relation, rhs, witness: None }
    }

    fn at(mut self, witness: (f64, f64)) -> Self {
        self.witness = Some(witness);
        self
    }

    pub fn holds(&self) -> bool {
        self.relation.holds(self.lhs, self.rhs)
    }

    /// Distance to the boundary of the inequality, positive when it holds.
    pub fn slack(&self) -> f64 {
        match self.relation {
            Relation::Lt | Relation::Le => self.rhs - self.lhs,
            Relation::Gt | Relation::Ge => self.lhs - self.rhs,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    HypothesesHold,
    HypothesesFail,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::HypothesesHold => "hypotheses_hold",
            Verdict::HypothesesFail => "hypotheses_fail",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TheoremReport {
    pub theorem: TheoremId,
    pub inputs: Vec<(&'static str, f64)>,
    pub quantities: Vec<(&'static str, f64)>,
    pub conditions: Vec<Condition>,
    /// f(t, 0) is not identically zero on the sampled t values. Reported only;
    /// it does not enter the verdict.
    pub h1_nontrivial: bool,
    /// Sampling densities, e.g. ("box_lattice", "201x201").
    pub lattices: Vec<(&'static str, String)>,
}

impl TheoremReport {
    fn new(theorem: TheoremId, pb: &Problem) -> Result<Self> {
        Ok(Self {
            theorem,
            inputs: Vec::new(),
            quantities: Vec::new(),
            conditions: Vec::new(),
            h1_nontrivial: h1_nontrivial(pb)?,
            lattices: Vec::new(),
        })
    }

    pub fn verdict(&self) -> Verdict {
        if self.conditions.iter().all(Condition::holds) {
            Verdict::HypothesesHold
        } else {
            Verdict::HypothesesFail
        }
    }

    pub fn holds(&self) -> bool {
        self.verdict() == Verdict::HypothesesHold
    }

    pub fn failures(&self) -> impl Iterator<Item = &Condition> {
        self.conditions.iter().filter(|c| !c.holds())
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// Input or computed quantity by key.
    pub fn value(&self, key: &str) -> Option<f64> {
        self.inputs.iter().chain(&self.quantities).find(|(k, _)| *k == key).map(|&(_, v)| v)
    }
}

impl fmt::Display for TheoremReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "theorem = {}", self.theorem)?;
        for (k, v) in &self.inputs {
            writeln!(f, "input.{k} = {v:?}")?;
        }
        for (k, v) in &self.quantities {
            writeln!(f, "{k} = {v:?}")?;
        }
        for c in &self.conditions {
            let status = if c.holds() { "holds" } else { "fails" };
            write!(f, "condition.{} = {status}: {:?} {} {:?}, slack {:?}", c.name, c.lhs, c.relation.symbol(), c.rhs, c.slack())?;
            if let Some((t, u)) = c.witness {
                write!(f, ", at (t, u) = ({t:?}, {u:?})")?;
            }
            writeln!(f)?;
        }
        for c in self.failures() {
            writeln!(f, "violated = {}", c.name)?;
        }
        writeln!(f, "h1_nontrivial = {}", self.h1_nontrivial)?;
        for (k, v) in &self.lattices {
            writeln!(f, "lattice.{k} = {v}")?;
        }
        writeln!(f, "verdict = {}", self.verdict())
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

fn require_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("{name} must be positive, got {x}")))
    }
}

fn h1_nontrivial(pb: &Problem) -> Result<bool> {
    for i in 0..=BOX_LATTICE - 1 {
        let t = i as f64 / (BOX_LATTICE - 1) as f64;
        if pb.f().eval(t, 0.0)? > 0.0 {
            return Ok(true);
        }
    }
    Ok(false)
}

fn integral_rule() -> CompositeRule {
    CompositeRule::new(128, 8, Grading::TowardBoth(2.0)).expect("static rule")
}

/// ∫₀¹ a(t) dt.
pub fn integral_a(pb: &Problem) -> Result<f64> {
    Ok(integral_rule().try_apply(0.0, 1.0, |t| pb.a().eval(t, 0.0))?)
}

/// ∫₀¹ w(t) a(t) dt for an expression w in t.
fn weighted_integral_a(pb: &Problem, w: &Expr) -> Result<f64> {
    integral_rule().try_apply(0.0, 1.0, |t| Ok::<_, Error>(pb.a().eval(t, 0.0)? * w.eval(t, 0.0)?))
}

/// ∫₀¹ Φ(s) ds by quadrature, checked against the closed form.
pub fn envelope_integral(pb: &Problem) -> Result<f64> {
    let kp = pb.kernel();
    let rule = CompositeRule::new(256, 8, Grading::TowardEnd(4.0))?;
    let value = rule.try_apply(0.0, 1.0, |s| kp.phi_envelope(s))?;
    let exact = kp.envelope_integral();
    if ((value - exact) / exact).abs() > 1e-10 {
        return Err(invalid(format!("envelope integral quadrature {value} disagrees with closed form {exact}")));
    }
    Ok(value)
}

/// Λ₁ = (φ_q(∫a) ∫Φ)⁻¹.
pub fn lambda1(pb: &Problem) -> Result<f64> {
    let ia = integral_a(pb)?;
    if ia <= 0.0 {
        return Err(invalid("a vanishes identically; Λ₁ is undefined"));
    }
    Ok(1.0 / (phi(pb.q(), ia) * envelope_integral(pb)?))
}

/// Λ₂ = (γ ∫₀^ρ Φ(s) φ_q(∫₀^s a) ds)⁻¹, with the inner integral accumulated
/// between consecutive outer nodes.
pub fn lambda2(pb: &Problem, rho: f64) -> Result<f64> {
    let kp = pb.kernel();
    let gamma_cone = kp.cone_gamma(rho)?;
    let outer = CompositeRule::new(256, 8, Grading::TowardBoth(2.0))?;
    let inner = GaussLegendre::new(8)?;
    let (mut prev, mut acc_a, mut total) = (0.0, 0.0, 0.0);
    for (x, w) in outer.reference_points() {
        let s = rho * x;
        let (mid, half) = (0.5 * (prev + s), 0.5 * (s - prev));
        for (node, weight) in inner.nodes().iter().zip(inner.weights()) {
            acc_a += half * weight * pb.a().eval(mid + half * node, 0.0)?;
        }
        prev = s;
        total += rho * w * kp.phi_envelope(s)? * phi(pb.q(), acc_a);
    }
    if total <= 0.0 {
        return Err(invalid(format!("a vanishes on [0, {rho}]; Λ₂ is undefined")));
    }
    Ok(1.0 / (gamma_cone * total))
}

/// Extremum of a sampled function with its location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extremum {
    pub value: f64,
    pub t: f64,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Max,
    Min,
}

impl Sense {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Max => a > b,
            Sense::Min => a < b,
        }
    }
}

/// Golden-section search for the best value of g on [lo, hi].
fn golden(mut g: impl FnMut(f64) -> Result<f64>, lo: f64, hi: f64, sense: Sense) -> Result<(f64, f64)> {
    const R: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - R * (b - a);
    let mut d = a + R * (b - a);
    let (mut gc, mut gd) = (g(c)?, g(d)?);
    for _ in 0..GOLDEN_ITERS {
        if sense.better(gc, gd) {
            b = d;
            d = c;
            gd = gc;
            c = b - R * (b - a);
            gc = g(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + R * (b - a);
            gd = g(d)?;
        }
    }
    Ok(if sense.better(gc, gd) { (c, gc) } else { (d, gd) })
}

/// Extremum of g over [t0,t1] × [u0,u1]: n × n lattice, then alternating
/// golden-section refinement inside the neighbouring cells of the best node.
pub fn box_extremum(
    g: impl Fn(f64, f64) -> Result<f64> + Sync,
    (t0, t1): (f64, f64),
    (u0, u1): (f64, f64),
    n: usize,
    sense: Sense,
) -> Result<Extremum> {
    if !(t0 <= t1 && u0 <= u1) || n < 2 {
        return Err(invalid(format!("empty box [{t0}, {t1}] x [{u0}, {u1}]")));
    }
    let at = |lo: f64, hi: f64, i: usize| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
    let rows = (0..n)
        .into_par_iter()
        .map(|i| -> Result<Extremum> {
            let t = at(t0, t1, i);
            let mut best = Extremum { value: g(t, u0)?, t, u: u0 };
            for j in 1..n {
                let u = at(u0, u1, j);
                let v = g(t, u)?;
                if sense.better(v, best.value) {
                    best = Extremum { value: v, t, u };
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut best = rows[0];
    for r in &rows[1..] {
        if sense.better(r.value, best.value) {
            best = *r;
        }
    }

    let (ht, hu) = ((t1 - t0) / (n - 1) as f64, (u1 - u0) / (n - 1) as f64);
    let (tl, th) = ((best.t - ht).max(t0), (best.t + ht).min(t1));
    let (ul, uh) = ((best.u - hu).max(u0), (best.u + hu).min(u1));
    let mut cur = best;
    for _ in 0..GOLDEN_SWEEPS {
        if th > tl {
            let (t, v) = golden(|t| g(t, cur.u), tl, th, sense)?;
            if sense.better(v, cur.value) {
                cur = Extremum { value: v, t, u: cur.u };
            }
        }
        if uh > ul {
            let (u, v) = golden(|u| g(cur.t, u), ul, uh, sense)?;
            if sense.better(v, cur.value) {
                cur = Extremum { value: v, t: cur.t, u };
            }
        }
    }
    Ok(cur)
}

fn f_extremum(pb: &Problem, t: (f64, f64), u: (f64, f64), sense: Sense) -> Result<Extremum> {
    box_extremum(|t, u| Ok(pb.f().eval(t, u)?), t, u, BOX_LATTICE, sense)
}

/// u values standing in for [0, ∞): dense on [0, 10], geometric beyond.
fn strip_u_samples() -> Vec<f64> {
    let mut us: Vec<f64> =
        (0..=STRIP_DENSE_STEPS).map(|j| STRIP_DENSE_MAX * j as f64 / STRIP_DENSE_STEPS as f64).collect();
    let ratio = (STRIP_TAIL_MAX / STRIP_DENSE_MAX).powf(1.0 / STRIP_TAIL_STEPS as f64);
    us.extend((1..=STRIP_TAIL_STEPS).map(|j| STRIP_DENSE_MAX * ratio.powi(j as i32)));
    us
}

fn strip_t_samples(include_zero: bool) -> Vec<f64> {
    let n = STRIP_T_SAMPLES - 1;
    let first = if include_zero { 0 } else { 1 };
    (first..=n).map(|i| i as f64 / n as f64).collect()
}

fn strip_lattice_label() -> String {
    format!(
        "{}x{} (u dense on [0, {}], geometric to {:e})",
        STRIP_T_SAMPLES,
        STRIP_DENSE_STEPS + 1 + STRIP_TAIL_STEPS,
        STRIP_DENSE_MAX,
        STRIP_TAIL_MAX
    )
}

/// Smallest sampled value of g over the strip, with its location.
fn strip_min(g: impl Fn(f64, f64) -> Result<f64> + Sync, include_t_zero: bool) -> Result<Extremum> {
    let us = strip_u_samples();
    let rows = strip_t_samples(include_t_zero)
        .into_par_iter()
        .map(|t| -> Result<Extremum> {
            let mut best = Extremum { value: f64::INFINITY, t, u: 0.0 };
            for &u in &us {
                let v = g(t, u)?;
                if v < best.value {
                    best = Extremum { value: v, t, u };
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().fold(Extremum { value: f64::INFINITY, t: 0.0, u: 0.0 }, |a, b| if b.value < a.value { b } else { a }))
}

/// Largest sampled |f(t,u) - f(t,v)| / |u - v| over neighbouring strip samples.
pub fn lipschitz_estimate(pb: &Problem) -> Result<Extremum> {
    let us = strip_u_samples();
    let rows = strip_t_samples(true)
        .into_par_iter()
        .map(|t| -> Result<Extremum> {
            let mut best = Extremum { value: 0.0, t, u: 0.0 };
            let mut prev = pb.f().eval(t, us[0])?;
            for w in us.windows(2) {
                let cur = pb.f().eval(t, w[1])?;
                let q = (cur - prev).abs() / (w[1] - w[0]);
                if q > best.value {
                    best = Extremum { value: q, t, u: w[0] };
                }
                prev = cur;
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().fold(Extremum { value: 0.0, t: 0.0, u: 0.0 }, |a, b| if b.value > a.value { b } else { a }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrasnoselskiiVariant {
    /// Theorem 3.1.
    Expansive,
    /// Theorem 3.2.
    Compressive,
}

/// Parameters of the cone theorems; `m1`, `m2` default to Λ₁, Λ₂.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeParams {
    pub rho: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
}

pub fn check_krasnoselskii(pb: &Problem, params: ConeParams, variant: KrasnoselskiiVariant) -> Result<TheoremReport> {
    let ConeParams { rho, rho1, rho2, m1, m2 } = params;
    require_positive("rho1", rho1)?;
    require_positive("rho2", rho2)?;
    let gamma_cone = pb.kernel().cone_gamma(rho)?;
    let (l1, l2) = (lambda1(pb)?, lambda2(pb, rho)?);
    let m1 = m1.unwrap_or(l1);
    let m2 = m2.unwrap_or(l2);
    require_positive("M1", m1)?;
    require_positive("M2", m2)?;
    let p = pb.p();

    let id = match variant {
        KrasnoselskiiVariant::Expansive => TheoremId::T31,
        KrasnoselskiiVariant::Compressive => TheoremId::T32,
    };
    let mut r = TheoremReport::new(id, pb)?;
    r.inputs = vec![("rho", rho), ("rho1", rho1), ("rho2", rho2), ("M1", m1), ("M2", m2)];
    r.quantities = vec![("lambda1", l1), ("lambda2", l2), ("gamma", gamma_cone)];
    r.conditions.push(Condition::new("M1_positive", m1, Relation::Gt, 0.0));
    r.conditions.push(Condition::new("M1_at_most_lambda1", m1, Relation::Le, l1));
    r.conditions.push(Condition::new("M2_at_least_lambda2", m2, Relation::Ge, l2));

    // (upper box, upper level) and (lower box, lower level) per variant
    let (upper_u, upper_level, lower_u, lower_level) = match variant {
        KrasnoselskiiVariant::Expansive => {
            r.conditions.push(Condition::new("rho1_below_rho2", rho1, Relation::Lt, rho2));
            r.conditions.push(Condition::new("M2rho1_below_M1rho2", m2 * rho1, Relation::Lt, m1 * rho2));
            ((0.0, rho2), phi(p, m1 * rho2), (gamma_cone * rho1, rho1), phi(p, m2 * rho1))
        }
        KrasnoselskiiVariant::Compressive => {
            r.conditions.push(Condition::new("gamma_rho2_below_rho1", gamma_cone * rho2, Relation::Lt, rho1));
            r.conditions.push(Condition::new("rho1_below_rho2", rho1, Relation::Lt, rho2));
            r.conditions.push(Condition::new("M1rho1_above_M2rho2", m1 * rho1, Relation::Gt, m2 * rho2));
            ((0.0, rho1), phi(p, m1 * rho1), (gamma_cone * rho2, rho2), phi(p, m2 * rho2))
        }
    };
    let hi = f_extremum(pb, (0.0, 1.0), upper_u, Sense::Max)?;
    let lo = f_extremum(pb, (0.0, rho), lower_u, Sense::Min)?;
    r.quantities.extend([
        ("f_max_upper_box", hi.value),
        ("phi_p_upper_level", upper_level),
        ("f_min_lower_box", lo.value),
        ("phi_p_lower_level", lower_level),
    ]);
    r.conditions.push(Condition::new("f_upper_bound", hi.value, Relation::Le, upper_level).at((hi.t, hi.u)));
    r.conditions.push(Condition::new("f_lower_bound", lo.value, Relation::Ge, lower_level).at((lo.t, lo.u)));
    r.lattices.push(("box", format!("{BOX_LATTICE}x{BOX_LATTICE} with golden-section refinement")));
    Ok(r)
}

/// ν > L^(q-1) φ_q(∫a) ∫Φ with L = max f over [0,1] × [0,ν].
pub fn check_leray_schauder(pb: &Problem, nu: f64) -> Result<TheoremReport> {
    require_positive("nu", nu)?;
    let q = pb.q();
    let ia = integral_a(pb)?;
    let ie = envelope_integral(pb)?;
    let l = f_extremum(pb, (0.0, 1.0), (0.0, nu), Sense::Max)?;
    let rhs = l.value.powf(q.value() - 1.0) * phi(q, ia) * ie;

    let mut r = TheoremReport::new(TheoremId::T33, pb)?;
    r.inputs = vec![("nu", nu)];
    r.quantities = vec![("integral_a", ia), ("envelope_integral", ie), ("L", l.value), ("rhs", rhs), ("margin", nu - rhs)];
    r.conditions.push(Condition::new("nu_exceeds_bound", nu, Relation::Gt, rhs).at((l.t, l.u)));
    r.lattices.push(("box", format!("{BOX_LATTICE}x{BOX_LATTICE} with golden-section refinement")));
    Ok(r)
}

/// Contraction for 1 < p < 2 with f ≤ k(t) and Lipschitz constant `l`.
pub fn check_contraction_small_p(pb: &Problem, k_env: &Expr, l: f64) -> Result<TheoremReport> {
    let p = pb.p().value();
    if !(p > 1.0 && p < 2.0) {
        return Err(invalid(format!("this theorem needs 1 < p < 2, got p = {p}")));
    }
    require_positive("L", l)?;
    if k_env.variables().contains(&Var::U) {
        return Err(invalid("the envelope k may depend on t only"));
    }
    let (alpha, q) = (pb.alpha(), pb.q().value());
    let ia = integral_a(pb)?;
    let m = weighted_integral_a(pb, k_env)?;
    let g1 = gamma(alpha + 1.0)?;
    let bound = g1 / ((alpha + 1.0) * (q - 1.0)) / ia * m.powf(2.0 - q);
    let l1 = l * (q - 1.0) * m.powf(q - 2.0) * (alpha + 1.0) / g1 * ia;

    let k_min = box_extremum(|t, _| Ok(k_env.eval(t, 0.0)?), (0.0, 1.0), (0.0, 0.0), BOX_LATTICE, Sense::Min)?;
    let gap = strip_min(|t, u| Ok(k_env.eval(t, 0.0)? - pb.f().eval(t, u)?), true)?;
    let lip = lipschitz_estimate(pb)?;

    let mut r = TheoremReport::new(TheoremId::T35, pb)?;
    r.inputs = vec![("L", l)];
    r.quantities = vec![
        ("integral_a", ia),
        ("M", m),
        ("bound", bound),
        ("contraction_constant", l1),
        ("k_min", k_min.value),
        ("min_k_minus_f", gap.value),
        ("lipschitz_estimate", lip.value),
    ];
    r.conditions.push(Condition::new("k_nonnegative", k_min.value, Relation::Ge, 0.0).at((k_min.t, 0.0)));
    r.conditions.push(Condition::new("f_below_k", gap.value, Relation::Ge, 0.0).at((gap.t, gap.u)));
    r.conditions.push(Condition::new("lipschitz_within_L", lip.value, Relation::Le, l).at((lip.t, lip.u)));
    r.conditions.push(Condition::new("L_below_bound", l, Relation::Lt, bound));
    r.lattices.push(("strip", strip_lattice_label()));
    Ok(r)
}

/// Contraction for p > 2 with a f ≥ μσt^(σ-1) and Lipschitz constant `k`.
pub fn check_contraction_large_p(pb: &Problem, mu: f64, sigma: f64, k: f64) -> Result<TheoremReport> {
    let p = pb.p().value();
    if !(p > 2.0) {
        return Err(invalid(format!("this theorem needs p > 2, got p = {p}")));
    }
    require_positive("mu", mu)?;
    require_positive("k", k)?;
    let (alpha, q) = (pb.alpha(), pb.q().value());
    let sigma_max = 2.0 / (2.0 - q);
    if !(sigma > 0.0 && sigma < sigma_max) {
        return Err(invalid(format!("sigma must satisfy 0 < sigma < 2/(2-q) = {sigma_max}, got {sigma}")));
    }
    let c = sigma * (q - 2.0);
    let ia = integral_a(pb)?;

    let mut r = TheoremReport::new(TheoremId::T34, pb)?;
    r.inputs = vec![("mu", mu), ("sigma", sigma), ("k", k)];
    r.quantities = vec![("integral_a", ia), ("exponent_c", c)];
    // ∫Φ(s) s^c ds diverges once c ≤ -1, and no k can qualify
    r.conditions.push(Condition::new("beta_argument_positive", c + 1.0, Relation::Gt, 0.0));
    let bound = if c + 1.0 > 0.0 {
        let b = beta(alpha - 1.0, c + 1.0)?;
        let g = gamma(alpha - 1.0)?;
        let bound = (c + alpha) * g / ((q - 1.0) * mu.powf(q - 2.0) * (c + alpha + 1.0) * b) / ia;
        let l = (q - 1.0) * mu.powf(q - 2.0) * k * (c + alpha + 1.0) / ((c + alpha) * g) * ia * b;
        r.quantities.push(("contraction_constant", l));
        bound
    } else {
        0.0
    };
    r.quantities.push(("bound", bound));

    let lower = strip_min(
        |t, u| Ok(pb.a().eval(t, u)? * pb.f().eval(t, u)? - mu * sigma * t.powf(sigma - 1.0)),
        false,
    )?;
    let lip = lipschitz_estimate(pb)?;
    r.quantities.extend([("min_af_minus_lower", lower.value), ("lipschitz_estimate", lip.value)]);
    r.conditions.push(Condition::new("af_lower_bound", lower.value, Relation::Ge, 0.0).at((lower.t, lower.u)));
    r.conditions.push(Condition::new("lipschitz_within_k", lip.value, Relation::Le, k).at((lip.t, lip.u)));
    r.conditions.push(Condition::new("k_below_bound", k, Relation::Lt, bound));
    r.lattices.push(("strip", strip_lattice_label()));
    Ok(r)
}

/// Parameters for [`check`]; each theorem reads the fields it needs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TheoremParams {
    /// Cone parameter; defaults to the problem's.
    pub rho: Option<f64>,
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
    pub m1: Option<f64>,
    pub m2: Option<f64>,
    pub nu: Option<f64>,
    pub l: Option<f64>,
    pub k_env: Option<Expr>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    pub k: Option<f64>,
}

fn required(name: &str, v: Option<f64>, id: TheoremId) -> Result<f64> {
    v.ok_or_else(|| invalid(format!("theorem {id} needs {name}")))
}

/// Dispatches to the checker for `id`.
pub fn check(pb: &Problem, id: TheoremId, params: &TheoremParams) -> Result<TheoremReport> {
    match id {
        TheoremId::T31 | TheoremId::T32 => {
            let cone = ConeParams {
                rho: params.rho.unwrap_or(pb.rho),
                rho1: required("rho1", params.rho1, id)?,
                rho2: required("rho2", params.rho2, id)?,
                m1: params.m1,
                m2: params.m2,
            };
            let variant =
                if id == TheoremId::T31 { KrasnoselskiiVariant::Expansive } else { KrasnoselskiiVariant::Compressive };
            check_krasnoselskii(pb, cone, variant)
        }
        TheoremId::T33 => check_leray_schauder(pb, required("nu", params.nu, id)?),
        TheoremId::T34 => check_contraction_large_p(
            pb,
            required("mu", params.mu, id)?,
            required("sigma", params.sigma, id)?,
            required("k", params.k, id)?,
        ),
        TheoremId::T35 => {
            let k_env = params.k_env.as_ref().ok_or_else(|| invalid(format!("theorem {id} needs k_env")))?;
            check_contraction_small_p(pb, k_env, required("L", params.l, id)?)
        }
    }
}
