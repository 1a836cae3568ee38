//! Certification of a computed solution, independent of the kernel route.
//!
//! The solution is checked against
//!
//! ```text
//! u(t) = -I^α ψ(t) + C₀,   ψ(s) = φ_q(∫₀^s a f(τ, u(τ)) dτ)
//! C₀   = ∫₀¹ (1-s)^(α-1) ψ / Γ(α) + ∫₀¹ (1-s)^(α-2) ψ / Γ(α-1) - ∫₀^η (η-s)^(α-2) ψ / Γ(α-1)
//! ```
//!
//! and against the boundary conditions u'(0) = u''(0) = 0, u(1) + u'(1) = u'(η).

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::problem::Problem;
use crate::quadrature::{CompositeRule, GridFunction};
use crate::solver::{piece_rule, source_term, InnerIntegral, NEGATIVE_TOLERANCE};

/// Fewest grid nodes accepted by [`boundary_residuals`].
pub const MIN_BC_NODES: usize = 16;

/// Finite-difference step used on the interpolant.
const FD_STEP: f64 = 1.0 / 256.0;

/// ∫_lo^hi w(s) ψ(s) ds for a weight with endpoint singularities.
fn weighted(rule: &CompositeRule, lo: f64, hi: f64, psi: &InnerIntegral, w: impl Fn(f64) -> f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    rule.apply(lo, hi, |s| w(s) * psi.eval(s))
}

/// Riemann-Liouville integral I^α ψ(t).
fn rl_integral(rule: &CompositeRule, alpha: f64, gamma_alpha: f64, psi: &InnerIntegral, t: f64) -> f64 {
    weighted(rule, 0.0, t, psi, |s| (t - s).max(0.0).powf(alpha - 1.0)) / gamma_alpha
}

fn constant_c0(pb: &Problem, rule: &CompositeRule, psi: &InnerIntegral) -> f64 {
    let kp = pb.kernel();
    let (alpha, eta) = (kp.alpha(), kp.eta());
    let power = |e: f64| move |s: f64| (1.0 - s).max(0.0).powf(e);
    weighted(rule, 0.0, 1.0, psi, power(alpha - 1.0)) / kp.gamma_alpha()
        + weighted(rule, 0.0, 1.0, psi, power(alpha - 2.0)) / kp.gamma_alpha_minus_one()
        - weighted(rule, 0.0, eta, psi, |s| (eta - s).max(0.0).powf(alpha - 2.0)) / kp.gamma_alpha_minus_one()
}

fn check_nonnegative(u: &GridFunction) -> Result<()> {
    match u.values().iter().position(|&v| v < NEGATIVE_TOLERANCE) {
        Some(i) => Err(Error::Invalid(format!("u({}) = {:e} is negative", u.nodes()[i], u.values()[i]))),
        None => Ok(()),
    }
}

/// -I^α φ_q(∫₀^t h) + C₀ at the nodes of `h`.
///
/// Mathematically equal to the kernel route of the solver; computed along a
/// different path so the two can be compared.
pub fn integral_form_route(pb: &Problem, h: &GridFunction) -> Result<GridFunction> {
    let psi = InnerIntegral::new(h.clone(), pb.q());
    let rule = piece_rule(pb)?;
    let c0 = constant_c0(pb, &rule, &psi);
    let (alpha, ga) = (pb.alpha(), pb.kernel().gamma_alpha());
    let values: Vec<f64> = h.nodes().par_iter().map(|&t| c0 - rl_integral(&rule, alpha, ga, &psi, t)).collect();
    Ok(h.with_values(values)?)
}

/// sup_t |u(t) - u(0) + I^α ψ(t)| over the grid nodes.
pub fn integral_form_residual(pb: &Problem, u: &GridFunction) -> Result<f64> {
    check_nonnegative(u)?;
    let psi = InnerIntegral::new(source_term(pb, u)?, pb.q());
    let rule = piece_rule(pb)?;
    let (alpha, ga) = (pb.alpha(), pb.kernel().gamma_alpha());
    let u0 = u.values()[0];
    let worst = u
        .nodes()
        .par_iter()
        .zip(u.values())
        .map(|(&t, &v)| (v - u0 + rl_integral(&rule, alpha, ga, &psi, t)).abs())
        .reduce(|| 0.0, f64::max);
    Ok(worst)
}

/// (|u'(0)|, |u''(0)|, |u(1) + u'(1) - u'(η)|) from finite differences of the
/// interpolant: four-point one-sided stencils at the ends, the fourth-order
/// central stencil at η.
pub fn boundary_residuals(pb: &Problem, u: &GridFunction) -> Result<[f64; 3]> {
    if u.nodes().len() < MIN_BC_NODES {
        return Err(Error::Invalid(format!(
            "grid has {} nodes; boundary residuals need at least {MIN_BC_NODES}",
            u.nodes().len()
        )));
    }
    let eta = pb.eta();
    let h = FD_STEP;
    let at = |x: f64| u.eval(x.clamp(0.0, 1.0));
    let (u0, u1, u2, u3) = (at(0.0), at(h), at(2.0 * h), at(3.0 * h));
    let d1_0 = (-11.0 * u0 + 18.0 * u1 - 9.0 * u2 + 2.0 * u3) / (6.0 * h);
    let d2_0 = (2.0 * u0 - 5.0 * u1 + 4.0 * u2 - u3) / (h * h);
    let (v0, v1, v2, v3) = (at(1.0), at(1.0 - h), at(1.0 - 2.0 * h), at(1.0 - 3.0 * h));
    let d1_1 = (11.0 * v0 - 18.0 * v1 + 9.0 * v2 - 2.0 * v3) / (6.0 * h);
    let k = h.min(eta / 2.0).min((1.0 - eta) / 2.0);
    let d1_eta = (at(eta - 2.0 * k) - 8.0 * at(eta - k) + 8.0 * at(eta + k) - at(eta + 2.0 * k)) / (12.0 * k);
    Ok([d1_0.abs(), d2_0.abs(), (v0 + d1_1 - d1_eta).abs()])
}

/// min_{[0,ρ]} u - γ·sup u. Negative means the cone inequality fails.
pub fn cone_check(pb: &Problem, u: &GridFunction, rho: f64) -> Result<f64> {
    check_nonnegative(u)?;
    let gamma = pb.kernel().cone_gamma(rho)?;
    let min = u
        .nodes()
        .iter()
        .zip(u.values())
        .filter(|(&t, _)| t <= rho)
        .map(|(_, &v)| v)
        .fold(u.eval(rho), f64::min);
    Ok(min - gamma * u.sup_norm())
}

/// Every check, reported before any thresholding.
#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub integral_form_residual: f64,
    /// |u'(0)|, |u''(0)|, |u(1) + u'(1) - u'(η)|
    pub bc_residuals: [f64; 3],
    pub positivity_min: f64,
    pub rho: f64,
    pub cone_slack: f64,
    pub sup_norm: f64,
}

pub fn verify(pb: &Problem, u: &GridFunction) -> Result<VerificationReport> {
    Ok(VerificationReport {
        integral_form_residual: integral_form_residual(pb, u)?,
        bc_residuals: boundary_residuals(pb, u)?,
        positivity_min: u.min(),
        rho: pb.rho,
        cone_slack: cone_check(pb, u, pb.rho)?,
        sup_norm: u.sup_norm(),
    })
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "integral_form_residual = {:e}", self.integral_form_residual)?;
        writeln!(f, "bc_residual_du0 = {:e}", self.bc_residuals[0])?;
        writeln!(f, "bc_residual_d2u0 = {:e}", self.bc_residuals[1])?;
        writeln!(f, "bc_residual_three_point = {:e}", self.bc_residuals[2])?;
        writeln!(f, "positivity_min = {:?}", self.positivity_min)?;
        writeln!(f, "rho = {:?}", self.rho)?;
        writeln!(f, "cone_slack = {:?}", self.cone_slack)?;
        writeln!(f, "sup_norm = {:?}", self.sup_norm)
    }
}
