//! The integral operator
//!
//! ```text
//! Au(t) = ∫₀¹ K(t,s) φ_q( ∫₀^s a(τ) f(τ, u(τ)) dτ ) ds
//! ```
//!
//! evaluated on the nodes of the problem's partition, and damped Picard
//! iteration for its fixed point.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::plaplacian::{phi, Exponent};
use crate::problem::Problem;
use crate::quadrature::{Antiderivative, CompositeRule, Grading, GridFunction, Interpolation, Partition};

/// Iterates may dip this far below zero from round-off before the solver aborts.
pub const NEGATIVE_TOLERANCE: f64 = -1e-12;

/// Grading exponent of the rule used on each smooth piece of K(t,·).
const PIECE_GRADING: f64 = 5.0;

/// Fewest Gauss points per panel on each piece. Fewer lets node-to-node
/// quadrature noise exceed 1e-10 and break the monotonicity of Au.
const PIECE_MIN_POINTS: usize = 6;

/// Composite rule applied to every piece [0, min(t,η)], ... of the outer integral.
pub(crate) fn piece_rule(pb: &Problem) -> Result<CompositeRule> {
    let d = &pb.discretization;
    let panels = (d.panels / 4).max(16);
    Ok(CompositeRule::new(panels, d.points_per_panel.max(PIECE_MIN_POINTS), Grading::TowardBoth(PIECE_GRADING))?)
}

/// h(t) = a(t)·f(t, u(t)) sampled at the nodes of `u`.
pub fn source_term(pb: &Problem, u: &GridFunction) -> Result<GridFunction> {
    let values = u
        .nodes()
        .iter()
        .zip(u.values())
        .map(|(&t, &v)| -> Result<f64> {
            let a = pb.a().eval(t, v.max(0.0))?;
            let f = pb.f().eval(t, v.max(0.0))?;
            Ok(a * f)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(u.with_values(values)?)
}

/// ψ(s) = φ_q(∫₀^s h), evaluable anywhere on [0,1].
#[derive(Debug, Clone)]
pub struct InnerIntegral {
    antiderivative: Antiderivative,
    q: Exponent,
}

impl InnerIntegral {
    pub fn new(h: GridFunction, q: Exponent) -> Self {
        Self { antiderivative: Antiderivative::new(h), q }
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        phi(self.q, self.antiderivative.eval(s))
    }

    pub fn antiderivative(&self) -> &Antiderivative {
        &self.antiderivative
    }
}

/// ∫₀¹ K(t,s) ψ(s) ds at every node of `partition`, splitting at s = t and s = η.
pub fn kernel_representation(pb: &Problem, psi: &InnerIntegral, partition: &Arc<Partition>) -> Result<Vec<f64>> {
    let kp = *pb.kernel();
    let rule = piece_rule(pb)?;
    let eta = kp.eta();
    partition
        .nodes()
        .par_iter()
        .map(|&t| -> Result<f64> {
            let mut cuts = [0.0, t.min(eta), t.max(eta), 1.0];
            cuts.sort_by(f64::total_cmp);
            let mut total = 0.0;
            for w in cuts.windows(2) {
                if w[1] > w[0] {
                    total += rule.try_apply(w[0], w[1], |s| Ok::<_, Error>(kp.k_kernel(t, s)? * psi.eval(s)))?;
                }
            }
            Ok(total)
        })
        .collect()
}

/// ∫₀¹ K(t,s) φ_q(∫₀^s h) ds at the nodes of `h`.
pub fn kernel_route(pb: &Problem, h: &GridFunction) -> Result<GridFunction> {
    let psi = InnerIntegral::new(h.clone(), pb.q());
    let values = kernel_representation(pb, &psi, h.partition())?;
    Ok(h.with_values(values)?)
}

/// One application of A to a nonnegative grid function.
pub fn apply_operator(pb: &Problem, u: &GridFunction) -> Result<GridFunction> {
    if let Some((i, &v)) = u.values().iter().enumerate().find(|(_, &v)| v < NEGATIVE_TOLERANCE) {
        return Err(Error::Invalid(format!("operator applied to negative value {v:e} at t = {}", u.nodes()[i])));
    }
    kernel_route(pb, &source_term(pb, u)?)
}

/// Why a converged run can be trusted as the solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceBasis {
    /// No theorem was checked for this run.
    Unchecked,
    /// An existence theorem holds but gives no contraction; convergence is heuristic.
    ExistenceCertified,
    /// A contraction theorem holds; the fixed point is unique.
    ContractionCertified,
}

impl ConvergenceBasis {
    pub fn label(self) -> &'static str {
        match self {
            ConvergenceBasis::Unchecked => "no theorem checked, convergence heuristic",
            ConvergenceBasis::ExistenceCertified => "existence certified, convergence heuristic",
            ConvergenceBasis::ContractionCertified => "contraction certified, unique solution",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solution: GridFunction,
    pub iterations: usize,
    /// sup |u_{k+1} - u_k| for every iteration.
    pub successive_diffs: Vec<f64>,
    /// sup |u - Au| at the returned solution.
    pub residual: f64,
    pub converged: bool,
    /// Relaxation weight in use when the run stopped.
    pub damping: f64,
    /// Set when the run fell back to ω = 0.5 after diverging gaps.
    pub damping_fallback: bool,
    pub basis: ConvergenceBasis,
}

impl SolveReport {
    /// Largest ratio gap_{k+1}/gap_k over the recorded sequence, ignoring
    /// gaps already at round-off level.
    pub fn max_gap_ratio(&self, floor: f64) -> f64 {
        self.successive_diffs
            .windows(2)
            .filter(|w| w[0] > floor)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max)
    }
}

/// Consecutive growing gaps before ω falls back to 0.5.
const DIVERGENCE_RUN: usize = 4;
const FALLBACK_DAMPING: f64 = 0.5;

/// Iterates u ← (1-ω)u + ωAu until both the gap and the residual are ≤ tol.
///
/// Running out of iterations is not an error: the report has
/// `converged = false`.
pub fn picard_solve(pb: &Problem, u0: &GridFunction, tol: f64, max_iter: usize, damping: f64) -> Result<SolveReport> {
    if !(damping > 0.0 && damping <= 1.0) {
        return Err(Error::Invalid(format!("damping must lie in (0, 1], got {damping}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("tol must be positive, got {tol}")));
    }
    if let Some(&v) = u0.values().iter().find(|&&v| v < NEGATIVE_TOLERANCE) {
        return Err(Error::Invalid(format!("initial guess must be nonnegative, found {v:e}")));
    }

    let mut omega = damping;
    let mut fallback = false;
    let mut growing = 0usize;
    let mut gaps = Vec::new();
    let mut u = u0.clone();
    let mut residual = f64::INFINITY;
    let mut converged = false;

    for iteration in 1..=max_iter {
        let au = apply_operator(pb, &u)?;
        // With ω = 1 the gap is exactly the residual of the previous iterate.
        residual = u.distance(&au);
        let values: Vec<f64> =
            u.values().iter().zip(au.values()).map(|(&x, &y)| (1.0 - omega) * x + omega * y).collect();
        if let Some(i) = values.iter().position(|&v| v < NEGATIVE_TOLERANCE) {
            return Err(Error::NegativeIterate { iteration, t: u.nodes()[i], value: values[i] });
        }
        let next = u.with_values(values)?;
        let gap = u.distance(&next);
        gaps.push(gap);
        u = next;

        if gap <= tol {
            residual = u.distance(&apply_operator(pb, &u)?);
            if residual <= tol {
                converged = true;
                break;
            }
        }

        if let [.., prev, last] = gaps[..] {
            growing = if last > prev { growing + 1 } else { 0 };
        }
        if growing >= DIVERGENCE_RUN && omega > FALLBACK_DAMPING {
            omega = FALLBACK_DAMPING;
            fallback = true;
            growing = 0;
        }
    }
    if !converged && gaps.last().is_some_and(|&g| g > tol) {
        residual = u.distance(&apply_operator(pb, &u)?);
    }

    Ok(SolveReport {
        solution: u,
        iterations: gaps.len(),
        successive_diffs: gaps,
        residual,
        converged,
        damping: omega,
        damping_fallback: fallback,
        basis: ConvergenceBasis::Unchecked,
    })
}

/// Picard from u₀ ≡ 0 with the problem's own settings.
pub fn solve(pb: &Problem) -> Result<SolveReport> {
    let partition = pb.discretization.partition()?;
    let u0 = GridFunction::constant(partition, pb.discretization.interpolation, 0.0)?;
    picard_solve(pb, &u0, pb.solver.tol, pb.solver.max_iter, pb.solver.damping)
}

/// A constant initial guess on the problem's grid.
pub fn constant_guess(pb: &Problem, c: f64) -> Result<GridFunction> {
    Ok(GridFunction::constant(pb.discretization.partition()?, pb.discretization.interpolation, c)?)
}

/// Convenience for tests and the CLI: a grid function sampled from `f`.
pub fn sample(pb: &Problem, interpolation: Interpolation, f: impl FnMut(f64) -> f64) -> Result<GridFunction> {
    Ok(GridFunction::from_fn(pb.discretization.partition()?, interpolation, f)?)
}
