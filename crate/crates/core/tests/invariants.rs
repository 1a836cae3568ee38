//! Cross-module invariants: operator structure, theorem reports, solver and
//! verifier behaviour under refinement.

use fracbvp::exprlang;
use fracbvp::problem::Discretization;
use fracbvp::quadrature::Interpolation;
use fracbvp::solver::{apply_operator, constant_guess, picard_solve, sample, solve};
use fracbvp::theorems::{self, box_extremum, Sense, TheoremId, TheoremParams, BOX_LATTICE};
use fracbvp::verify::{cone_check, integral_form_residual};
use fracbvp::{KernelParams, Problem};
use proptest::prelude::*;

const EX42: &str = include_str!("../fixtures/ex42.problem");
const EX43: &str = include_str!("../fixtures/ex43.problem");
const COARSE_PANELS: usize = 256;

fn coarse(pb: Problem) -> Problem {
    pb.with_discretization(Discretization { panels: COARSE_PANELS, ..Discretization::default() }).unwrap()
}

prop_compose! {
    /// A problem with f(t, 0) > 0 and a random nonnegative input u.
    fn problem_and_input()(
        alpha in 2.05f64..=3.0,
        eta in 0.05f64..0.95,
        p in 1.2f64..4.0,
        rho in 0.05f64..0.95,
        a_scale in 0.2f64..3.0,
        a_pow in 0.0f64..2.0,
        f0 in 0.05f64..2.0,
        f1 in 0.0f64..2.0,
        c0 in 0.0f64..2.0,
        c1 in 0.0f64..2.0,
        k in 0.5f64..6.0,
    ) -> (Problem, f64, f64, f64, f64) {
        let a = format!("{a_scale}*t^{a_pow}");
        let f = format!("{f0} + {f1}*u/(1 + u) + 0.1*t");
        let pb = coarse(Problem::parse_exprs(alpha, eta, p, &a, &f).unwrap()).with_rho(rho).unwrap();
        (pb, c0, c1, k, rho)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn operator_output_is_nonincreasing_and_in_the_cone((pb, c0, c1, k, rho) in problem_and_input()) {
        let u = sample(&pb, Interpolation::Cubic, |t| c0 + c1 * (k * t).sin().powi(2)).unwrap();
        let au = apply_operator(&pb, &u).unwrap();
        for w in au.values().windows(2) {
            prop_assert!(w[0] >= w[1] - 1e-10, "Au increases: {} -> {}", w[0], w[1]);
        }
        prop_assert!(cone_check(&pb, &au, rho).unwrap() >= -1e-10);
    }

    #[test]
    fn operator_output_obeys_the_sup_bound((pb, c0, c1, k, _rho) in problem_and_input()) {
        let u = sample(&pb, Interpolation::Cubic, |t| c0 + c1 * (k * t).sin().powi(2)).unwrap();
        let au = apply_operator(&pb, &u).unwrap();
        // u stays within [0, c0 + c1] between nodes too, up to interpolation overshoot
        let top = u.sup_norm() * 1.01 + 1e-9;
        let l = box_extremum(|t, v| Ok(pb.f().eval(t, v)?), (0.0, 1.0), (0.0, top), BOX_LATTICE, Sense::Max).unwrap();
        let q = pb.q();
        let bound = l.value.powf(q.value() - 1.0)
            * q.phi(theorems::integral_a(&pb).unwrap())
            * theorems::envelope_integral(&pb).unwrap();
        prop_assert!(au.sup_norm() <= bound * (1.0 + 1e-9), "{} > {}", au.sup_norm(), bound);
    }

    #[test]
    fn picard_iterates_stay_in_the_cone((pb, c0, _c1, _k, rho) in problem_and_input()) {
        let mut u = constant_guess(&pb, c0).unwrap();
        for _ in 0..4 {
            u = apply_operator(&pb, &u).unwrap();
            prop_assert!(cone_check(&pb, &u, rho).unwrap() >= -1e-10);
        }
    }

    #[test]
    fn box_extrema_are_stable_under_lattice_refinement(
        c in 0.1f64..3.0, w in 0.5f64..8.0, u1 in 0.5f64..20.0, shift in 0.0f64..1.0,
    ) {
        let g = |t: f64, u: f64| Ok(c * (w * t + shift).sin() * (u / (1.0 + u)) + 0.3 * t * (-u / u1).exp());
        for sense in [Sense::Max, Sense::Min] {
            let a = box_extremum(g, (0.0, 1.0), (0.0, u1), BOX_LATTICE, sense).unwrap();
            let b = box_extremum(g, (0.0, 1.0), (0.0, u1), 2 * BOX_LATTICE - 1, sense).unwrap();
            prop_assert!((a.value - b.value).abs() < 1e-3 * (1.0 + a.value.abs()));
        }
    }

    #[test]
    fn lambda_ordering_holds(
        alpha in 2.01f64..=3.0, eta in 0.01f64..0.99, p in 1.05f64..6.0, rho in 0.01f64..0.99, s in 0.1f64..4.0,
    ) {
        let pb = Problem::parse_exprs(alpha, eta, p, &format!("{s}*exp(-t)"), "1").unwrap();
        let (l1, l2) = (theorems::lambda1(&pb).unwrap(), theorems::lambda2(&pb, rho).unwrap());
        prop_assert!(0.0 < l1 && l1 < l2);
    }
}

#[test]
fn zero_nonlinearity_reaches_zero_immediately() {
    let pb = coarse(Problem::parse_exprs(2.7, 0.3, 2.5, "1 + t", "0").unwrap());
    let r = picard_solve(&pb, &constant_guess(&pb, 3.0).unwrap(), 1e-12, 10, 1.0).unwrap();
    assert!(r.converged && r.iterations <= 2);
    assert_eq!(r.solution.sup_norm(), 0.0);
}

#[test]
fn ex42_from_a_half_converges_to_zero() {
    let pb = Problem::from_toml(EX42).unwrap();
    let r = picard_solve(&pb, &constant_guess(&pb, 0.5).unwrap(), pb.solver.tol, pb.solver.max_iter, 1.0).unwrap();
    assert!(r.converged);
    assert!(r.residual <= pb.solver.tol);
    assert!(r.solution.sup_norm() < 1e-10);
    // u ≡ 0 is an exact fixed point
    let zero = constant_guess(&pb, 0.0).unwrap();
    assert_eq!(apply_operator(&pb, &zero).unwrap().sup_norm(), 0.0);
}

#[test]
fn contraction_certificate_bounds_the_gap_ratio() {
    let pb = Problem::from_toml(EX42).unwrap();
    let params = TheoremParams { k_env: Some(exprlang::parse("exp(-t)").unwrap()), l: Some(2.0), ..Default::default() };
    let report = theorems::check(&pb, TheoremId::T35, &params).unwrap();
    assert!(report.holds());
    let l1 = report.value("contraction_constant").unwrap();
    assert!(l1 < 1.0);

    let r = picard_solve(&pb, &constant_guess(&pb, 0.5).unwrap(), pb.solver.tol, pb.solver.max_iter, 1.0).unwrap();
    for w in r.successive_diffs.windows(2) {
        assert!(w[1] <= l1 * w[0] + 5e-9, "gap {} after {} exceeds L1 = {l1}", w[1], w[0]);
    }
    assert!(r.max_gap_ratio(1e-12) <= l1 + 0.05);
}

#[test]
fn theorem_reports_are_reproducible() {
    let ex43 = Problem::from_toml(EX43).unwrap();
    let ex42 = Problem::from_toml(EX42).unwrap();
    let cone = TheoremParams { rho1: Some(1.0 / 120.0), rho2: Some(1.0), ..Default::default() };
    let small = TheoremParams { k_env: Some(exprlang::parse("exp(-t)").unwrap()), l: Some(2.0), ..Default::default() };
    let large = TheoremParams { mu: Some(0.1), sigma: Some(1.0), k: Some(0.01), ..Default::default() };
    let nu = TheoremParams { nu: Some(2.0), ..Default::default() };
    for (pb, id, params) in [
        (&ex43, TheoremId::T31, &cone),
        (&ex43, TheoremId::T32, &cone),
        (&ex43, TheoremId::T33, &nu),
        (&ex43, TheoremId::T34, &large),
        (&ex42, TheoremId::T35, &small),
    ] {
        let (a, b) = (theorems::check(pb, id, params).unwrap(), theorems::check(pb, id, params).unwrap());
        assert_eq!(a, b, "{id}");
        assert!(a.quantities.iter().chain(&a.inputs).all(|(_, v)| v.is_finite()), "{a}");
        if a.holds() {
            assert!(a.conditions.iter().all(|c| c.holds() && c.slack().is_finite()));
        }
    }
}

#[test]
fn integral_form_residual_decays_with_resolution() {
    let base = Problem::from_toml(EX43).unwrap();
    let mut last = f64::INFINITY;
    for panels in [64, 128, 256] {
        let pb = base.clone().with_discretization(Discretization { panels, ..base.discretization }).unwrap();
        let r = solve(&pb).unwrap();
        assert!(r.converged);
        let res = integral_form_residual(&pb, &r.solution).unwrap();
        assert!(res < last, "{panels} panels: {res:e} after {last:e}");
        last = res;
    }
}

#[test]
fn kernel_has_no_jumps() {
    // max |ΔK| between neighbouring lattice points shrinks as the lattice refines
    let kp = KernelParams::new(2.3, 0.4).unwrap();
    let jump = |n: usize| {
        let x = |i: usize| i as f64 / n as f64;
        let mut worst = 0.0f64;
        for i in 0..=n {
            for j in 0..n {
                let (t, s0, s1) = (x(i), x(j), x(j + 1));
                worst = worst.max((kp.k_kernel(t, s1).unwrap() - kp.k_kernel(t, s0).unwrap()).abs());
                worst = worst.max((kp.k_kernel(s1, t).unwrap() - kp.k_kernel(s0, t).unwrap()).abs());
            }
        }
        worst
    };
    let (a, b, c) = (jump(50), jump(100), jump(200));
    assert!(b < a && c < b, "{a} {b} {c}");
}
