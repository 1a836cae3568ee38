//! Acceptance suite. Runs every criterion in sequence, prints one PASS/FAIL
//! line per criterion and exits non-zero if any fails.
//!
//! cargo test -p fracbvp --test acceptance

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use fracbvp::problem::Discretization;
use fracbvp::quadrature::Interpolation;
use fracbvp::solver::{kernel_route, sample, solve};
use fracbvp::specialfn::{beta, gamma};
use fracbvp::theorems::{self, TheoremId, TheoremParams};
use fracbvp::verify::{integral_form_route, verify};
use fracbvp::{KernelParams, Problem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

/// Runs the CLI in-process; returns (exit code, key = value map).
fn cli(args: &[&str]) -> (i32, HashMap<String, String>) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("fracbvp").chain(args.iter().copied());
    let code = fracbvp::cli::run_with(argv, &mut out, &mut err);
    let text = String::from_utf8(out).expect("utf-8 report");
    let map = text
        .lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
    (code, map)
}

fn number(map: &HashMap<String, String>, key: &str) -> Result<f64, String> {
    let v = map.get(key).ok_or_else(|| format!("report lacks {key}"))?;
    v.parse().map_err(|_| format!("{key} = {v} is not a number"))
}

fn text<'a>(map: &'a HashMap<String, String>, key: &str) -> Result<&'a str, String> {
    map.get(key).map(String::as_str).ok_or_else(|| format!("report lacks {key}"))
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(name: &str, got: f64, want: f64, tol: f64) -> Result<(), String> {
    ensure((got - want).abs() <= tol, || format!("{name} = {got}, expected {want} ± {tol:e}"))
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn criterion_1() -> Outcome {
    let path = fixture("ex41.problem");
    let (code, r) = cli(&["check", "--theorem", "3.3", "--nu", "1", path.to_str().unwrap()]);
    let (l, rhs) = (number(&r, "L")?, number(&r, "rhs")?);
    within("L", l, 0.5 * LN_2, 1e-6)?;
    within("rhs", rhs, 0.372, 0.01)?;
    ensure(text(&r, "verdict")? == "hypotheses_hold", || "verdict is not hypotheses_hold".into())?;
    ensure(code == 0, || format!("exit code {code}"))?;
    Ok(format!("L = {l:.10}, rhs = {rhs:.6}, hypotheses_hold"))
}

fn criterion_2() -> Outcome {
    let path = fixture("ex42.problem");
    let (code, r) = cli(&["check", "--theorem", "3.5", "--k-env", "exp(-t)", "--L", "2", path.to_str().unwrap()]);
    let bound = number(&r, "bound")?;
    within("bound", bound, 3.90744, 1e-4)?;
    let closed = 13.0 / 18.0 * gamma(2.6).map_err(err)? / (1.0 - 2.0 / std::f64::consts::E);
    within("bound vs closed form", bound, closed, 1e-9)?;
    ensure(text(&r, "verdict")? == "hypotheses_hold", || "verdict is not hypotheses_hold".into())?;
    ensure(code == 0, || format!("exit code {code}"))?;
    Ok(format!("bound = {bound:.8}, hypotheses_hold"))
}

fn criterion_3() -> Outcome {
    let (code, r) = cli(&["reproduce", "ex43"]);
    let l1 = number(&r, "lambda1")?;
    within("lambda1", l1, 0.94952, 1e-4)?;
    let closed = 15.0 * gamma(0.5).map_err(err)? / 28.0;
    within("lambda1 vs 15 sqrt(pi)/28", l1, closed, 1e-9)?;
    let m1 = number(&r, "M1_pow_p_minus_1")?;
    within("M1^(5/2)", m1, 0.87855, 1e-4)?;
    for (key, want) in [("check.input.rho", 0.5), ("check.input.rho1", 1.0 / 120.0), ("check.input.rho2", 1.0)] {
        within(key, number(&r, key)?, want, 1e-15)?;
    }
    ensure(text(&r, "check.theorem")? == "3.1", || "wrong theorem".into())?;
    ensure(text(&r, "check.verdict")? == "hypotheses_hold", || "theorem 3.1 fails".into())?;
    ensure(text(&r, "solve.converged")? == "true", || "solve did not converge".into())?;
    let sup = number(&r, "verify.sup_norm")?;
    ensure(1.0 / 120.0 < sup && sup < 1.0, || format!("‖u‖ = {sup} outside (1/120, 1)"))?;
    ensure(code == 0, || format!("exit code {code}"))?;
    Ok(format!("lambda1 = {l1:.10}, M1^(5/2) = {m1:.8}, ‖u‖ = {sup:.6}"))
}

fn criterion_4(rng: &mut ChaCha8Rng) -> Outcome {
    const N: usize = 200;
    const SLACK: f64 = 1e-12;
    let mut worst_identity = 0.0f64;
    for _ in 0..20 {
        let alpha = 3.0 - rng.gen::<f64>();
        let eta = rng.gen_range(0.01..0.99);
        let kp = KernelParams::new(alpha, eta).map_err(err)?;
        let (ga, ga1) = (kp.gamma_alpha(), kp.gamma_alpha_minus_one());
        let eta_factor = 1.0 - eta.powf(alpha - 2.0);
        let grid = |i: usize| i as f64 / (N - 1) as f64;
        for j in 0..N {
            let s = grid(j);
            let g_ss = (1.0 - s).powf(alpha - 1.0) / ga;
            let h_ss = (1.0 - s).powf(alpha - 2.0) / ga1;
            let phi = kp.phi_envelope(s).map_err(err)?;
            let id = (kp.g_kernel(s, s).map_err(err)? + kp.h_kernel(s, s).map_err(err)? - phi).abs();
            worst_identity = worst_identity.max(id);
            ensure(id <= 1e-12, || format!("envelope identity off by {id:e} at α={alpha}, s={s}"))?;
            for i in 0..N {
                let t = grid(i);
                let g = kp.g_kernel(t, s).map_err(err)?;
                let h = kp.h_kernel(t, s).map_err(err)?;
                let k = kp.k_kernel(t, s).map_err(err)?;
                let at = || format!("α={alpha}, η={eta}, t={t}, s={s}");
                ensure(g >= 0.0 && h >= 0.0, || format!("negative kernel at {}", at()))?;
                ensure((1.0 - t.powf(alpha - 1.0)) * g_ss <= g + SLACK && g <= g_ss + SLACK, || {
                    format!("G bounds fail at {}", at())
                })?;
                ensure((1.0 - t.powf(alpha - 2.0)) * h_ss <= h + SLACK && h <= h_ss + SLACK, || {
                    format!("H bounds fail at {}", at())
                })?;
                ensure(eta_factor * (1.0 - t.powf(alpha - 1.0)) * phi <= k + SLACK && k <= phi + SLACK, || {
                    format!("K bounds fail at {}", at())
                })?;
            }
        }
    }
    Ok(format!("20 (α, η) pairs on {N}x{N}, envelope identity max error {worst_identity:.1e}"))
}

fn random_a(rng: &mut ChaCha8Rng) -> String {
    let c = rng.gen_range(0.1..5.0);
    let k = rng.gen_range(0.0..3.0);
    match rng.gen_range(0..4) {
        0 => format!("{c}"),
        1 => format!("{c}*t^{k}"),
        2 => format!("{c}*exp({k}*t)"),
        _ => format!("{c}*(1 + sin({k}*t)^2)"),
    }
}

fn criterion_5(rng: &mut ChaCha8Rng) -> Outcome {
    let mut min_ratio = f64::INFINITY;
    for _ in 0..50 {
        let alpha = 3.0 - rng.gen::<f64>();
        let eta = rng.gen_range(0.01..0.99);
        let p = rng.gen_range(1.1..5.0);
        let rho = rng.gen_range(0.01..0.99);
        let a = random_a(rng);
        let pb = Problem::parse_exprs(alpha, eta, p, &a, "1").map_err(err)?;
        let (l1, l2) = (theorems::lambda1(&pb).map_err(err)?, theorems::lambda2(&pb, rho).map_err(err)?);
        ensure(0.0 < l1 && l1 < l2, || format!("lambda1 = {l1}, lambda2 = {l2} for α={alpha} η={eta} p={p} a={a} ρ={rho}"))?;
        min_ratio = min_ratio.min(l2 / l1);
    }
    Ok(format!("50 instances, min lambda2/lambda1 = {min_ratio:.4}"))
}

/// Adaptive Simpson, used only as an oracle.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn step(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
    step(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

/// ∫₀¹ s^c (1-s)^(α-2) ds with both endpoint singularities removed by
/// substitution, so the integrands handed to Simpson are smooth.
fn beta_integral_oracle(alpha: f64, c: f64) -> f64 {
    let m = 1.0 / (c + 1.0);
    // s = x^m on [0, 1/2]
    let left = simpson(&|x: f64| m * (1.0 - x.powf(m)).powf(alpha - 2.0), 0.0, 0.5f64.powf(c + 1.0), 1e-14);
    // 1 - s = z^(1/(α-1)) on [1/2, 1]
    let e = 1.0 / (alpha - 1.0);
    let right = simpson(&|z: f64| (1.0 - z.powf(e)).powf(c) * e, 0.0, 0.5f64.powf(alpha - 1.0), 1e-14);
    left + right
}

fn criterion_6(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let alpha = 3.0 - rng.gen::<f64>();
        let pb = Problem::parse_exprs(alpha, 0.5, 1.5, "1", "1").map_err(err)?;
        let quad = theorems::envelope_integral(&pb).map_err(err)?;
        let exact = (alpha + 1.0) / gamma(alpha + 1.0).map_err(err)?;
        worst = worst.max((quad - exact).abs());
        within(&format!("∫Φ at α={alpha}"), quad, exact, 1e-9)?;
    }

    let mut cases = vec![(2.5, 3.5, 1.0, 0.5)];
    for _ in 0..9 {
        let p: f64 = rng.gen_range(2.2..5.0);
        let q = p / (p - 1.0);
        let sigma = rng.gen_range(0.05..0.95) / (2.0 - q);
        cases.push((3.0 - rng.gen::<f64>(), p, sigma, rng.gen_range(0.1..3.0)));
    }
    let mut worst_bound = 0.0f64;
    for (alpha, p, sigma, mu) in cases {
        let pb = Problem::parse_exprs(alpha, 0.5, p, "1", "1").map_err(err)?;
        let params = TheoremParams { mu: Some(mu), sigma: Some(sigma), k: Some(0.01), ..Default::default() };
        let report = theorems::check(&pb, TheoremId::T34, &params).map_err(err)?;
        let bound = report.value("bound").ok_or("report lacks bound")?;
        let q = p / (p - 1.0);
        let c = sigma * (q - 2.0);
        let b = beta_integral_oracle(alpha, c);
        let g = gamma(alpha - 1.0).map_err(err)?;
        let oracle = (c + alpha) * g / ((q - 1.0) * mu.powf(q - 2.0) * (c + alpha + 1.0) * b);
        let rel = ((bound - oracle) / oracle).abs();
        worst_bound = worst_bound.max(rel);
        ensure(rel <= 1e-9, || format!("k-bound {bound} vs oracle {oracle} at α={alpha} p={p} σ={sigma} μ={mu}"))?;
    }
    Ok(format!("∫Φ max error {worst:.1e}; k-bound max relative error {worst_bound:.1e} over 10 cases"))
}

fn criterion_7() -> Outcome {
    let text_in = std::fs::read_to_string(fixture("ex41.problem")).map_err(err)?;
    let pb = Problem::from_toml(&text_in).map_err(err)?;
    let r = solve(&pb).map_err(err)?;
    ensure(r.converged, || format!("no convergence after {} iterations", r.iterations))?;
    let v = verify(&pb, &r.solution).map_err(err)?;
    ensure(v.integral_form_residual <= 1e-5, || format!("integral-form residual {:e}", v.integral_form_residual))?;
    let bc = v.bc_residuals.iter().cloned().fold(0.0, f64::max);
    ensure(bc <= 1e-4, || format!("boundary residual {bc:e}"))?;
    ensure(v.cone_slack >= -1e-10, || format!("cone slack {:e}", v.cone_slack))?;

    let panels = pb.discretization.panels * 2;
    let fine = pb.clone().with_discretization(Discretization { panels, ..pb.discretization }).map_err(err)?;
    let rf = solve(&fine).map_err(err)?;
    ensure(rf.converged, || "doubled grid did not converge".into())?;
    let gap = r
        .solution
        .nodes()
        .iter()
        .zip(r.solution.values())
        .map(|(&t, &u)| (u - rf.solution.eval(t)).abs())
        .fold(0.0, f64::max);
    ensure(gap <= 1e-5, || format!("grid agreement {gap:e}"))?;
    Ok(format!(
        "{} iterations, residual {:.1e}, bc {:.1e}, cone slack {:.1e}, doubled-grid gap {gap:.1e}, ‖u‖ = {:e}",
        r.iterations, v.integral_form_residual, bc, v.cone_slack, v.sup_norm
    ))
}

fn criterion_8(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let alpha = 3.0 - rng.gen::<f64>();
        let eta = rng.gen_range(0.05..0.95);
        let p = rng.gen_range(1.2..4.0);
        let pb = Problem::parse_exprs(alpha, eta, p, "1", "1").map_err(err)?;
        let c0 = rng.gen_range(0.0..1.0);
        let terms: Vec<(f64, f64, f64)> =
            (0..3).map(|_| (rng.gen_range(0.0..2.0), rng.gen_range(0.5..6.0), rng.gen_range(0.0..PI))).collect();
        let h = sample(&pb, Interpolation::Cubic, |t| {
            c0 + terms.iter().map(|&(c, k, ph)| c * (k * t + ph).sin().powi(2)).sum::<f64>()
        })
        .map_err(err)?;
        let a = kernel_route(&pb, &h).map_err(err)?;
        let b = integral_form_route(&pb, &h).map_err(err)?;
        let d = a.distance(&b);
        worst = worst.max(d);
        ensure(d <= 1e-8, || format!("routes differ by {d:e} at α={alpha} η={eta} p={p}"))?;
    }
    Ok(format!("10 random h, max sup-norm gap {worst:.1e}"))
}

fn criterion_9(rng: &mut ChaCha8Rng) -> Outcome {
    const TOL: f64 = 1e-10;
    let g = |x: f64| gamma(x).map_err(err);
    let b = |p: f64, q: f64| beta(p, q).map_err(err);
    for _ in 0..1000 {
        let x = rng.gen_range(1e-3..20.0);
        ensure(rel_close(g(x + 1.0)?, x * g(x)?, TOL), || format!("Γ(x+1) ≠ xΓ(x) at {x}"))?;
        let (p, q) = (rng.gen_range(1e-2..10.0), rng.gen_range(1e-2..10.0));
        let bpq = b(p, q)?;
        ensure(rel_close(bpq, b(q, p)?, TOL), || format!("B symmetry at ({p}, {q})"))?;
        ensure(rel_close(bpq, b(p, q + 1.0)? + b(p + 1.0, q)?, TOL), || format!("B sum recursion at ({p}, {q})"))?;
        ensure(rel_close(b(p + 1.0, q)?, bpq * p / (p + q), TOL), || format!("B ratio recursion at ({p}, {q})"))?;
        ensure(rel_close(b(1.0, q)?, 1.0 / q, TOL), || format!("B(1, q) ≠ 1/q at {q}"))?;
    }
    let mut fact = 1.0;
    for n in 0..=15 {
        if n > 0 {
            fact *= n as f64;
        }
        ensure(rel_close(g(n as f64 + 1.0)?, fact, 1e-12), || format!("Γ({}) ≠ {n}!", n + 1))?;
    }
    ensure(rel_close(g(0.5)?, PI.sqrt(), TOL), || "Γ(1/2) ≠ √π".into())?;
    Ok("Γ recursion, factorials, beta symmetry and recursions, Γ(1/2) = √π".into())
}

fn main() -> ExitCode {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut failed = 0;
    let mut report = |n: u32, name: &str, limit: Option<Duration>, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match (outcome, limit) {
            (Ok(_), Some(limit)) if elapsed > limit => Err(format!("took {elapsed:.2?}, limit {limit:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {n} PASS  {name}: {detail} ({elapsed:.2?})"),
            Err(why) => {
                failed += 1;
                println!("criterion {n} FAIL  {name}: {why} ({elapsed:.2?})");
            }
        }
    };
    let secs = |s| Some(Duration::from_secs(s));

    report(1, "ex41 Leray-Schauder check", secs(5), &mut criterion_1);
    report(2, "ex42 small-p contraction check", secs(5), &mut criterion_2);
    report(3, "ex43 reproduction", secs(30), &mut criterion_3);
    report(4, "kernel bounds", secs(10), &mut || criterion_4(&mut rng));
    report(5, "lambda ordering", secs(30), &mut || criterion_5(&mut rng));
    report(6, "quadrature oracles", None, &mut || criterion_6(&mut rng));
    report(7, "ex41 solver self-consistency", None, &mut criterion_7);
    report(8, "route equivalence", None, &mut || criterion_8(&mut rng));
    report(9, "special function identities", None, &mut || criterion_9(&mut rng));

    if failed == 0 {
        println!("acceptance: all 9 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 9 criteria fail");
        ExitCode::FAILURE
    }
}
