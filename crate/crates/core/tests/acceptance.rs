//! Acceptance gate: runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ahe_eigen::asymptotics::{two_term_report, TwoTermTolerances};
use ahe_eigen::lee_bound::{ball_lower_bound, min_c_n, LeeEigenfunction, LeeParameters};
use ahe_eigen::models::{DomainSpec, RadialFunction, WarpedModel, Warping};
use ahe_eigen::quadrature::{integrate, QuadOptions};
use ahe_eigen::radial_solver::{fd_oracle, first_eigenvalue};
use ahe_eigen::rayleigh::{
    g_expansion_check, hyperbolic_upper_bound, rayleigh_quotient, sin2_exp_integral,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SOLVER_TOL: f64 = 1e-10;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn spec(r: f64) -> DomainSpec {
    DomainSpec::new(r).expect("valid radius")
}

fn lambda(model: &WarpedModel, r: f64) -> Result<f64, String> {
    first_eigenvalue(model, spec(r), SOLVER_TOL)
        .map(|e| e.lambda)
        .map_err(|e| format!("{model} R={r}: {e}"))
}

fn exact_bands() -> Outcome {
    let mut cases = Vec::new();
    for n in [2, 3] {
        for r in [2.0, 5.0, 10.0] {
            let nf = f64::from(n);
            cases.push((
                WarpedModel::new(n, Warping::Exp).unwrap(),
                r,
                0.25 * nf * nf + PI * PI / (4.0 * r * r),
            ));
        }
    }
    for r in [2.0, 5.0, 10.0] {
        cases.push((
            WarpedModel::new(2, Warping::Cosh).unwrap(),
            r,
            1.0 + PI * PI / (4.0 * r * r),
        ));
    }
    let (mut worst, mut slowest) = (0.0f64, Duration::ZERO);
    let mut bad = Vec::new();
    for (model, r, exact) in &cases {
        let start = Instant::now();
        let err = (lambda(model, *r)? - exact).abs();
        let took = start.elapsed();
        worst = worst.max(err);
        slowest = slowest.max(took);
        if !(err < 1e-8) || took >= Duration::from_secs(1) {
            bad.push(format!("{model} R={r}: err {err:.2e}, {took:?}"));
        }
    }
    let summary = format!(
        "{} cases, max error {worst:.2e}, slowest {slowest:.2?}",
        cases.len()
    );
    if bad.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", bad.join("; ")))
    }
}

fn hyperbolic_closed_form() -> Outcome {
    let model = WarpedModel::hyperbolic(2).unwrap();
    let mut worst = 0.0f64;
    for r in [5.0, 10.0, 20.0, 40.0] {
        worst = worst.max((lambda(&model, r)? - (1.0 + PI * PI / (r * r))).abs());
    }
    let summary = format!("max |λ − (1 + π²/R²)| = {worst:.2e}");
    if worst < 1e-8 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn two_term_fit() -> Outcome {
    let base = [10.0, 14.0, 20.0, 28.0, 40.0];
    let doubled = base.map(|r| 2.0 * r);
    let tol = TwoTermTolerances::default();
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [1, 3] {
        let model = WarpedModel::hyperbolic(n).unwrap();
        let rep = two_term_report(&model, &base, SOLVER_TOL, tol).map_err(|e| e.to_string())?;
        let wide = two_term_report(&model, &doubled, SOLVER_TOL, tol).map_err(|e| e.to_string())?;
        let non_increasing = wide.max_scaled_residual <= rep.max_scaled_residual;
        let c0_err = rep.fit.c0 - rep.targets.c0;
        let c2_rel = rep.fit.c2 / rep.targets.c2 - 1.0;
        let pass = rep.passed() && non_increasing;
        ok &= pass;
        parts.push(format!(
            "n={n} {}: c0 {c0_err:+.2e}{}, c2 {:+.2}%{}, max|scaled| {:.2}{} → {:.2} on doubled range{}",
            if pass { "ok" } else { "FAILED" },
            mark(rep.c0_ok),
            100.0 * c2_rel,
            mark(rep.c2_ok),
            rep.max_scaled_residual,
            mark(rep.bounded_ok),
            wide.max_scaled_residual,
            mark(non_increasing),
        ));
    }
    let took = start.elapsed();
    ok &= took < Duration::from_secs(30);
    let summary = format!("{} ({took:.2?})", parts.join("; "));
    if ok {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        ""
    } else {
        " ✗"
    }
}

fn sin2_closed_form() -> Outcome {
    let opts = QuadOptions {
        rel_tol: 1e-13,
        ..QuadOptions::default()
    };
    let mut worst = 0.0f64;
    for r in [0.5, 1.0, 2.0, 10.0, 100.0] {
        let closed = sin2_exp_integral(r).map_err(|e| e.to_string())?;
        let quad = integrate(|th| (-r * th).exp() * th.sin().powi(2), 0.0, PI, opts)
            .map_err(|e| e.to_string())?
            .value;
        worst = worst.max(((closed - quad) / quad).abs());
    }
    let summary = format!("max relative error {worst:.2e}");
    if worst < 1e-10 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn g_expansion() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in 1..=3 {
        let res: Vec<f64> = [50.0, 100.0, 200.0]
            .iter()
            .map(|&r| g_expansion_check(n, r).map(f64::abs))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        ok &= res[1] < res[0] && res[2] < res[1];
        parts.push(format!(
            "n={n}: {:.2e} > {:.2e} > {:.2e}",
            res[0], res[1], res[2]
        ));
    }
    let summary = parts.join("; ");
    if ok {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn sandwich() -> Outcome {
    let mut bad = Vec::new();
    let mut widest = 0.0f64;
    for n in [2, 3] {
        let model = WarpedModel::hyperbolic(n).unwrap();
        let floor = 0.25 * f64::from(n * n);
        for r in [10.0, 20.0, 40.0] {
            let lower = ball_lower_bound(n, r).map_err(|e| e.to_string())?;
            let lam = lambda(&model, r)?;
            let upper = hyperbolic_upper_bound(n, r)
                .map_err(|e| e.to_string())?
                .quotient_fg;
            let band = PI * PI / (r * r) + 0.1;
            widest = widest.max(upper - lower);
            let within = [lower, lam, upper]
                .iter()
                .all(|v| (v - floor).abs() <= band);
            if !(lower <= lam && lam <= upper && within) {
                bad.push(format!("n={n} R={r}: {lower} ≤ {lam} ≤ {upper}?"));
            }
        }
    }
    let summary = format!("6 cases, widest upper − lower = {widest:.3e}");
    if bad.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", bad.join("; ")))
    }
}

fn pointwise_certification() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for n in [2, 3] {
        for eps in [1e-3, 1e-4] {
            let p = LeeParameters::with_c_n(n, eps, min_c_n(n)).map_err(|e| e.to_string())?;
            let margin = p.pointwise_lower_bound_check(10_000);
            let tmax = p.domain_radius();
            let mut worst_res = 0.0f64;
            let mut ratios = Vec::new();
            for t in [0.5, 0.5 * tmax, 0.9 * tmax] {
                let c = p.identity_convergence(t, 1e-3).map_err(|e| e.to_string())?;
                worst_res = worst_res.max(c.coarse.abs());
                ratios.push(c.coarse / c.fine);
            }
            let ratio_ok = ratios.iter().all(|q| (q - 4.0).abs() < 0.4);
            let pass = margin >= 0.0 && worst_res < 1e-5 && ratio_ok;
            ok &= pass;
            let shown: Vec<String> = ratios.iter().map(|q| format!("{q:.3}")).collect();
            parts.push(format!(
                "n={n} ε={eps:e}: min margin {margin:.2e}, residual {worst_res:.1e}, ratios [{}]",
                shown.join(", ")
            ));
        }
    }
    let summary = parts.join("; ");
    if ok {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn oracle_equivalence() -> Outcome {
    let cases = [
        (Warping::Sinh, 2, 5.0, 20_000),
        (Warping::Sinh, 3, 8.0, 40_000),
        (Warping::Linear, 2, 1.0, 20_000),
        (Warping::Linear, 4, 3.0, 20_000),
        (Warping::Exp, 3, 4.0, 20_000),
        (Warping::Cosh, 2, 3.0, 20_000),
    ];
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for (w, n, r, mesh) in cases {
        let model = WarpedModel::new(n, w).unwrap();
        let shot = lambda(&model, r)?;
        let fd = fd_oracle(&model, spec(r), mesh).map_err(|e| e.to_string())?;
        let gap = (shot - fd).abs();
        worst = worst.max(gap);
        if !(gap < 1e-5) {
            bad.push(format!("{model} R={r}: {shot} vs {fd}"));
        }
    }
    let summary = format!("{} cases, max gap {worst:.2e}", cases.len());
    if bad.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; {}", bad.join("; ")))
    }
}

/// `(R² − t²)·(c₀ + Σ cₖ·exp(−(t − mₖ)²/(2sₖ²)))`, which vanishes at `|t| = R`.
fn random_bump(rng: &mut ChaCha8Rng, lo: f64, r: f64) -> RadialFunction {
    let c0: f64 = rng.random_range(0.2..1.0);
    let bumps: Vec<(f64, f64, f64)> = (0..rng.random_range(1..4))
        .map(|_| {
            (
                rng.random_range(-1.0..1.0),
                rng.random_range(lo..r),
                rng.random_range(0.1 * r..0.5 * r),
            )
        })
        .collect();
    RadialFunction::new("random-bump", move |t| {
        let mut g = c0;
        let mut dg = 0.0;
        for &(c, m, s) in &bumps {
            let e = c * (-(t - m).powi(2) / (2.0 * s * s)).exp();
            g += e;
            dg -= e * (t - m) / (s * s);
        }
        let cap = r * r - t * t;
        (cap * g, cap * dg - 2.0 * t * g)
    })
}

fn variational_dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_2024);
    let mut worst = f64::INFINITY;
    for _ in 0..20 {
        let (w, n) = match rng.random_range(0..4) {
            0 => (Warping::Sinh, rng.random_range(1..5)),
            1 => (Warping::Linear, rng.random_range(1..5)),
            2 => (Warping::Exp, rng.random_range(1..5)),
            _ => (Warping::Cosh, 2),
        };
        let model = WarpedModel::new(n, w).unwrap();
        let r: f64 = rng.random_range(1.0..10.0);
        let lo = if model.is_ball() { 0.0 } else { -r };
        let f = random_bump(&mut rng, lo, r);
        let q = rayleigh_quotient(&model, spec(r), &f).map_err(|e| e.to_string())?;
        let lam = lambda(&model, r)?;
        worst = worst.min(q - lam);
        if !(q >= lam - 1e-9) {
            return Err(format!("{model} R={r}: quotient {q} below λ₁ = {lam}"));
        }
    }
    Ok(format!("20 random bumps, min(quotient − λ₁) = {worst:.3e}"))
}

fn cosh_eigenfunction_identity() -> Outcome {
    let mut worst = 0.0f64;
    for n in [2, 3, 4] {
        let u = LeeEigenfunction { n };
        for i in 0..=10_000 {
            let t = 0.01 + (30.0 - 0.01) * f64::from(i) / 10_000.0;
            worst = worst.max(u.relative_residual(t).abs());
        }
    }
    let summary = format!("max |Δu − (n+1)u|/u = {worst:.2e}");
    if worst < 1e-10 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("exact band eigenvalues", exact_bands),
        ("hyperbolic closed form", hyperbolic_closed_form),
        ("two-term fit", two_term_fit),
        ("sin² exponential integral", sin2_closed_form),
        ("G expansion coefficient", g_expansion),
        ("lower ≤ λ₁ ≤ upper sandwich", sandwich),
        (
            "pointwise lower-bound certification",
            pointwise_certification,
        ),
        ("shooting vs finite-volume oracle", oracle_equivalence),
        ("variational dominance", variational_dominance),
        ("cosh t eigenfunction identity", cosh_eigenfunction_identity),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("criterion {:>2} {tag} {name} [{took:.2?}]: {detail}", i + 1);
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
