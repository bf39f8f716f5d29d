//! Named numerical self-checks run by `ahe-eigen verify`.

use std::f64::consts::PI;

use ahe_eigen::asymptotics::two_term_targets;
use ahe_eigen::lee_bound::{ball_lower_bound, LeeEigenfunction, LeeParameters};
use ahe_eigen::models::{DomainSpec, WarpedModel, Warping};
use ahe_eigen::quadrature::{integrate, QuadOptions};
use ahe_eigen::radial_solver::first_eigenvalue;
use ahe_eigen::rayleigh::{g_expansion_check, hyperbolic_upper_bound, sin2_exp_integral};
use anyhow::Result;
use clap::ValueEnum;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    /// ∫₀^π e^{−rθ}sin²θ closed form against quadrature
    Sin2ClosedForm,
    /// R³-scaled G deficit approaches its series coefficient
    GExpansion,
    /// cosh t solves Δu = (n+1)u
    CoshEigenfunction,
    /// finite-difference −Δψ/ψ matches the closed form at second order
    PsiIdentity,
    /// −Δψ/ψ ≥ n²/4 + a² on a 10⁴-point grid
    PsiPointwise,
    /// exp and cosh band eigenvalues against their closed forms
    ExactBands,
    /// lower bound ≤ λ₁ ≤ Rayleigh upper bound on hyperbolic balls
    Sandwich,
}

impl CheckName {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Sin2ClosedForm => "sin2-closed-form",
            Self::GExpansion => "g-expansion",
            Self::CoshEigenfunction => "cosh-eigenfunction",
            Self::PsiIdentity => "psi-identity",
            Self::PsiPointwise => "psi-pointwise",
            Self::ExactBands => "exact-bands",
            Self::Sandwich => "sandwich",
        }
    }
}

/// How `measured` is compared with `threshold`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Comparison {
    #[serde(rename = "<")]
    Below,
    #[serde(rename = ">=")]
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub check: String,
    pub measured: Option<f64>,
    pub comparison: Comparison,
    pub threshold: f64,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<CheckEntry>,
}

fn entry(
    name: CheckName,
    measured: f64,
    comparison: Comparison,
    threshold: f64,
    detail: String,
) -> CheckEntry {
    let passed = match comparison {
        Comparison::Below => measured < threshold,
        Comparison::AtLeast => measured >= threshold,
    };
    CheckEntry {
        check: name.as_str().into(),
        measured: Some(measured),
        comparison,
        threshold,
        passed,
        detail,
    }
}

fn errored(
    name: CheckName,
    comparison: Comparison,
    threshold: f64,
    err: anyhow::Error,
) -> CheckEntry {
    CheckEntry {
        check: name.as_str().into(),
        measured: None,
        comparison,
        threshold,
        passed: false,
        detail: format!("error: {err:#}"),
    }
}

fn solve(model: &WarpedModel, r: f64, tol: f64) -> Result<f64> {
    Ok(first_eigenvalue(model, DomainSpec::new(r)?, tol)?.lambda)
}

fn sin2_closed_form() -> Result<(f64, String)> {
    let opts = QuadOptions {
        rel_tol: 1e-13,
        ..QuadOptions::default()
    };
    let mut worst = 0.0f64;
    for r in [0.5, 1.0, 2.0, 10.0, 100.0] {
        let closed = sin2_exp_integral(r)?;
        let quad = integrate(|th| (-r * th).exp() * th.sin().powi(2), 0.0, PI, opts)?.value;
        worst = worst.max(((closed - quad) / quad).abs());
    }
    Ok((
        worst,
        "max relative error over r = 0.5, 1, 2, 10, 100".into(),
    ))
}

/// Largest ratio of successive `|residual|` along R = 50, 100, 200.
fn g_expansion() -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for n in 1..=3 {
        let res = [50.0, 100.0, 200.0]
            .iter()
            .map(|&r| g_expansion_check(n, r).map(f64::abs))
            .collect::<Result<Vec<f64>, _>>()?;
        worst = worst.max(res[1] / res[0]).max(res[2] / res[1]);
        parts.push(format!("n={n}: {:?}", res));
    }
    Ok((
        worst,
        format!(
            "successive residual ratios must be < 1; {}",
            parts.join("; ")
        ),
    ))
}

fn cosh_eigenfunction() -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    for n in [2, 3, 4] {
        let u = LeeEigenfunction { n };
        for i in 0..=10_000 {
            let t = 0.01 + (30.0 - 0.01) * f64::from(i) / 10_000.0;
            worst = worst.max(u.relative_residual(t).abs());
        }
    }
    Ok((
        worst,
        "max |Δu − (n+1)u|/u for n = 2, 3, 4 on t ∈ [0.01, 30]".into(),
    ))
}

fn epsilons(epsilon: Option<f64>) -> Vec<f64> {
    epsilon.map_or_else(|| vec![1e-3, 1e-4], |e| vec![e])
}

fn psi_identity(epsilon: Option<f64>) -> Result<(f64, String)> {
    let mut worst = 0.0f64;
    let mut ratios = Vec::new();
    for n in [2, 3] {
        for eps in epsilons(epsilon) {
            let p = LeeParameters::new(n, eps)?;
            let tmax = p.domain_radius();
            for t in [0.5f64.min(0.5 * tmax), 0.5 * tmax, 0.9 * tmax] {
                let c = p.identity_convergence(t, 1e-3)?;
                worst = worst.max(c.coarse.abs());
                ratios.push(c.coarse / c.fine);
            }
        }
    }
    let ratio_ok = ratios.iter().all(|q| (q - 4.0).abs() < 0.4);
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &q| {
            (a.min(q), b.max(q))
        });
    let detail = format!("residual at h = 1e-3; halving h shrinks it by {lo:.4}..{hi:.4}");
    // a wrong convergence rate fails the check regardless of the residual size
    Ok((if ratio_ok { worst } else { f64::INFINITY }, detail))
}

fn psi_pointwise(epsilon: Option<f64>) -> Result<(f64, String)> {
    let mut worst = f64::INFINITY;
    let mut parts = Vec::new();
    for n in [2, 3] {
        for eps in epsilons(epsilon) {
            let m = LeeParameters::new(n, eps)?.pointwise_lower_bound_check(10_000);
            worst = worst.min(m);
            parts.push(format!("n={n} ε={eps:e}: {m:?}"));
        }
    }
    Ok((worst, format!("min sech²t·bracket; {}", parts.join("; "))))
}

fn exact_bands(tol: f64) -> Result<(f64, String)> {
    let mut cases = Vec::new();
    for n in [2, 3] {
        for r in [2.0, 5.0, 10.0] {
            cases.push((WarpedModel::new(n, Warping::Exp)?, r));
        }
    }
    for r in [2.0, 5.0, 10.0] {
        cases.push((WarpedModel::new(2, Warping::Cosh)?, r));
    }
    let errs = cases
        .par_iter()
        .map(|(model, r)| {
            let target = two_term_targets(model).expect("band laws are known");
            let lam = solve(model, *r, tol)?;
            Ok((lam - target.c0 - target.c2 / (r * r)).abs())
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = errs.iter().fold(0.0f64, |a, &b| a.max(b));
    Ok((
        worst,
        format!("max |λ − exact| over {} band cases", cases.len()),
    ))
}

/// Smallest slack among `λ − lower`, `upper − λ` and the distance of each
/// value to the edge of the `n²/4 + π²/R² + 0.1` window.
fn sandwich(tol: f64) -> Result<(f64, String)> {
    let cases: Vec<(u32, f64)> = [2, 3]
        .iter()
        .flat_map(|&n| [10.0, 20.0, 40.0].map(|r| (n, r)))
        .collect();
    let slacks = cases
        .par_iter()
        .map(|&(n, r)| {
            let lower = ball_lower_bound(n, r)?;
            let lam = solve(&WarpedModel::hyperbolic(n)?, r, tol)?;
            let upper = hyperbolic_upper_bound(n, r)?.quotient_fg;
            let floor = 0.25 * f64::from(n * n);
            let band = PI * PI / (r * r) + 0.1;
            let window = [lower, lam, upper]
                .iter()
                .map(|v| band - (v - floor).abs())
                .fold(f64::INFINITY, f64::min);
            Ok((lam - lower).min(upper - lam).min(window))
        })
        .collect::<Result<Vec<f64>>>()?;
    let worst = slacks.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    Ok((worst, "min slack over n = 2, 3 and R = 10, 20, 40".into()))
}

pub fn run(only: &[CheckName], epsilon: Option<f64>, tol: f64) -> VerifyReport {
    let mut selected: Vec<CheckName> = if only.is_empty() {
        CheckName::value_variants().to_vec()
    } else {
        only.to_vec()
    };
    selected.sort();
    selected.dedup();

    let checks: Vec<CheckEntry> = selected
        .par_iter()
        .map(|&name| {
            use Comparison::*;
            let (comparison, threshold, result) = match name {
                CheckName::Sin2ClosedForm => (Below, 1e-10, sin2_closed_form()),
                CheckName::GExpansion => (Below, 1.0, g_expansion()),
                CheckName::CoshEigenfunction => (Below, 1e-10, cosh_eigenfunction()),
                CheckName::PsiIdentity => (Below, 1e-5, psi_identity(epsilon)),
                CheckName::PsiPointwise => (AtLeast, 0.0, psi_pointwise(epsilon)),
                CheckName::ExactBands => (Below, 1e-8, exact_bands(tol)),
                CheckName::Sandwich => (AtLeast, 0.0, sandwich(tol)),
            };
            match result {
                Ok((measured, detail)) => entry(name, measured, comparison, threshold, detail),
                Err(e) => errored(name, comparison, threshold, e),
            }
        })
        .collect();
    VerifyReport {
        passed: checks.iter().all(|c| c.passed),
        checks,
    }
}
