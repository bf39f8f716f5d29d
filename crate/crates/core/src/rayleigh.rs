//! Rayleigh quotients of radial test functions, and the hyperbolic-ball
//! upper bound built from `f = e^{-nt/2}·sin(πt/R)`.
//!
//! For that test function on `B(R) ⊂ H^{n+1}` the quotient reduces, after
//! `e^{-nt} sinh^n t = 2^{-n}(1 − e^{-2t})^n` and `θ = πt/R`, to `F(R)/G(R)`
//! with
//!
//! ```text
//! F(R) = ∫₀^π (1 − e^{−2Rθ/π})^n (−(n/2) sin θ + (π/R) cos θ)² dθ
//! G(R) = ∫₀^π (1 − e^{−2Rθ/π})^n sin²θ dθ
//! ```
//!
//! and `π/2 − G(R) = (π³/4)·S(n)/R³ + O(R⁻⁵)` where
//! `S(n) = Σ_{k=1}^n C(n,k)(−1)^{k+1}/k³`.

use std::f64::consts::{FRAC_PI_2, PI};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{DomainSpec, ModelError, RadialFunction, WarpedModel};
use crate::quadrature::{integrate_with_breaks, QuadError, QuadOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RayleighError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("test function `{tag}` does not vanish at t = {t} (relative value {value:e})")]
    BoundaryViolated { tag: String, t: f64, value: f64 },
    #[error("test function `{0}` is identically zero on the domain")]
    ZeroFunction(String),
    #[error("{0}")]
    InvalidArgument(String),
}

/// Relative size a test function may have at a Dirichlet endpoint.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// Limit of [`sin2_exp_integral`] as `r → 0⁺`.
pub const SIN2_INTEGRAL_AT_ZERO: f64 = FRAC_PI_2;

fn quad_opts() -> QuadOptions {
    QuadOptions::default()
}

/// `∫ |f'|² dV / ∫ f² dV` over the domain, with `dV = w^n dt`.
pub fn rayleigh_quotient(
    model: &WarpedModel,
    spec: DomainSpec,
    f: &RadialFunction,
) -> Result<f64, RayleighError> {
    let (a, b) = model.interval(spec);
    let probes = 256;
    let scale = (0..probes)
        .map(|i| {
            f.value(a + (b - a) * (i as f64 + 0.5) / probes as f64)
                .abs()
        })
        .fold(0.0, f64::max);
    if !(scale > 0.0) {
        return Err(RayleighError::ZeroFunction(f.tag().to_string()));
    }
    let mut ends = vec![b];
    if !model.is_ball() {
        ends.push(a);
    }
    for t in ends {
        let value = f.value(t) / scale;
        if !(value.abs() < BOUNDARY_TOL) {
            return Err(RayleighError::BoundaryViolated {
                tag: f.tag().to_string(),
                t,
                value,
            });
        }
    }

    // weights are formed in log space so large domains do not overflow
    let weight = |t: f64| model.log_volume_density(t).map(f64::exp).unwrap_or(0.0);
    let breaks: Vec<f64> = (1..16).map(|i| a + (b - a) * f64::from(i) / 16.0).collect();
    let num = integrate_with_breaks(
        |t| {
            let d = f.derivative(t);
            d * d * weight(t)
        },
        a,
        b,
        &breaks,
        quad_opts(),
    )?;
    let den = integrate_with_breaks(
        |t| {
            let v = f.value(t);
            v * v * weight(t)
        },
        a,
        b,
        &breaks,
        quad_opts(),
    )?;
    if !(den.value > 0.0) {
        return Err(RayleighError::ZeroFunction(f.tag().to_string()));
    }
    Ok(num.value / den.value)
}

/// Everything the hyperbolic upper bound produces at one radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UpperBoundReport {
    pub radius: f64,
    /// `F(R)/G(R)`, the Rayleigh quotient of the decaying sine.
    pub quotient_fg: f64,
    /// `n²/4 + π²/R² + (n²π²/8)·S(n)/R³`.
    pub three_term: f64,
    pub f_value: f64,
    pub g_value: f64,
}

fn theta_breaks(radius: f64) -> Vec<f64> {
    [0.25, 0.5, 1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|k| k * PI / radius)
        .filter(|&x| x < PI)
        .collect()
}

/// `1 − (1 − e^{−x})^n`, accurate for both small and large `x`.
fn weight_deficit(n: u32, x: f64) -> f64 {
    -(f64::from(n) * (-(-x).exp()).ln_1p()).exp_m1()
}

/// `π/2 − G(R)`, integrated directly to avoid cancellation.
pub fn g_deficit(n: u32, radius: f64) -> Result<f64, RayleighError> {
    let scale = 2.0 * radius / PI;
    let r = integrate_with_breaks(
        |th| weight_deficit(n, scale * th) * th.sin().powi(2),
        0.0,
        PI,
        &theta_breaks(radius),
        quad_opts(),
    )?;
    Ok(r.value)
}

/// Upper bound on `λ₁(B(R))` in `H^{n+1}` from the test function
/// `e^{-nt/2}·sin(πt/R)`.
pub fn hyperbolic_upper_bound(n: u32, radius: f64) -> Result<UpperBoundReport, RayleighError> {
    if n < 1 {
        return Err(RayleighError::InvalidArgument(format!(
            "n must be at least 1 (got {n})"
        )));
    }
    if !(radius >= 1.0 && radius.is_finite()) {
        return Err(RayleighError::InvalidArgument(format!(
            "radius must be at least 1 (got {radius})"
        )));
    }
    let nf = f64::from(n);
    let scale = 2.0 * radius / PI;
    let k = PI / radius;
    let f_value = integrate_with_breaks(
        |th| {
            let w = (-(-scale * th).exp_m1()).powi(n as i32);
            let (s, c) = th.sin_cos();
            w * (k * c - 0.5 * nf * s).powi(2)
        },
        0.0,
        PI,
        &theta_breaks(radius),
        quad_opts(),
    )?
    .value;
    let g_value = FRAC_PI_2 - g_deficit(n, radius)?;
    let three_term =
        0.25 * nf * nf + k * k + nf * nf * PI * PI / 8.0 * expansion_sum(n) / radius.powi(3);
    Ok(UpperBoundReport {
        radius,
        quotient_fg: f_value / g_value,
        three_term,
        f_value,
        g_value,
    })
}

/// `∫₀^π e^{−rθ} sin²θ dθ = 2(1 − e^{−πr})/(r(r² + 4))` for `r > 0`.
pub fn sin2_exp_integral(r: f64) -> Result<f64, RayleighError> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(RayleighError::InvalidArgument(format!(
            "r must be positive and finite (got {r}); the r → 0 limit is SIN2_INTEGRAL_AT_ZERO"
        )));
    }
    Ok(-2.0 * (-PI * r).exp_m1() / (r * (r * r + 4.0)))
}

/// `S(n) = Σ_{k=1}^n C(n,k)·(−1)^{k+1}/k³`, summed exactly.
pub fn expansion_sum(n: u32) -> f64 {
    let mut sum = BigRational::zero();
    let mut binom = BigInt::one();
    for k in 1..=n {
        binom = binom * BigInt::from(n - k + 1) / BigInt::from(k);
        let term = BigRational::new(binom.clone(), BigInt::from(k).pow(3));
        if k % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum.to_f64().unwrap_or(f64::NAN)
}

/// `(π/2 − G(R))·R³ − (π³/4)·S(n)`; shrinks like `R⁻²`.
pub fn g_expansion_check(n: u32, radius: f64) -> Result<f64, RayleighError> {
    if !(radius >= 10.0 && radius.is_finite()) {
        return Err(RayleighError::InvalidArgument(format!(
            "radius must be at least 10 (got {radius})"
        )));
    }
    if n < 1 {
        return Err(RayleighError::InvalidArgument(format!(
            "n must be at least 1 (got {n})"
        )));
    }
    Ok(g_deficit(n, radius)? * radius.powi(3) - PI.powi(3) / 4.0 * expansion_sum(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Warping;
    use crate::quadrature::integrate;

    fn spec(r: f64) -> DomainSpec {
        DomainSpec::new(r).unwrap()
    }

    fn sin2_oracle(r: f64) -> f64 {
        let opts = QuadOptions {
            rel_tol: 1e-13,
            ..QuadOptions::default()
        };
        integrate(|th| (-r * th).exp() * th.sin().powi(2), 0.0, PI, opts)
            .unwrap()
            .value
    }

    #[test]
    fn sin2_exp_integral_examples() {
        let v = sin2_exp_integral(2.0).unwrap();
        assert!((v - (1.0 - (-2.0 * PI).exp()) / 8.0).abs() < 1e-16);
        assert!((v - 0.124_766_569_658_536_5).abs() < 1e-15);
        assert!((v - sin2_oracle(2.0)).abs() < 1e-12);

        let v = sin2_exp_integral(10.0).unwrap();
        assert!((v - 1.923_076_923e-3).abs() < 1e-12);
        assert!(((v - sin2_oracle(10.0)) / v).abs() < 1e-10);

        assert!((sin2_exp_integral(1e-6).unwrap() - SIN2_INTEGRAL_AT_ZERO).abs() < 1e-5);
        assert!(sin2_exp_integral(0.0).is_err());
        assert!(sin2_exp_integral(-1.0).is_err());
    }

    #[test]
    fn expansion_sum_examples() {
        assert_eq!(expansion_sum(1), 1.0);
        assert_eq!(expansion_sum(2), 1.875);
        let brute = 4.0 - 6.0 / 8.0 + 4.0 / 27.0 - 1.0 / 64.0;
        assert!((expansion_sum(4) - brute).abs() < 1e-15);
        assert!((expansion_sum(4) - 3.382_53).abs() < 1e-5);
    }

    #[test]
    fn expansion_sum_large_n_is_stable() {
        // S(n) = Σ_{k≤n} H_k^{(2)}/k ... grows like ln³n/6; check positivity
        // and monotonic growth where naive float summation breaks down.
        let mut prev = 0.0;
        for n in [10, 20, 40, 80] {
            let s = expansion_sum(n);
            assert!(s.is_finite() && s > prev, "n={n} s={s}");
            prev = s;
        }
    }

    #[test]
    fn g_deficit_matches_closed_forms() {
        for &radius in &[5.0, 20.0, 100.0] {
            let r = 2.0 * radius / PI;
            let one = g_deficit(1, radius).unwrap();
            let want = sin2_exp_integral(r).unwrap();
            assert!(((one - want) / want).abs() < 1e-10);
            // 1 − (1 − y)² = 2y − y²
            let two = g_deficit(2, radius).unwrap();
            let want = 2.0 * sin2_exp_integral(r).unwrap() - sin2_exp_integral(2.0 * r).unwrap();
            assert!(((two - want) / want).abs() < 1e-10);
        }
    }

    #[test]
    fn rayleigh_examples() {
        let ball = WarpedModel::new(2, Warping::Sinh).unwrap();
        for radius in [5.0, 10.0, 20.0] {
            let q = rayleigh_quotient(
                &ball,
                spec(radius),
                &RadialFunction::decaying_sine(2, radius),
            )
            .unwrap();
            assert!(q >= 1.0 + PI * PI / (radius * radius) - 1e-9);
        }

        let band = WarpedModel::new(2, Warping::Exp).unwrap();
        let q =
            rayleigh_quotient(&band, spec(5.0), &RadialFunction::exp_band_mode(2, 5.0)).unwrap();
        assert!((q - (1.0 + PI * PI / 100.0)).abs() < 1e-9);

        let euclid = WarpedModel::new(2, Warping::Linear).unwrap();
        let sinc = RadialFunction::new("sin(πt)/t", |t: f64| {
            if t.abs() < 1e-4 {
                let p2 = PI * PI;
                (PI * (1.0 - p2 * t * t / 6.0), -PI * p2 * t / 3.0)
            } else {
                let (s, c) = (PI * t).sin_cos();
                (s / t, (PI * c * t - s) / (t * t))
            }
        });
        let q = rayleigh_quotient(&euclid, spec(1.0), &sinc).unwrap();
        assert!((q - PI * PI).abs() < 1e-9, "{q}");
    }

    #[test]
    fn rayleigh_rejections() {
        let band = WarpedModel::new(2, Warping::Exp).unwrap();
        let not_vanishing = RadialFunction::new("one", |_| (1.0, 0.0));
        assert!(matches!(
            rayleigh_quotient(&band, spec(1.0), &not_vanishing),
            Err(RayleighError::BoundaryViolated { .. })
        ));
        // vanishes at +R but not at −R
        let half = RadialFunction::new("1-t", |t| (1.0 - t, -1.0));
        assert!(matches!(
            rayleigh_quotient(&band, spec(1.0), &half),
            Err(RayleighError::BoundaryViolated { t, .. }) if t == -1.0
        ));
        let zero = RadialFunction::new("zero", |_| (0.0, 0.0));
        assert!(matches!(
            rayleigh_quotient(&band, spec(1.0), &zero),
            Err(RayleighError::ZeroFunction(_))
        ));
    }

    #[test]
    fn substitution_chain_is_consistent() {
        for n in 1..=3 {
            let ball = WarpedModel::hyperbolic(n).unwrap();
            for radius in [5.0, 10.0, 20.0] {
                let direct = rayleigh_quotient(
                    &ball,
                    spec(radius),
                    &RadialFunction::decaying_sine(n, radius),
                )
                .unwrap();
                let report = hyperbolic_upper_bound(n, radius).unwrap();
                assert!(
                    ((direct - report.quotient_fg) / direct).abs() < 1e-9,
                    "n={n} R={radius}: {direct} vs {}",
                    report.quotient_fg
                );
            }
        }
    }

    #[test]
    fn upper_bound_report_invariants() {
        for n in 1..=4 {
            for radius in [1.0, 3.0, 10.0, 50.0] {
                let rep = hyperbolic_upper_bound(n, radius).unwrap();
                let nf = f64::from(n);
                assert!(rep.g_value > 0.0 && rep.g_value <= FRAC_PI_2);
                assert!(rep.f_value > 0.0);
                assert!(rep.f_value <= FRAC_PI_2 * (0.25 * nf * nf + PI * PI / (radius * radius)));
            }
        }
        assert!(hyperbolic_upper_bound(0, 10.0).is_err());
        assert!(hyperbolic_upper_bound(2, 0.5).is_err());
    }

    #[test]
    fn three_term_dominates_with_order_three_gap() {
        // The quotient sits below the three-term expression by a gap that
        // scales like R⁻³ (the F deficit), so the one-sided bound holds
        // with C = 0 and the scaled gap settles to a constant.
        for n in 1..=3 {
            let gaps: Vec<f64> = [25.0, 50.0, 100.0]
                .iter()
                .map(|&r| {
                    let rep = hyperbolic_upper_bound(n, r).unwrap();
                    assert!(rep.quotient_fg <= rep.three_term);
                    (rep.quotient_fg - rep.three_term) * r.powi(3)
                })
                .collect();
            assert!(gaps.iter().all(|g| g.abs() < 20.0), "n={n}: {gaps:?}");
            assert!((gaps[2] - gaps[1]).abs() < (gaps[1] - gaps[0]).abs() + 1e-9);
        }
        // n = 1: the limit is −(5/8)π²
        let rep = hyperbolic_upper_bound(1, 100.0).unwrap();
        let scaled = (rep.quotient_fg - rep.three_term) * 1e6;
        assert!((scaled + 5.0 / 8.0 * PI * PI).abs() < 0.05, "{scaled}");
    }

    #[test]
    fn g_expansion_residual_decays() {
        let r1 = g_expansion_check(1, 100.0).unwrap();
        assert!(r1.abs() < 0.5);
        for n in 1..=3 {
            let res: Vec<f64> = [50.0, 100.0, 200.0]
                .iter()
                .map(|&r| g_expansion_check(n, r).unwrap())
                .collect();
            assert!(res.iter().all(|v| v.is_finite()));
            assert!(res[0].signum() == res[1].signum() && res[1].signum() == res[2].signum());
            assert!(
                res[1].abs() < res[0].abs() && res[2].abs() < res[1].abs(),
                "{res:?}"
            );
        }
        assert!(g_expansion_check(1, 5.0).is_err());
    }
}
