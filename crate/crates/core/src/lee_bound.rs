//! Lower bound for `λ₁` of hyperbolic balls from the positive supersolution
//! `ψ = u^{-n/2}·sin(a·ln(εu))`.
//!
//! On `H^{n+1}` the positive solution of `Δu = (n+1)u` is `u = cosh t`, and
//! the sublevel set `F_ε = {u < 1/ε}` is exactly the geodesic ball of radius
//! `arccosh(1/ε)`. With `Q = |du|²/u² = tanh²t`,
//!
//! ```text
//! −Δψ/ψ = n²/4 + a² + (1 − Q)·[n(n+2)/4 − (n+1)·a·cot(a·ln εu) − a²]
//! ```
//!
//! so wherever the bracket is nonnegative, Barta's inequality gives
//! `λ₁(F_ε) ≥ n²/4 + a²` with `a = π/ln ε + c_n/ln²ε`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LeeError {
    #[error("fiber dimension must be at least 1")]
    ZeroDimension,
    #[error("ε must lie in (0, 1) (got {0})")]
    InvalidEpsilon(f64),
    #[error("c_n = {c_n} is below the admissible minimum {min}")]
    ConstantTooSmall { c_n: f64, min: f64 },
    #[error("ε = {epsilon} is too large for c_n = {c_n}: need a < 0, i.e. ε < exp(−c_n/π)")]
    EpsilonTooLarge { epsilon: f64, c_n: f64 },
    #[error("t = {0} lies outside F_ε")]
    OutsideDomain(f64),
    #[error("cotangent argument {0} is not inside (0, π)")]
    CotangentSingular(f64),
    #[error("finite-difference step must lie in (1e-6, 1e-2) (got {0})")]
    InvalidStep(f64),
    #[error("radius must be positive and finite (got {0})")]
    InvalidRadius(f64),
    #[error("bound not certified at R = {radius}: pointwise margin {margin:e} is negative")]
    NotCertified { radius: f64, margin: f64 },
}

/// `ln cosh t`, stable for large `|t|`.
fn ln_cosh(t: f64) -> f64 {
    let a = t.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// Smallest admissible `c_n = 4π(n+1)/(n(n+2))`.
pub fn min_c_n(n: u32) -> f64 {
    let n = f64::from(n);
    4.0 * PI * (n + 1.0) / (n * (n + 2.0))
}

/// `u = cosh t` on `H^{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeeEigenfunction {
    pub n: u32,
}

impl LeeEigenfunction {
    pub fn eval(&self, t: f64) -> (f64, f64) {
        (t.cosh(), t.sinh())
    }

    pub fn second_derivative(&self, t: f64) -> f64 {
        t.cosh()
    }

    /// `(u'' + n·coth t·u' − (n+1)u)/u`, from the closed-form derivatives.
    pub fn relative_residual(&self, t: f64) -> f64 {
        let (u, du) = self.eval(t);
        let n = f64::from(self.n);
        (self.second_derivative(t) + n / t.tanh() * du - (n + 1.0) * u) / u
    }

    /// `1 − |du|²/u² = sech²t`.
    pub fn gradient_gap(&self, t: f64) -> f64 {
        let s = 1.0 / t.cosh();
        s * s
    }

    /// `u² − |du|²`, which is identically 1.
    pub fn lorentz_norm(&self, t: f64) -> f64 {
        let (u, du) = self.eval(t);
        (u - du) * (u + du)
    }
}

/// `−Δφ/φ` for `φ = u^{-n/2}`, assembled from closed-form derivatives of φ.
pub fn phi_ratio(n: u32, t: f64) -> f64 {
    let nf = f64::from(n);
    let th = t.tanh();
    let sech2 = 1.0 - th * th;
    // φ'/φ and φ''/φ
    let d1 = -0.5 * nf * th;
    let d2 = 0.25 * nf * nf * th * th - 0.5 * nf * sech2;
    -(d2 + nf / th * d1)
}

/// `n²/4 + (n(n+2)/4)·sech²t`.
pub fn phi_ratio_formula(n: u32, t: f64) -> f64 {
    let nf = f64::from(n);
    let s = 1.0 / t.cosh();
    0.25 * nf * nf + 0.25 * nf * (nf + 2.0) * s * s
}

/// The tuple `(ε, c_n, a)` for a fiber dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeeParameters {
    pub n: u32,
    pub epsilon: f64,
    pub c_n: f64,
    pub a: f64,
}

impl LeeParameters {
    /// Uses the smallest admissible `c_n`, which gives the largest `a²`.
    pub fn new(n: u32, epsilon: f64) -> Result<Self, LeeError> {
        if n == 0 {
            return Err(LeeError::ZeroDimension);
        }
        Self::with_c_n(n, epsilon, min_c_n(n))
    }

    pub fn with_c_n(n: u32, epsilon: f64, c_n: f64) -> Result<Self, LeeError> {
        if n == 0 {
            return Err(LeeError::ZeroDimension);
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(LeeError::InvalidEpsilon(epsilon));
        }
        let min = min_c_n(n);
        if !(c_n >= min) {
            return Err(LeeError::ConstantTooSmall { c_n, min });
        }
        let l = epsilon.ln();
        let a = PI / l + c_n / (l * l);
        // a·ln ε = π + c_n/ln ε must lie in (0, π)
        let start = a * l;
        if !(a < 0.0 && start > 0.0 && start < PI) {
            return Err(LeeError::EpsilonTooLarge { epsilon, c_n });
        }
        Ok(Self { n, epsilon, c_n, a })
    }

    /// Parameters whose `F_ε` is the ball of radius `R`, `ε = 1/cosh R`.
    pub fn for_ball(n: u32, radius: f64) -> Result<Self, LeeError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(LeeError::InvalidRadius(radius));
        }
        Self::new(n, (-ln_cosh(radius)).exp())
    }

    fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    /// `arccosh(1/ε)`: the geodesic radius of `F_ε`.
    pub fn domain_radius(&self) -> f64 {
        let inv = 1.0 / self.epsilon;
        (inv + (inv * inv - 1.0).sqrt()).ln()
    }

    pub fn contains(&self, t: f64) -> bool {
        t.is_finite() && ln_cosh(t) < -self.epsilon.ln()
    }

    /// `a·ln(ε·cosh t)`, in `(0, π)` on `F_ε`.
    pub fn angle(&self, t: f64) -> f64 {
        self.a * (self.epsilon.ln() + ln_cosh(t))
    }

    /// `a·ln(εu)` for a raw value of `u`.
    pub fn angle_at_u(&self, u: f64) -> f64 {
        self.a * (self.epsilon.ln() + u.ln())
    }

    pub fn psi(&self, t: f64) -> Result<f64, LeeError> {
        if t < 0.0 || !self.contains(t) {
            return Err(LeeError::OutsideDomain(t));
        }
        Ok((-0.5 * self.nf() * ln_cosh(t)).exp() * self.angle(t).sin())
    }

    fn cot(&self, t: f64) -> Result<f64, LeeError> {
        let x = self.angle(t);
        if !(x > 0.0 && x < PI) {
            return Err(LeeError::CotangentSingular(x));
        }
        Ok(1.0 / x.tan())
    }

    /// `n(n+2)/4 − (n+1)·a·cot(a·ln εu) − a²`.
    pub fn bracket(&self, t: f64) -> Result<f64, LeeError> {
        let n = self.nf();
        Ok(0.25 * n * (n + 2.0) - (n + 1.0) * self.a * self.cot(t)? - self.a * self.a)
    }

    /// `sech²t·bracket(t)`: how far `−Δψ/ψ` exceeds `n²/4 + a²` at `t`.
    pub fn margin(&self, t: f64) -> Result<f64, LeeError> {
        let s = 1.0 / t.cosh();
        Ok(s * s * self.bracket(t)?)
    }

    /// Closed-form `−Δψ/ψ`.
    pub fn psi_ratio(&self, t: f64) -> Result<f64, LeeError> {
        Ok(self.lower_bound() + self.margin(t)?)
    }

    /// `n²/4 + a²`.
    pub fn lower_bound(&self) -> f64 {
        0.25 * self.nf() * self.nf() + self.a * self.a
    }

    /// `ψ(t+s)/ψ(t) − 1`, formed from differences so that second differences
    /// of ψ keep their precision at small `s`.
    fn psi_step_ratio(&self, t: f64, s: f64) -> Result<f64, LeeError> {
        if !self.contains(t + s) || t + s < 0.0 {
            return Err(LeeError::OutsideDomain(t + s));
        }
        // ln cosh(t+s) − ln cosh t = ln(cosh s + tanh t·sinh s)
        let half = (0.5 * s).sinh();
        let dl = (2.0 * half * half + t.tanh() * s.sinh()).ln_1p();
        let e = (-0.5 * self.nf() * dl).exp_m1();
        // sin(A + x)/sin A − 1 = (cos x − 1) + cot A·sin x
        let x = self.a * dl;
        let hx = (0.5 * x).sin();
        let trig = -2.0 * hx * hx + self.cot(t)? * x.sin();
        Ok(e + trig + e * trig)
    }

    /// `−Δψ/ψ` by central differences with step `h`, minus the closed form.
    pub fn identity_residual(&self, t: f64, h: f64) -> Result<f64, LeeError> {
        if !(h > 1e-6 && h < 1e-2) {
            return Err(LeeError::InvalidStep(h));
        }
        if t < 2.0 * h || !self.contains(t + 2.0 * h) {
            return Err(LeeError::OutsideDomain(t));
        }
        let rp = self.psi_step_ratio(t, h)?;
        let rm = self.psi_step_ratio(t, -h)?;
        let d1 = (rp - rm) / (2.0 * h);
        let d2 = (rp + rm) / (h * h);
        let lhs = -(d2 + self.nf() / t.tanh() * d1);
        Ok(lhs - self.psi_ratio(t)?)
    }

    /// Residuals at `h` and `h/2` and the observed order `log₂` of their ratio.
    pub fn identity_convergence(&self, t: f64, h: f64) -> Result<IdentityConvergence, LeeError> {
        let coarse = self.identity_residual(t, h)?;
        let fine = self.identity_residual(t, 0.5 * h)?;
        Ok(IdentityConvergence {
            step: h,
            coarse,
            fine,
            order: (coarse.abs() / fine.abs()).log2(),
        })
    }

    /// Points `t_i = T·i/N`, `i < N`, covering `F_ε ∩ {t ≥ 0}` short of its
    /// boundary `T = arccosh(1/ε)`.
    pub fn grid(&self, grid_points: usize) -> Vec<f64> {
        let tmax = self.domain_radius();
        (0..grid_points)
            .map(|i| tmax * i as f64 / grid_points as f64)
            .collect()
    }

    /// Minimum of [`Self::margin`] over [`Self::grid`]. Nonnegative means
    /// `−Δψ/ψ ≥ n²/4 + a²` holds at every grid point.
    pub fn pointwise_lower_bound_check(&self, grid_points: usize) -> f64 {
        self.grid(grid_points)
            .par_iter()
            .map(|&t| self.margin(t).unwrap_or(f64::NEG_INFINITY))
            .reduce(|| f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityConvergence {
    pub step: f64,
    pub coarse: f64,
    pub fine: f64,
    pub order: f64,
}

/// Grid used when certifying a ball bound.
pub const CERTIFICATION_GRID: usize = 10_000;

/// `n²/4 + a²` at `ε = 1/cosh R`, returned only if the pointwise check
/// passes on the ball.
pub fn ball_lower_bound(n: u32, radius: f64) -> Result<f64, LeeError> {
    let params = LeeParameters::for_ball(n, radius)?;
    let margin = params.pointwise_lower_bound_check(CERTIFICATION_GRID);
    if margin < 0.0 {
        return Err(LeeError::NotCertified { radius, margin });
    }
    Ok(params.lower_bound())
}

/// Largest ε (to a relative precision of about 1e-6) for which the pointwise
/// check passes with the default `c_n`, searched below `ε_max = exp(−c_n/π)`.
/// Assumes the pass/fail boundary is a single threshold in ε.
pub fn empirical_epsilon_threshold(n: u32, grid_points: usize) -> Result<f64, LeeError> {
    if n == 0 {
        return Err(LeeError::ZeroDimension);
    }
    let passes = |log_eps: f64| {
        LeeParameters::new(n, log_eps.exp())
            .map(|p| p.pointwise_lower_bound_check(grid_points) >= 0.0)
            .unwrap_or(false)
    };
    // fails just below exp(−c_n/π), passes for tiny ε
    let mut hi = -min_c_n(n) / PI - 1e-9;
    let mut lo = -60.0;
    if passes(hi) {
        return Ok(hi.exp());
    }
    if !passes(lo) {
        return Err(LeeError::NotCertified {
            radius: f64::NAN,
            margin: f64::NAN,
        });
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if passes(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo.exp())
}
