//! First Dirichlet eigenvalue of a ball or band via the radial ODE
//! `f'' + drift·f' + λf = 0`.
//!
//! The primary route shoots in Prüfer form: with `f = r·sin θ`,
//! `f' = r·cos θ` the angle obeys
//!
//! ```text
//! θ' = cos²θ + drift(t)·sinθ·cosθ + λ·sin²θ
//! ```
//!
//! which is free of the amplitude (so nothing under- or overflows on large
//! domains) and is nondecreasing in `λ`. Interior zeros of `f` are the
//! crossings of `θ` through multiples of `π`, and `λ₁` is the unique `λ` with
//! `θ(end) = π`.
//!
//! [`fd_oracle`] is an independent second route: a finite-volume
//! discretization of `−(w^n f')'/w^n` whose smallest eigenvalue is found by
//! Sturm-sequence bisection.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{DomainSpec, ModelError, WarpedModel};
use crate::ode::{self, OdeError, StepControl};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("radial integration failed: {0}")]
    Integration(#[from] OdeError),
    #[error("tolerance must be positive (got {0})")]
    InvalidTolerance(f64),
    #[error("no eigenvalue bracket found below the search ceiling λ = {ceiling}")]
    BracketNotFound { ceiling: f64 },
    #[error("λ = {lambda} is not an eigenvalue: endpoint angle misses π by {residual:e}")]
    NotAnEigenvalue { lambda: f64, residual: f64 },
    #[error("mesh needs at least {min} points (got {got})")]
    MeshTooSmall { min: usize, got: usize },
    #[error("discretization is unresolved: {0}")]
    Unresolved(String),
}

/// Knobs shared by the shooting routines.
#[derive(Debug, Clone, Copy, Default)]
pub struct SolverConfig {
    pub step: StepControl,
    /// Upper end of the eigenvalue search; `None` uses [`default_ceiling`].
    pub lambda_ceiling: Option<f64>,
}

/// `n²/4 + π² + 10`, widened by `2(n+3)²/R²` so small domains still bracket.
pub fn default_ceiling(model: &WarpedModel, spec: DomainSpec) -> f64 {
    let n = model.n();
    let r = spec.radius();
    0.25 * n * n + PI * PI + 10.0 + 2.0 * (n + 3.0).powi(2) / (r * r)
}

/// Outcome of one shooting pass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootResult {
    /// `f/|(f, f')|` at the far endpoint.
    pub endpoint_value: f64,
    /// Sign changes of `f` strictly inside the domain.
    pub zero_count: u32,
    /// Prüfer angle at the far endpoint.
    pub end_angle: f64,
}

/// Bracket on `λ₁` certified by the zero counts at both ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenEstimate {
    pub lambda_low: f64,
    pub lambda_high: f64,
    pub lambda: f64,
    pub endpoint_residual: f64,
    pub zero_count_low: u32,
    pub zero_count_high: u32,
    pub warning: Option<String>,
}

/// Where integration starts for ball domains.
pub(crate) fn ball_start(radius: f64) -> f64 {
    (1e-6f64).max(1e-8 * radius).min(1e-2 * radius)
}

/// Regular solution `f ≈ 1 − λt²/(2(n+1))` near the pole.
fn pole_series(n: f64, lambda: f64, t: f64) -> (f64, f64) {
    (
        1.0 - lambda * t * t / (2.0 * (n + 1.0)),
        -lambda * t / (n + 1.0),
    )
}

struct Start {
    t: f64,
    angle: f64,
    log_amp: f64,
}

fn start(model: &WarpedModel, spec: DomainSpec, lambda: f64) -> Start {
    if model.is_ball() {
        let t = ball_start(spec.radius());
        let (f, df) = pole_series(model.n(), lambda, t);
        Start {
            t,
            angle: f.atan2(df),
            log_amp: f.hypot(df).ln(),
        }
    } else {
        Start {
            t: -spec.radius(),
            angle: 0.0,
            log_amp: 0.0,
        }
    }
}

fn drift(model: &WarpedModel, t: f64) -> f64 {
    model.n() * model.warping().log_derivative(t)
}

fn angle_rhs(model: &WarpedModel, lambda: f64, t: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    c * c + drift(model, t) * s * c + lambda * s * s
}

fn zero_count(end_angle: f64) -> u32 {
    ((end_angle / PI).ceil() - 1.0).max(0.0) as u32
}

pub fn shoot_with(
    model: &WarpedModel,
    spec: DomainSpec,
    lambda: f64,
    config: &SolverConfig,
) -> Result<ShootResult, SolverError> {
    if !lambda.is_finite() {
        return Err(SolverError::Unresolved(format!("λ = {lambda}")));
    }
    let s = start(model, spec, lambda);
    let (y, _) = ode::integrate(
        |t, y: &[f64; 1]| [angle_rhs(model, lambda, t, y[0])],
        s.t,
        [s.angle],
        spec.radius(),
        0.0,
        &config.step,
    )?;
    let end_angle = y[0];
    Ok(ShootResult {
        endpoint_value: end_angle.sin(),
        zero_count: zero_count(end_angle),
        end_angle,
    })
}

/// Integrates from the regular end (pole series for balls, `f = 0, f' = 1` at
/// `−R` for bands) to `R` and reports the normalized endpoint value.
pub fn shoot(
    model: &WarpedModel,
    spec: DomainSpec,
    lambda: f64,
) -> Result<ShootResult, SolverError> {
    shoot_with(model, spec, lambda, &SolverConfig::default())
}

pub fn first_eigenvalue(
    model: &WarpedModel,
    spec: DomainSpec,
    tol: f64,
) -> Result<EigenEstimate, SolverError> {
    first_eigenvalue_with(model, spec, tol, &SolverConfig::default())
}

/// Brackets `λ₁` by the 0→1 transition of the interior zero count, then
/// bisects on the endpoint angle until the bracket is at most `tol` wide.
pub fn first_eigenvalue_with(
    model: &WarpedModel,
    spec: DomainSpec,
    tol: f64,
    config: &SolverConfig,
) -> Result<EigenEstimate, SolverError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SolverError::InvalidTolerance(tol));
    }
    let ceiling = config
        .lambda_ceiling
        .unwrap_or_else(|| default_ceiling(model, spec));
    let above = |lambda: f64| -> Result<(bool, ShootResult), SolverError> {
        let s = shoot_with(model, spec, lambda, config)?;
        Ok((s.end_angle > PI, s))
    };

    let mut low = 0.0;
    let (past, mut low_shot) = above(low)?;
    if past {
        return Err(SolverError::Unresolved(
            "solution already has an interior zero at λ = 0".into(),
        ));
    }
    let n = model.n();
    let r = spec.radius();
    let mut high = (0.25 * n * n + 4.0 * PI * PI / (r * r) + 1.0).min(ceiling);
    let mut high_shot;
    loop {
        let (past, s) = above(high)?;
        if past {
            high_shot = s;
            break;
        }
        low = high;
        low_shot = s;
        if high >= ceiling {
            return Err(SolverError::BracketNotFound { ceiling });
        }
        high = (2.0 * high).min(ceiling);
    }

    let mut warning = None;
    if tol < 1e-13 * high.max(1.0) {
        warning = Some(format!(
            "tolerance {tol:e} is below the integration accuracy; bracket is best effort"
        ));
    }
    for _ in 0..400 {
        if high - low <= tol {
            break;
        }
        let mid = 0.5 * (low + high);
        if mid <= low || mid >= high {
            warning.get_or_insert_with(|| {
                format!(
                    "bracket stalled at width {:e} above tolerance {tol:e}",
                    high - low
                )
            });
            break;
        }
        let (past, s) = above(mid)?;
        if past {
            high = mid;
            high_shot = s;
        } else {
            low = mid;
            low_shot = s;
        }
    }
    if let Some(w) = &warning {
        log::warn!("{model}, R = {r}: {w}");
    }

    let lambda = 0.5 * (low + high);
    let mid_shot = shoot_with(model, spec, lambda, config)?;
    Ok(EigenEstimate {
        lambda_low: low,
        lambda_high: high,
        lambda,
        endpoint_residual: mid_shot.endpoint_value,
        zero_count_low: low_shot.zero_count,
        zero_count_high: high_shot.zero_count,
        warning,
    })
}

/// Evaluates `first_eigenvalue` at each radius in parallel; results keep the
/// input order.
pub fn sweep(
    model: &WarpedModel,
    radii: &[f64],
    tol: f64,
) -> Vec<Result<EigenEstimate, SolverError>> {
    radii
        .par_iter()
        .map(|&r| first_eigenvalue(model, DomainSpec::new(r)?, tol))
        .collect()
}

/// Largest allowed `|θ(end) − π|` when sampling an eigenfunction.
pub const EIGENFUNCTION_ANGLE_TOL: f64 = 1e-6;

/// Sample points on the open domain: the pole and `R·i/N` for balls,
/// `N` equispaced interior points for bands.
pub fn sample_grid(model: &WarpedModel, spec: DomainSpec, grid_points: usize) -> Vec<f64> {
    let r = spec.radius();
    if model.is_ball() {
        (0..grid_points)
            .map(|i| r * i as f64 / grid_points as f64)
            .collect()
    } else {
        (0..grid_points)
            .map(|i| -r + 2.0 * r * (i + 1) as f64 / (grid_points + 1) as f64)
            .collect()
    }
}

/// First eigenfunction at `lambda`, sampled on [`sample_grid`] and scaled so
/// its largest sample is 1.
pub fn eigenfunction_samples(
    model: &WarpedModel,
    spec: DomainSpec,
    lambda: f64,
    grid_points: usize,
) -> Result<Vec<(f64, f64)>, SolverError> {
    let config = SolverConfig::default();
    let shot = shoot_with(model, spec, lambda, &config)?;
    let residual = shot.end_angle - PI;
    if residual.abs() > EIGENFUNCTION_ANGLE_TOL {
        return Err(SolverError::NotAnEigenvalue { lambda, residual });
    }

    let n = model.n();
    let s = start(model, spec, lambda);
    let rhs = |t: f64, y: &[f64; 2]| {
        let (sn, cs) = y[0].sin_cos();
        let d = drift(model, t);
        [
            cs * cs + d * sn * cs + lambda * sn * sn,
            (1.0 - lambda) * sn * cs - d * cs * cs,
        ]
    };

    let grid = sample_grid(model, spec, grid_points);
    // (t, log amplitude, angle) per sample
    let mut raw = Vec::with_capacity(grid.len());
    let mut t = s.t;
    let mut y = [s.angle, s.log_amp];
    let mut h = 0.0;
    for &tg in &grid {
        if tg <= s.t {
            // inside the series region of a ball
            let (f, df) = pole_series(n, lambda, tg);
            raw.push((tg, f.hypot(df).ln(), f.atan2(df)));
            continue;
        }
        let (yn, hn) = ode::integrate(rhs, t, y, tg, h, &config.step)?;
        t = tg;
        y = yn;
        h = hn;
        raw.push((tg, y[1], y[0]));
    }
    let log_max = raw
        .iter()
        .map(|&(_, la, _)| la)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut values: Vec<(f64, f64)> = raw
        .iter()
        .map(|&(t, la, th)| (t, (la - log_max).exp() * th.sin()))
        .collect();
    let peak = values
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(peak > 0.0) {
        return Err(SolverError::Unresolved(
            "eigenfunction has no positive sample".into(),
        ));
    }
    for v in &mut values {
        v.1 /= peak;
    }
    Ok(values)
}

/// Number of eigenvalues of the symmetric tridiagonal matrix `(diag, off)`
/// strictly below `x` (negative pivots of the LDLᵀ factorization of `T − x`).
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 {
            0.0
        } else {
            off[i - 1] * off[i - 1] / q
        };
        q = diag[i] - x - coupling;
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Symmetric tridiagonal finite-volume matrix for `−(p f')'/p` with
/// `p = w^n`, Dirichlet at the outer end(s), natural at a ball's pole.
fn fd_matrix(
    model: &WarpedModel,
    spec: DomainSpec,
    mesh_points: usize,
) -> Result<(Vec<f64>, Vec<f64>), SolverError> {
    let r = spec.radius();
    let (a, b) = model.interval(spec);
    let h = (b - a) / mesh_points as f64;
    let node = |i: usize| a + h * i as f64;
    let lp = |t: f64| model.log_volume_density(t.max(a));

    // unknown node indices
    let first = if model.is_ball() { 0 } else { 1 };
    let idx: Vec<usize> = (first..mesh_points).collect();

    // log of the cell mass ∫ p over the dual cell, by Simpson's rule
    let mut log_mass = Vec::with_capacity(idx.len());
    for &i in &idx {
        let t = node(i);
        let (lo, hi) = if i == 0 {
            (t, t + 0.5 * h)
        } else {
            (t - 0.5 * h, t + 0.5 * h)
        };
        let mid = 0.5 * (lo + hi);
        let reference = lp(hi)?.max(lp(mid)?);
        let simpson = (hi - lo) / 6.0
            * ((lp(lo)? - reference).exp()
                + 4.0 * (lp(mid)? - reference).exp()
                + (lp(hi)? - reference).exp());
        log_mass.push(reference + simpson.ln());
    }

    let mut diag = Vec::with_capacity(idx.len());
    let mut off = Vec::with_capacity(idx.len().saturating_sub(1));
    for (k, &i) in idx.iter().enumerate() {
        let t = node(i);
        let right = lp(t + 0.5 * h)?;
        let mut d = (right - log_mass[k]).exp();
        if i > 0 {
            d += (lp(t - 0.5 * h)? - log_mass[k]).exp();
        }
        diag.push(d / h);
        if k + 1 < idx.len() {
            off.push(-(right - 0.5 * (log_mass[k] + log_mass[k + 1])).exp() / h);
        }
    }
    if diag.iter().chain(off.iter()).any(|v| !v.is_finite()) {
        return Err(SolverError::Unresolved(format!(
            "non-finite matrix entries for {model} at R = {r}"
        )));
    }
    Ok((diag, off))
}

/// Smallest eigenvalue of the finite-volume discretization on `mesh_points`
/// uniform cells. Converges to `λ₁` at second order in the cell width.
pub fn fd_oracle(
    model: &WarpedModel,
    spec: DomainSpec,
    mesh_points: usize,
) -> Result<f64, SolverError> {
    const MIN_MESH: usize = 100;
    if mesh_points < MIN_MESH {
        return Err(SolverError::MeshTooSmall {
            min: MIN_MESH,
            got: mesh_points,
        });
    }
    let (diag, off) = fd_matrix(model, spec, mesh_points)?;
    if sturm_count(&diag, &off, 0.0) > 0 {
        return Err(SolverError::Unresolved(
            "negative pivots at zero shift: operator is not positive".into(),
        ));
    }
    // Any diagonal entry bounds λ_min from above (Rayleigh quotient of e_i).
    let mut lo = 0.0;
    let mut hi = diag.iter().copied().fold(f64::INFINITY, f64::min);
    if sturm_count(&diag, &off, hi) == 0 {
        hi *= 1.0 + 1e-12;
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 4.0 * f64::EPSILON * hi || mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(&diag, &off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(SolverError::Unresolved(format!(
            "smallest eigenvalue {lambda}"
        )));
    }
    Ok(lambda)
}
