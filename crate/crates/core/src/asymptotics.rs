//! Least-squares fits of `λ₁(R) ≈ c₀ + c₂R⁻² + c₃R⁻³` and checks of the
//! two-term law against solver output.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::models::{DomainKind, DomainSpec, ModelError, WarpedModel, Warping};
use crate::radial_solver::{first_eigenvalue, SolverError};

/// Condition estimates above this are reported through `warning`.
pub const CONDITION_WARNING: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("need at least {need} samples (got {got})")]
    TooFewSamples { got: usize, need: usize },
    #[error("powers must be a subset of {{0, 2, 3}} containing 0 and 2 (got {0:?})")]
    InvalidPowers(Vec<u32>),
    #[error("radius {0} appears more than once")]
    DuplicateRadius(f64),
    #[error("sample (R = {radius}, λ = {lambda}) is not finite and positive in R")]
    InvalidSample { radius: f64, lambda: f64 },
    #[error("design matrix is rank deficient (condition estimate {0:e})")]
    RankDeficient(f64),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticsError {
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("no two-term law is known for the {0} model")]
    NoTarget(String),
    #[error("need at least 5 radii (got {0})")]
    TooFewRadii(usize),
    #[error("radius range [{min}, {max}] must span at least a factor of 2")]
    RangeTooNarrow { min: f64, max: f64 },
    #[error("solver failed at R = {radius}: {source}")]
    Solver { radius: f64, source: SolverError },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionFit {
    pub c0: f64,
    pub c2: f64,
    /// Zero when `R⁻³` is not among the fitted powers.
    pub c3: f64,
    pub powers: Vec<u32>,
    /// Root-mean-square of the fit residuals.
    pub residual_norm: f64,
    /// Ratio of extreme singular values of the design matrix.
    pub condition_estimate: f64,
    pub sample_count: usize,
    pub warning: Option<String>,
}

impl ExpansionFit {
    pub fn predict(&self, radius: f64) -> f64 {
        self.c0 + self.c2 * radius.powi(-2) + self.c3 * radius.powi(-3)
    }
}

fn check_powers(powers: &[u32]) -> Result<Vec<u32>, FitError> {
    let mut p = powers.to_vec();
    p.sort_unstable();
    p.dedup();
    let ok = p.len() == powers.len()
        && p.iter().all(|x| matches!(x, 0 | 2 | 3))
        && p.contains(&0)
        && p.contains(&2);
    if ok {
        Ok(p)
    } else {
        Err(FitError::InvalidPowers(powers.to_vec()))
    }
}

/// Fits `λ(R) = Σ c_p R^{−p}` over `powers` by Householder QR on the
/// column-equilibrated design.
pub fn fit_expansion(samples: &[(f64, f64)], powers: &[u32]) -> Result<ExpansionFit, FitError> {
    let powers = check_powers(powers)?;
    let need = 4.max(powers.len() + 1);
    if samples.len() < need {
        return Err(FitError::TooFewSamples {
            got: samples.len(),
            need,
        });
    }
    for &(radius, lambda) in samples {
        if !(radius > 0.0 && radius.is_finite() && lambda.is_finite()) {
            return Err(FitError::InvalidSample { radius, lambda });
        }
    }
    let mut radii: Vec<f64> = samples.iter().map(|s| s.0).collect();
    radii.sort_by(f64::total_cmp);
    if let Some(w) = radii.windows(2).find(|w| w[0] == w[1]) {
        return Err(FitError::DuplicateRadius(w[0]));
    }

    let (m, k) = (samples.len(), powers.len());
    let design = DMatrix::from_fn(m, k, |i, j| samples[i].0.powi(-(powers[j] as i32)));
    let rhs = DVector::from_iterator(m, samples.iter().map(|s| s.1));

    let sv = design.singular_values();
    let (smax, smin) = (sv.max(), sv.min());
    let condition_estimate = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };

    // equilibrate columns; rank is judged on the scaled design so that
    // merely tiny monomials at large R are not mistaken for collinearity
    let scales: Vec<f64> = (0..k).map(|j| design.column(j).norm()).collect();
    let mut scaled = design.clone();
    for (j, s) in scales.iter().enumerate() {
        scaled.column_mut(j).scale_mut(1.0 / s);
    }
    let ssv = scaled.singular_values();
    if !(ssv.min() > 1e-13 * ssv.max()) {
        return Err(FitError::RankDeficient(condition_estimate));
    }
    let qr = scaled.qr();
    let qtb = qr.q().transpose() * &rhs;
    let y = qr
        .r()
        .solve_upper_triangular(&qtb)
        .ok_or(FitError::RankDeficient(condition_estimate))?;
    let coef: Vec<f64> = y.iter().zip(&scales).map(|(c, s)| c / s).collect();

    let fitted = &design * DVector::from_column_slice(&coef);
    let residual_norm = ((&rhs - fitted).norm_squared() / m as f64).sqrt();

    let get = |p: u32| powers.iter().position(|&q| q == p).map_or(0.0, |j| coef[j]);
    let warning = (condition_estimate > CONDITION_WARNING).then(|| {
        format!("design condition estimate {condition_estimate:e} exceeds {CONDITION_WARNING:e}")
    });
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    Ok(ExpansionFit {
        c0: get(0),
        c2: get(2),
        c3: get(3),
        powers,
        residual_norm,
        condition_estimate,
        sample_count: m,
        warning,
    })
}

/// Expected `(c₀, c₂)` of the two-term law for a model, if one is known.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoTermTargets {
    pub c0: f64,
    pub c2: f64,
}

pub fn two_term_targets(model: &WarpedModel) -> Option<TwoTermTargets> {
    let n = model.n();
    match (model.warping(), model.domain_kind()) {
        (Warping::Sinh, DomainKind::BallFromCenter) => Some(TwoTermTargets {
            c0: 0.25 * n * n,
            c2: PI * PI,
        }),
        (Warping::Exp, DomainKind::SymmetricBand) => Some(TwoTermTargets {
            c0: 0.25 * n * n,
            c2: 0.25 * PI * PI,
        }),
        (Warping::Cosh, DomainKind::SymmetricBand) => Some(TwoTermTargets {
            c0: 1.0,
            c2: 0.25 * PI * PI,
        }),
        _ => None,
    }
}

/// Acceptance thresholds for [`two_term_report`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoTermTolerances {
    pub c0_abs: f64,
    /// Relative to the target `c₂`.
    pub c2_rel: f64,
    /// Bound on `max |(λ₁ − c₀ − c₂/R²)·R³|`.
    pub max_scaled: f64,
}

impl Default for TwoTermTolerances {
    fn default() -> Self {
        Self {
            c0_abs: 1e-4,
            c2_rel: 0.05,
            max_scaled: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoTermReport {
    pub model: String,
    pub targets: TwoTermTargets,
    pub tolerances: TwoTermTolerances,
    /// `(R, λ₁)` in ascending `R`.
    pub samples: Vec<(f64, f64)>,
    pub fit: ExpansionFit,
    /// `(λ₁(R) − c₀ − c₂/R²)·R³` with the target coefficients.
    pub scaled_residuals: Vec<f64>,
    pub max_scaled_residual: f64,
    pub c0_ok: bool,
    pub c2_ok: bool,
    pub bounded_ok: bool,
    pub warnings: Vec<String>,
}

impl TwoTermReport {
    pub fn passed(&self) -> bool {
        self.c0_ok && self.c2_ok && self.bounded_ok
    }
}

pub fn scaled_residual(targets: TwoTermTargets, radius: f64, lambda: f64) -> f64 {
    (lambda - targets.c0 - targets.c2 / (radius * radius)) * radius.powi(3)
}

/// Solves at every radius (in parallel), fits `{1, R⁻², R⁻³}` and compares
/// against the model's two-term law. Radii may be given in any order.
pub fn two_term_report(
    model: &WarpedModel,
    radii: &[f64],
    solver_tol: f64,
    tolerances: TwoTermTolerances,
) -> Result<TwoTermReport, AsymptoticsError> {
    let targets =
        two_term_targets(model).ok_or_else(|| AsymptoticsError::NoTarget(model.selector()))?;
    if radii.len() < 5 {
        return Err(AsymptoticsError::TooFewRadii(radii.len()));
    }
    let mut sorted = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    for &r in &sorted {
        DomainSpec::new(r)?;
    }
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(FitError::DuplicateRadius(w[0]).into());
    }
    let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
    if max < 2.0 * min {
        return Err(AsymptoticsError::RangeTooNarrow { min, max });
    }

    let estimates = sorted
        .par_iter()
        .map(|&radius| {
            let spec = DomainSpec::new(radius)?;
            first_eigenvalue(model, spec, solver_tol)
                .map_err(|source| AsymptoticsError::Solver { radius, source })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut warnings: Vec<String> = estimates
        .iter()
        .zip(&sorted)
        .filter_map(|(e, r)| e.warning.as_ref().map(|w| format!("R = {r}: {w}")))
        .collect();
    let samples: Vec<(f64, f64)> = sorted
        .iter()
        .zip(&estimates)
        .map(|(&r, e)| (r, e.lambda))
        .collect();
    let fit = fit_expansion(&samples, &[0, 2, 3])?;
    if let Some(w) = &fit.warning {
        warnings.push(w.clone());
    }
    let scaled_residuals: Vec<f64> = samples
        .iter()
        .map(|&(r, l)| scaled_residual(targets, r, l))
        .collect();
    let max_scaled_residual = scaled_residuals.iter().fold(0.0f64, |m, s| m.max(s.abs()));

    Ok(TwoTermReport {
        model: model.selector(),
        targets,
        tolerances,
        c0_ok: (fit.c0 - targets.c0).abs() <= tolerances.c0_abs,
        c2_ok: (fit.c2 - targets.c2).abs() <= tolerances.c2_rel * targets.c2.abs(),
        bounded_ok: max_scaled_residual < tolerances.max_scaled,
        samples,
        fit,
        scaled_residuals,
        max_scaled_residual,
        warnings,
    })
}
