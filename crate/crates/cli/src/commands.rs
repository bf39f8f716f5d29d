//! The four subcommands. Each returns rendered output and whether every
//! verdict passed.

use ahe_eigen::asymptotics::{
    scaled_residual, two_term_report, two_term_targets, AsymptoticsError, TwoTermTolerances,
};
use ahe_eigen::lee_bound::ball_lower_bound;
use ahe_eigen::models::{DomainSpec, ModelSelector, WarpedModel, Warping};
use ahe_eigen::radial_solver::{fd_oracle, first_eigenvalue};
use ahe_eigen::rayleigh::hyperbolic_upper_bound;
use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Command, OutputFormat, UsageError};
use crate::output::render;
use crate::verify;

pub struct Outcome {
    pub bytes: Vec<u8>,
    pub passed: bool,
    /// Failing entries, reported on stderr.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenRecord {
    pub model: String,
    pub n: u32,
    #[serde(rename = "R")]
    pub radius: f64,
    pub lambda: f64,
    pub lambda_low: f64,
    pub lambda_high: f64,
    pub oracle_lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub model: String,
    pub n: u32,
    #[serde(rename = "R")]
    pub radius: f64,
    pub lambda: Option<f64>,
    pub lambda_low: Option<f64>,
    pub lambda_high: Option<f64>,
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub scaled_residual: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub model: String,
    pub n: u32,
    pub radii: String,
    pub c0: f64,
    pub c2: f64,
    pub c3: f64,
    pub target_c0: f64,
    pub target_c2: f64,
    pub residual_norm: f64,
    pub condition_estimate: f64,
    pub sample_count: usize,
    pub max_scaled_residual: f64,
    pub c0_ok: bool,
    pub c2_ok: bool,
    pub bounded_ok: bool,
    pub passed: bool,
    pub warning: Option<String>,
}

fn build(model: ModelSelector, n: u32) -> Result<WarpedModel> {
    model.build(n).map_err(|e| UsageError(e.to_string()).into())
}

pub fn run(command: &Command, format: OutputFormat) -> Result<Outcome> {
    match command {
        Command::Eigen {
            model,
            n,
            radius,
            tol,
            oracle,
            mesh,
        } => {
            let m = build(*model, *n)?;
            let spec = DomainSpec::new(*radius)?;
            let est =
                first_eigenvalue(&m, spec, *tol).with_context(|| format!("{m} at R = {radius}"))?;
            let oracle_lambda = if *oracle {
                Some(
                    fd_oracle(&m, spec, *mesh)
                        .with_context(|| format!("finite-volume oracle, {mesh} cells"))?,
                )
            } else {
                None
            };
            let rec = EigenRecord {
                model: model.to_string(),
                n: *n,
                radius: *radius,
                lambda: est.lambda,
                lambda_low: est.lambda_low,
                lambda_high: est.lambda_high,
                oracle_lambda,
            };
            Ok(Outcome {
                bytes: render(&[rec], format, true)?,
                passed: true,
                failures: vec![],
            })
        }
        Command::Sweep {
            model,
            n,
            radii,
            tol,
        } => {
            let m = build(*model, *n)?;
            let mut sorted = radii.clone();
            sorted.sort_by(f64::total_cmp);
            let rows: Vec<SweepRow> = sorted
                .par_iter()
                .map(|&r| sweep_row(&m, *model, r, *tol))
                .collect();
            let failures: Vec<String> = rows
                .iter()
                .filter(|r| r.status != "ok")
                .map(|r| format!("R = {}: {}", r.radius, r.status))
                .collect();
            Ok(Outcome {
                bytes: render(&rows, format, false)?,
                passed: failures.is_empty(),
                failures,
            })
        }
        Command::Verify { only, epsilon, tol } => {
            let report = verify::run(only, *epsilon, *tol);
            let failures = report
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| {
                    format!(
                        "{}: measured {:?} vs threshold {} ({})",
                        c.check, c.measured, c.threshold, c.detail
                    )
                })
                .collect();
            let bytes = match format {
                OutputFormat::Json => render(&[&report], format, true)?,
                OutputFormat::Csv => render(&report.checks, format, false)?,
            };
            Ok(Outcome {
                bytes,
                passed: report.passed,
                failures,
            })
        }
        Command::Fit {
            model,
            n,
            radii,
            tol,
        } => {
            let m = build(*model, *n)?;
            let rep = match two_term_report(&m, radii, *tol, TwoTermTolerances::default()) {
                Ok(rep) => rep,
                Err(
                    e @ (AsymptoticsError::NoTarget(_)
                    | AsymptoticsError::TooFewRadii(_)
                    | AsymptoticsError::RangeTooNarrow { .. }
                    | AsymptoticsError::Fit(_)
                    | AsymptoticsError::Model(_)),
                ) => return Err(UsageError(e.to_string()).into()),
                Err(e) => return Err(e.into()),
            };
            let radii: Vec<String> = rep.samples.iter().map(|s| format!("{:?}", s.0)).collect();
            let mut warnings = rep.warnings.clone();
            if let Some(w) = &rep.fit.warning {
                if !warnings.contains(w) {
                    warnings.push(w.clone());
                }
            }
            let rec = FitRecord {
                model: model.to_string(),
                n: *n,
                radii: radii.join(";"),
                c0: rep.fit.c0,
                c2: rep.fit.c2,
                c3: rep.fit.c3,
                target_c0: rep.targets.c0,
                target_c2: rep.targets.c2,
                residual_norm: rep.fit.residual_norm,
                condition_estimate: rep.fit.condition_estimate,
                sample_count: rep.fit.sample_count,
                max_scaled_residual: rep.max_scaled_residual,
                c0_ok: rep.c0_ok,
                c2_ok: rep.c2_ok,
                bounded_ok: rep.bounded_ok,
                passed: rep.passed(),
                warning: (!warnings.is_empty()).then(|| warnings.join("; ")),
            };
            let mut failures = Vec::new();
            for (ok, what) in [
                (rec.c0_ok, "c0"),
                (rec.c2_ok, "c2"),
                (rec.bounded_ok, "scaled residual bound"),
            ] {
                if !ok {
                    failures.push(format!("{what} verdict failed"));
                }
            }
            Ok(Outcome {
                bytes: render(&[rec], format, true)?,
                passed: failures.is_empty(),
                failures,
            })
        }
    }
}

fn sweep_row(model: &WarpedModel, selector: ModelSelector, r: f64, tol: f64) -> SweepRow {
    let mut row = SweepRow {
        model: selector.to_string(),
        n: model.fiber_dim(),
        radius: r,
        lambda: None,
        lambda_low: None,
        lambda_high: None,
        lower_bound: None,
        upper_bound: None,
        scaled_residual: None,
        status: "ok".into(),
    };
    let est = match DomainSpec::new(r)
        .map_err(anyhow::Error::from)
        .and_then(|s| Ok(first_eigenvalue(model, s, tol)?))
    {
        Ok(e) => e,
        Err(e) => {
            row.status = format!("error: {e}");
            return row;
        }
    };
    row.lambda = Some(est.lambda);
    row.lambda_low = Some(est.lambda_low);
    row.lambda_high = Some(est.lambda_high);
    row.scaled_residual = two_term_targets(model).map(|t| scaled_residual(t, r, est.lambda));
    if model.warping() == Warping::Sinh && model.is_ball() {
        // the lower bound is only reported when its pointwise check certifies it
        row.lower_bound = ball_lower_bound(model.fiber_dim(), r).ok();
        row.upper_bound = hyperbolic_upper_bound(model.fiber_dim(), r)
            .ok()
            .map(|u| u.quotient_fg);
    }
    row
}
