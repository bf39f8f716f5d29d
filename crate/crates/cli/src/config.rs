//! Command-line grammar and the validated, serializable run configuration.

use std::path::PathBuf;

use ahe_eigen::models::{DomainSpec, ModelSelector, WarpedModel};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::verify::CheckName;

/// Where output files go when `--out` is not given.
pub const OUT_DIR_ENV: &str = "AHE_EIGEN_OUT_DIR";

/// Raised for anything the user can fix by changing the command line.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Debug, Parser)]
#[command(
    name = "ahe-eigen",
    version,
    about = "First Dirichlet eigenvalues of balls and bands in warped-product models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Sub,

    /// Output format (default: csv for eigen/sweep, json for verify/fit)
    #[arg(long, value_enum, global = true)]
    pub format: Option<OutputFormat>,

    /// Write output here instead of stdout (or $AHE_EIGEN_OUT_DIR/<command>.<ext>)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Worker threads for parallel radii
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Write run metadata (version, time, config) as JSON to this path
    #[arg(long, global = true)]
    pub metadata: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// sinh-ball, linear-ball, exp-band or cosh-band
    #[arg(long)]
    pub model: ModelSelector,

    /// Fiber dimension n (the manifold has dimension n + 1)
    #[arg(long)]
    pub n: u32,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// First eigenvalue at one radius
    Eigen {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Also compute the finite-volume eigenvalue
        #[arg(long)]
        oracle: bool,
        /// Cells in the finite-volume discretization
        #[arg(long, default_value_t = 40_000)]
        mesh: usize,
    },
    /// Eigenvalues and bounds over a list of radii
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated radii
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Run the numerical self-checks
    Verify {
        /// Run only these checks (repeatable)
        #[arg(long, value_enum)]
        only: Vec<CheckName>,
        /// ε for the ψ checks (default: 1e-3 and 1e-4)
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// Fit λ₁(R) ≈ c₀ + c₂/R² + c₃/R³ and compare with the two-term law
    Fit {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma-separated radii (at least 5, spanning a factor of 2)
        #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
        radii: Vec<f64>,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            Self::Csv => "csv",
            Self::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum Command {
    Eigen {
        model: ModelSelector,
        n: u32,
        radius: f64,
        tol: f64,
        oracle: bool,
        mesh: usize,
    },
    Sweep {
        model: ModelSelector,
        n: u32,
        radii: Vec<f64>,
        tol: f64,
    },
    Verify {
        only: Vec<CheckName>,
        epsilon: Option<f64>,
        tol: f64,
    },
    Fit {
        model: ModelSelector,
        n: u32,
        radii: Vec<f64>,
        tol: f64,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Eigen { .. } => "eigen",
            Self::Sweep { .. } => "sweep",
            Self::Verify { .. } => "verify",
            Self::Fit { .. } => "fit",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub metadata: Option<PathBuf>,
}

fn check_model(model: &ModelArgs) -> Result<WarpedModel, UsageError> {
    model
        .model
        .build(model.n)
        .map_err(|e| UsageError(e.to_string()))
}

fn check_tol(tol: f64) -> Result<(), UsageError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(UsageError(format!(
            "--tol must be positive and finite (got {tol})"
        )))
    }
}

fn check_radii(radii: &[f64], min_len: usize) -> Result<(), UsageError> {
    if radii.len() < min_len {
        return Err(UsageError(format!(
            "--radii needs at least {min_len} values (got {})",
            radii.len()
        )));
    }
    for &r in radii {
        DomainSpec::new(r).map_err(|e| UsageError(e.to_string()))?;
    }
    Ok(())
}

impl RunConfig {
    /// Validates the parsed command line: model/domain pairings, radii and
    /// tolerances are rejected here rather than midway through a run.
    pub fn from_cli(cli: Cli) -> Result<Self, UsageError> {
        let (command, default_format) = match cli.command {
            Sub::Eigen {
                model,
                radius,
                tol,
                oracle,
                mesh,
            } => {
                check_model(&model)?;
                check_tol(tol)?;
                DomainSpec::new(radius).map_err(|e| UsageError(e.to_string()))?;
                let cmd = Command::Eigen {
                    model: model.model,
                    n: model.n,
                    radius,
                    tol,
                    oracle,
                    mesh,
                };
                (cmd, OutputFormat::Csv)
            }
            Sub::Sweep { model, radii, tol } => {
                check_model(&model)?;
                check_tol(tol)?;
                check_radii(&radii, 2)?;
                (
                    Command::Sweep {
                        model: model.model,
                        n: model.n,
                        radii,
                        tol,
                    },
                    OutputFormat::Csv,
                )
            }
            Sub::Verify { only, epsilon, tol } => {
                check_tol(tol)?;
                if let Some(e) = epsilon {
                    if !(e > 0.0 && e < 1.0) {
                        return Err(UsageError(format!(
                            "--epsilon must lie in (0, 1) (got {e})"
                        )));
                    }
                }
                (Command::Verify { only, epsilon, tol }, OutputFormat::Json)
            }
            Sub::Fit { model, radii, tol } => {
                check_model(&model)?;
                check_tol(tol)?;
                check_radii(&radii, 1)?;
                (
                    Command::Fit {
                        model: model.model,
                        n: model.n,
                        radii,
                        tol,
                    },
                    OutputFormat::Json,
                )
            }
        };
        if cli.jobs == Some(0) {
            return Err(UsageError("--jobs must be at least 1".into()));
        }
        Ok(Self {
            command,
            format: cli.format.unwrap_or(default_format),
            out: cli.out,
            jobs: cli.jobs,
            metadata: cli.metadata,
        })
    }

    /// `--out`, else `$AHE_EIGEN_OUT_DIR/<command>.<ext>`, else stdout.
    pub fn output_path(&self) -> Option<PathBuf> {
        self.out.clone().or_else(|| {
            std::env::var_os(OUT_DIR_ENV).map(|dir| {
                PathBuf::from(dir).join(format!(
                    "{}.{}",
                    self.command.name(),
                    self.format.extension()
                ))
            })
        })
    }
}
