//! Explicit warped-product model manifolds `dt² + w(t)²·g_fiber`.
//!
//! For a radial function `f(t)` the Laplace–Beltrami operator reduces to
//! `Δf = f'' + n·(w'/w)·f'`, and the radial measure is `w(t)^n dt` once the
//! fiber volume is dropped. Every quotient downstream is invariant under that
//! constant, so it is never carried.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{warping} warping pairs only with the {expected} domain, not {requested}")]
    IncompatibleDomain {
        warping: Warping,
        expected: DomainKind,
        requested: DomainKind,
    },
    #[error("cosh warping is only defined here for fiber dimension 2 (got {0})")]
    CoshFiberDim(u32),
    #[error("ball domains need fiber dimension at least 1 (got {0})")]
    DegenerateBall(u32),
    #[error("radius must be positive and finite (got {0})")]
    InvalidRadius(f64),
    #[error("t = {t} lies outside the domain of the {model} model")]
    OutsideDomain { t: f64, model: String },
    #[error("unknown model `{0}` (expected one of sinh-ball, linear-ball, exp-band, cosh-band)")]
    UnknownModel(String),
}

/// Warping function of the model metric. Closed set: each variant carries
/// exact expressions for `w`, `w'` and `w''`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Warping {
    /// `w = sinh t`: hyperbolic space in geodesic polar coordinates.
    Sinh,
    /// `w = t`: Euclidean space.
    Linear,
    /// `w = e^t`: the exponential warped product over a compact fiber.
    Exp,
    /// `w = cosh t`: the cosh warped product over a compact surface.
    Cosh,
}

impl Warping {
    pub const ALL: [Warping; 4] = [Warping::Sinh, Warping::Linear, Warping::Exp, Warping::Cosh];

    pub fn value(self, t: f64) -> f64 {
        match self {
            Warping::Sinh => t.sinh(),
            Warping::Linear => t,
            Warping::Exp => t.exp(),
            Warping::Cosh => t.cosh(),
        }
    }

    pub fn derivative(self, t: f64) -> f64 {
        match self {
            Warping::Sinh => t.cosh(),
            Warping::Linear => 1.0,
            Warping::Exp => t.exp(),
            Warping::Cosh => t.sinh(),
        }
    }

    pub fn second_derivative(self, t: f64) -> f64 {
        match self {
            Warping::Sinh => t.sinh(),
            Warping::Linear => 0.0,
            Warping::Exp => t.exp(),
            Warping::Cosh => t.cosh(),
        }
    }

    /// `w'/w`, evaluated without forming the ratio of two large numbers.
    pub fn log_derivative(self, t: f64) -> f64 {
        match self {
            Warping::Sinh => 1.0 / t.tanh(),
            Warping::Linear => 1.0 / t,
            Warping::Exp => 1.0,
            Warping::Cosh => t.tanh(),
        }
    }

    /// `ln w(t)`; stable for large `|t|`. Returns `-inf` where `w` vanishes.
    pub fn log_value(self, t: f64) -> f64 {
        match self {
            Warping::Sinh => {
                if t <= 0.0 {
                    f64::NEG_INFINITY
                } else if t < 1.0 {
                    t.sinh().ln()
                } else {
                    // sinh t = e^t (1 - e^{-2t}) / 2
                    t + (-(-2.0 * t).exp()).ln_1p() - std::f64::consts::LN_2
                }
            }
            Warping::Linear => t.ln(),
            Warping::Exp => t,
            Warping::Cosh => {
                let a = t.abs();
                a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
            }
        }
    }

    pub fn natural_domain(self) -> DomainKind {
        match self {
            Warping::Sinh | Warping::Linear => DomainKind::BallFromCenter,
            Warping::Exp | Warping::Cosh => DomainKind::SymmetricBand,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Warping::Sinh => "sinh",
            Warping::Linear => "linear",
            Warping::Exp => "exp",
            Warping::Cosh => "cosh",
        }
    }
}

impl fmt::Display for Warping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    /// Geodesic ball around the pole, `t ∈ (0, R)`.
    BallFromCenter,
    /// Product band `(-R, R) × N`.
    SymmetricBand,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::BallFromCenter => "ball",
            DomainKind::SymmetricBand => "band",
        })
    }
}

/// A model manifold of dimension `fiber_dim + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WarpedModel {
    fiber_dim: u32,
    warping: Warping,
    domain_kind: DomainKind,
}

impl WarpedModel {
    /// Builds a model on the domain kind its warping pairs with.
    pub fn new(fiber_dim: u32, warping: Warping) -> Result<Self, ModelError> {
        Self::with_domain(fiber_dim, warping, warping.natural_domain())
    }

    pub fn with_domain(
        fiber_dim: u32,
        warping: Warping,
        domain_kind: DomainKind,
    ) -> Result<Self, ModelError> {
        let expected = warping.natural_domain();
        if domain_kind != expected {
            return Err(ModelError::IncompatibleDomain {
                warping,
                expected,
                requested: domain_kind,
            });
        }
        if warping == Warping::Cosh && fiber_dim != 2 {
            return Err(ModelError::CoshFiberDim(fiber_dim));
        }
        if domain_kind == DomainKind::BallFromCenter && fiber_dim == 0 {
            return Err(ModelError::DegenerateBall(fiber_dim));
        }
        Ok(Self {
            fiber_dim,
            warping,
            domain_kind,
        })
    }

    pub fn hyperbolic(fiber_dim: u32) -> Result<Self, ModelError> {
        Self::new(fiber_dim, Warping::Sinh)
    }

    pub fn fiber_dim(&self) -> u32 {
        self.fiber_dim
    }

    /// `n` as a float, for formulas.
    pub fn n(&self) -> f64 {
        f64::from(self.fiber_dim)
    }

    pub fn warping(&self) -> Warping {
        self.warping
    }

    pub fn domain_kind(&self) -> DomainKind {
        self.domain_kind
    }

    pub fn is_ball(&self) -> bool {
        self.domain_kind == DomainKind::BallFromCenter
    }

    /// Closed radial interval of the domain.
    pub fn interval(&self, spec: DomainSpec) -> (f64, f64) {
        match self.domain_kind {
            DomainKind::BallFromCenter => (0.0, spec.radius()),
            DomainKind::SymmetricBand => (-spec.radius(), spec.radius()),
        }
    }

    /// Name used on the command line, e.g. `sinh-ball`.
    pub fn selector(&self) -> String {
        format!("{}-{}", self.warping, self.domain_kind)
    }

    fn outside(&self, t: f64) -> ModelError {
        ModelError::OutsideDomain {
            t,
            model: self.selector(),
        }
    }

    /// Coefficient `n·w'(t)/w(t)` of `f'` in the radial Laplacian.
    ///
    /// Ball models refuse `t <= 0`: the pole is a regular singular point and
    /// is handled by the solver's series start.
    pub fn drift_coefficient(&self, t: f64) -> Result<f64, ModelError> {
        if !t.is_finite() || (self.is_ball() && t <= 0.0) {
            return Err(self.outside(t));
        }
        Ok(self.n() * self.warping.log_derivative(t))
    }

    /// Same as [`Self::drift_coefficient`] but also checks `t` against the
    /// open interval of a concrete domain.
    pub fn drift_in(&self, spec: DomainSpec, t: f64) -> Result<f64, ModelError> {
        let (a, b) = self.interval(spec);
        if !(t > a && t < b) {
            return Err(self.outside(t));
        }
        self.drift_coefficient(t)
    }

    /// Radial volume weight `w(t)^n`.
    pub fn volume_density(&self, t: f64) -> Result<f64, ModelError> {
        if !t.is_finite() || (self.is_ball() && t < 0.0) {
            return Err(self.outside(t));
        }
        Ok(self.warping.value(t).powi(self.fiber_dim as i32))
    }

    /// `ln(w(t)^n)`, usable where `w^n` itself would overflow.
    pub fn log_volume_density(&self, t: f64) -> Result<f64, ModelError> {
        if !t.is_finite() || (self.is_ball() && t < 0.0) {
            return Err(self.outside(t));
        }
        if self.fiber_dim == 0 {
            return Ok(0.0);
        }
        Ok(self.n() * self.warping.log_value(t))
    }

    /// `Δf = f'' + drift·f'` for a radial function with the given derivatives.
    pub fn radial_laplacian(&self, t: f64, d1: f64, d2: f64) -> Result<f64, ModelError> {
        Ok(d2 + self.drift_coefficient(t)? * d1)
    }
}

impl fmt::Display for WarpedModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (n = {})", self.selector(), self.fiber_dim)
    }
}

/// Model selector without the fiber dimension, e.g. `exp-band`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelSelector {
    pub warping: Warping,
    pub domain_kind: DomainKind,
}

impl ModelSelector {
    pub fn build(self, fiber_dim: u32) -> Result<WarpedModel, ModelError> {
        WarpedModel::with_domain(fiber_dim, self.warping, self.domain_kind)
    }
}

impl fmt::Display for ModelSelector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.warping, self.domain_kind)
    }
}

impl FromStr for ModelSelector {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || ModelError::UnknownModel(s.to_string());
        let (w, d) = s.split_once('-').ok_or_else(unknown)?;
        let warping = match w {
            "sinh" => Warping::Sinh,
            "linear" => Warping::Linear,
            "exp" => Warping::Exp,
            "cosh" => Warping::Cosh,
            _ => return Err(unknown()),
        };
        let domain_kind = match d {
            "ball" => DomainKind::BallFromCenter,
            "band" => DomainKind::SymmetricBand,
            _ => return Err(unknown()),
        };
        Ok(Self {
            warping,
            domain_kind,
        })
    }
}

/// Geodesic radius of a ball, or half-width of a band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct DomainSpec {
    radius: f64,
}

impl DomainSpec {
    pub fn new(radius: f64) -> Result<Self, ModelError> {
        if radius > 0.0 && radius.is_finite() {
            Ok(Self { radius })
        } else {
            Err(ModelError::InvalidRadius(radius))
        }
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

impl TryFrom<f64> for DomainSpec {
    type Error = ModelError;
    fn try_from(r: f64) -> Result<Self, Self::Error> {
        Self::new(r)
    }
}

impl From<DomainSpec> for f64 {
    fn from(s: DomainSpec) -> f64 {
        s.radius
    }
}

type RadialEval = dyn Fn(f64) -> (f64, f64) + Send + Sync;

/// A radial scalar field `t ↦ (f(t), f'(t))` with a tag naming its origin.
#[derive(Clone)]
pub struct RadialFunction {
    tag: String,
    eval: Arc<RadialEval>,
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFunction")
            .field("tag", &self.tag)
            .finish_non_exhaustive()
    }
}

impl RadialFunction {
    pub fn new<F>(tag: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        Self {
            tag: tag.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn eval(&self, t: f64) -> (f64, f64) {
        (self.eval)(t)
    }

    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.eval(t).1
    }

    /// Largest gap between the stored derivative and a central difference
    /// with step `h`, over the given sample points.
    pub fn derivative_mismatch(&self, samples: &[f64], h: f64) -> f64 {
        samples
            .iter()
            .map(|&t| {
                let fd = (self.value(t + h) - self.value(t - h)) / (2.0 * h);
                (fd - self.derivative(t)).abs()
            })
            .fold(0.0, f64::max)
    }

    /// `e^{-nt/2}·sin(πt/R)`: the ball test function behind the
    /// hyperbolic upper bound.
    pub fn decaying_sine(n: u32, radius: f64) -> Self {
        let half_n = 0.5 * f64::from(n);
        let k = std::f64::consts::PI / radius;
        Self::new(format!("decaying-sine(n={n},R={radius})"), move |t| {
            let e = (-half_n * t).exp();
            let (s, c) = (k * t).sin_cos();
            (e * s, e * (k * c - half_n * s))
        })
    }

    /// `e^{-nt/2}·cos(πt/(2R))`: exact first eigenfunction of the exp band.
    pub fn exp_band_mode(n: u32, radius: f64) -> Self {
        let half_n = 0.5 * f64::from(n);
        let k = std::f64::consts::FRAC_PI_2 / radius;
        Self::new(format!("exp-band-mode(n={n},R={radius})"), move |t| {
            let e = (-half_n * t).exp();
            let (s, c) = (k * t).sin_cos();
            (e * c, -e * (half_n * c + k * s))
        })
    }

    /// `cos(πt/(2R))/cosh t`: exact first eigenfunction of the cosh band.
    pub fn cosh_band_mode(radius: f64) -> Self {
        let k = std::f64::consts::FRAC_PI_2 / radius;
        Self::new(format!("cosh-band-mode(R={radius})"), move |t| {
            let (s, c) = (k * t).sin_cos();
            let v = c / t.cosh();
            (v, -k * s / t.cosh() - t.tanh() * v)
        })
    }
}
