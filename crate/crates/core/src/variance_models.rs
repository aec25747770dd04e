//! Parametric conditional-variance families and their least-squares fit to
//! squared mean residuals.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mean_models::{dot, MeanFit};
use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::rng::RngSpec;

pub const DEFAULT_VARIANCE_FLOOR: f64 = 1e-8;

/// A user-supplied variance function `σ²(x, m, θ)`, where `m` is the fitted
/// mean at `x`.
pub trait CustomVariance: Send + Sync {
    fn id(&self) -> &str;
    fn dim(&self, p: usize) -> usize;
    fn sigma2(&self, x: &[f64], mean: f64, theta: &[f64]) -> f64;
}

#[derive(Clone)]
pub enum VarianceKind {
    /// `1 + |θᵀx|`
    AbsLinear,
    /// `1 + (θᵀx)²`
    Quad,
    /// `(1 + |sin(θᵀx)|)²`
    SinAbs,
    /// `θ`
    Constant,
    /// `s · |m(x)|^(2τ)` with `θ = (s, τ)` and `m` the fitted mean.
    PowerOfMean,
    Custom(Arc<dyn CustomVariance>),
}

/// A named family `σ²(·, θ)` with a positive evaluation floor.
#[derive(Clone)]
pub struct VarianceFamily {
    pub kind: VarianceKind,
    pub floor: f64,
}

impl fmt::Debug for VarianceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VarianceFamily")
            .field("id", &self.id())
            .field("floor", &self.floor)
            .finish()
    }
}

impl VarianceFamily {
    pub fn new(kind: VarianceKind) -> Self {
        Self {
            kind,
            floor: DEFAULT_VARIANCE_FLOOR,
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        let kind = match id {
            "abs-linear" => VarianceKind::AbsLinear,
            "quad" => VarianceKind::Quad,
            "sin-abs" => VarianceKind::SinAbs,
            "constant" => VarianceKind::Constant,
            "power-of-mean" => VarianceKind::PowerOfMean,
            other => {
                return Err(Error::Config(format!(
                    "unknown variance family '{other}' (expected one of {})",
                    Self::BUILTIN_IDS.join(", ")
                )))
            }
        };
        Ok(Self::new(kind))
    }

    pub const BUILTIN_IDS: [&'static str; 5] = ["abs-linear", "quad", "sin-abs", "constant", "power-of-mean"];

    pub fn with_floor(mut self, floor: f64) -> Result<Self> {
        if !(floor > 0.0) || !floor.is_finite() {
            return Err(Error::Config(format!("variance floor must be positive, got {floor}")));
        }
        self.floor = floor;
        Ok(self)
    }

    pub fn id(&self) -> &str {
        match &self.kind {
            VarianceKind::AbsLinear => "abs-linear",
            VarianceKind::Quad => "quad",
            VarianceKind::SinAbs => "sin-abs",
            VarianceKind::Constant => "constant",
            VarianceKind::PowerOfMean => "power-of-mean",
            VarianceKind::Custom(c) => c.id(),
        }
    }

    pub fn dim(&self, p: usize) -> usize {
        match &self.kind {
            VarianceKind::AbsLinear | VarianceKind::Quad | VarianceKind::SinAbs => p,
            VarianceKind::Constant => 1,
            VarianceKind::PowerOfMean => 2,
            VarianceKind::Custom(c) => c.dim(p),
        }
    }

    /// Unfloored `σ²(x, θ)`.
    #[inline]
    pub fn raw_sigma2(&self, x: &[f64], mean: f64, theta: &[f64]) -> f64 {
        match &self.kind {
            VarianceKind::AbsLinear => 1.0 + dot(theta, x).abs(),
            VarianceKind::Quad => {
                let t = dot(theta, x);
                1.0 + t * t
            }
            VarianceKind::SinAbs => (1.0 + dot(theta, x).sin().abs()).powi(2),
            VarianceKind::Constant => theta[0],
            VarianceKind::PowerOfMean => theta[0] * mean.abs().powf(2.0 * theta[1]),
            VarianceKind::Custom(c) => c.sigma2(x, mean, theta),
        }
    }

    /// Starting point used when the caller supplies none.
    /// `mean_sq_resid` is the average squared mean residual.
    pub fn default_theta_init(&self, p: usize, mean_sq_resid: f64) -> Vec<f64> {
        match &self.kind {
            VarianceKind::AbsLinear | VarianceKind::Quad | VarianceKind::SinAbs => {
                vec![1.0 / (p as f64).sqrt(); p]
            }
            VarianceKind::Constant => vec![mean_sq_resid],
            VarianceKind::PowerOfMean => vec![mean_sq_resid, 0.0],
            VarianceKind::Custom(c) => vec![0.0; c.dim(p)],
        }
    }
}

/// `sqrt(max(σ²(x, θ), floor))`.
pub fn sigma_at(family: &VarianceFamily, theta: &[f64], x: &[f64], mean: f64) -> Result<f64> {
    let v = family.raw_sigma2(x, mean, theta);
    if !v.is_finite() {
        return Err(Error::FamilyEvaluation {
            family: family.id().to_string(),
        });
    }
    Ok(v.max(family.floor).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceFitOptions {
    /// Number of Nelder–Mead starts: the initial point plus
    /// `restarts - 1` seeded perturbations of it.
    pub restarts: usize,
    pub simplex: NelderMeadOptions,
    /// Perturbation standard deviation relative to `max(|θ_k|, 0.1)`.
    pub perturbation: f64,
    pub seed: u64,
}

impl Default for VarianceFitOptions {
    fn default() -> Self {
        Self {
            restarts: 5,
            simplex: NelderMeadOptions::default(),
            perturbation: 0.5,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceFit {
    pub theta_hat: Vec<f64>,
    /// `Σ_i [(Y_i - m̂(X_i))² - σ²(X_i, θ̂)]²` with floored `σ²`.
    pub objective: f64,
    /// `σ(X_i, θ̂)`, floored.
    pub sigma_values: Vec<f64>,
    pub converged: bool,
    pub n_restarts_used: usize,
    /// Index of the start that produced `theta_hat`.
    pub best_restart: usize,
    /// The floor was active at some sample point for `theta_hat`.
    pub floored: bool,
}

/// Squared residuals and fitted means, the inputs of the variance objective.
struct Targets<'a> {
    ds: &'a Dataset,
    sq_resid: Vec<f64>,
    means: &'a [f64],
}

impl Targets<'_> {
    fn objective(&self, family: &VarianceFamily, theta: &[f64]) -> f64 {
        let floor = family.floor;
        let mut total = 0.0;
        for i in 0..self.sq_resid.len() {
            let s2 = family.raw_sigma2(self.ds.x_row(i), self.means[i], theta).max(floor);
            let e = self.sq_resid[i] - s2;
            total += e * e;
        }
        total
    }
}

/// Value of the variance least-squares objective at `theta`.
pub fn variance_objective(ds: &Dataset, mean_fit: &MeanFit, family: &VarianceFamily, theta: &[f64]) -> f64 {
    let targets = Targets {
        ds,
        sq_resid: mean_fit.residuals(ds).iter().map(|r| r * r).collect(),
        means: &mean_fit.fitted_values,
    };
    targets.objective(family, theta)
}

/// Fit `θ̂ = argmin Σ_i [(Y_i - m̂(X_i))² - σ²(X_i, θ)]²` by multi-start
/// Nelder–Mead. Best start wins; ties go to the lower start index.
pub fn fit_variance(
    ds: &Dataset,
    mean_fit: &MeanFit,
    family: &VarianceFamily,
    theta_init: Option<&[f64]>,
    opts: &VarianceFitOptions,
) -> Result<VarianceFit> {
    if mean_fit.fitted_values.len() != ds.n() {
        return Err(Error::Dimension(format!(
            "mean fit has {} values for n = {}",
            mean_fit.fitted_values.len(),
            ds.n()
        )));
    }
    let d = family.dim(ds.p());
    let targets = Targets {
        ds,
        sq_resid: mean_fit.residuals(ds).iter().map(|r| r * r).collect(),
        means: &mean_fit.fitted_values,
    };
    let mean_sq = targets.sq_resid.iter().sum::<f64>() / ds.n() as f64;
    let init = match theta_init {
        Some(t) => t.to_vec(),
        None => family.default_theta_init(ds.p(), mean_sq),
    };
    if init.len() != d {
        return Err(Error::Config(format!(
            "variance family '{}' expects {d} parameters, initial vector has {}",
            family.id(),
            init.len()
        )));
    }
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::Config("initial variance parameters must be finite".into()));
    }

    let restarts = opts.restarts.max(1);
    let mut rng = RngSpec::new(opts.seed).stream("variance-restart", 0);
    let mut best: Option<(usize, crate::optim::Minimum)> = None;
    for r in 0..restarts {
        let start: Vec<f64> = if r == 0 {
            init.clone()
        } else {
            init.iter()
                .map(|&t| t + opts.perturbation * t.abs().max(0.1) * rng.sample::<f64, _>(StandardNormal))
                .collect()
        };
        let m = nelder_mead(|th| targets.objective(family, th), &start, &opts.simplex);
        let better = match &best {
            None => true,
            Some((_, b)) => m.value < b.value,
        };
        if better {
            best = Some((r, m));
        }
    }
    let (best_restart, m) = best.expect("at least one start");

    let mut sigma_values = Vec::with_capacity(ds.n());
    let mut floored = false;
    for i in 0..ds.n() {
        let raw = family.raw_sigma2(ds.x_row(i), targets.means[i], &m.x);
        floored |= raw < family.floor;
        sigma_values.push(sigma_at(family, &m.x, ds.x_row(i), targets.means[i])?);
    }
    let objective = targets.objective(family, &m.x);
    Ok(VarianceFit {
        theta_hat: m.x,
        objective,
        sigma_values,
        converged: m.converged,
        n_restarts_used: restarts,
        best_restart,
        floored,
    })
}
