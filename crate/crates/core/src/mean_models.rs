//! Regression-mean estimation: parametric least squares and leave-one-out
//! Nadaraya–Watson smoothing with a Gaussian product kernel.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Default multiplier in the bandwidth rule `h = c · n^(-1/(p+4))`.
pub const DEFAULT_BANDWIDTH_C: f64 = 1.2;

/// Kernel weight sums below this are treated as an isolated point.
pub const MIN_KERNEL_MASS: f64 = 1e-300;

/// A smooth user-supplied mean function `m(x, β)`.
pub trait CustomMean: Send + Sync {
    fn id(&self) -> &str;

    /// Number of parameters for covariates of dimension `p`.
    fn dim(&self, p: usize) -> usize;

    fn eval(&self, x: &[f64], beta: &[f64]) -> f64;

    /// Write `∂m/∂β` into `out` and return `true`, or return `false` to
    /// fall back on central finite differences.
    fn gradient(&self, _x: &[f64], _beta: &[f64], _out: &mut [f64]) -> bool {
        false
    }
}

/// Parametric mean families.
#[derive(Clone)]
pub enum MeanFamily {
    /// `βᵀx`
    Linear,
    /// `β₀ + β₁ᵀx`
    Affine,
    Custom(Arc<dyn CustomMean>),
}

impl fmt::Debug for MeanFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MeanFamily({})", self.id())
    }
}

impl MeanFamily {
    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "linear" => Ok(Self::Linear),
            "affine" => Ok(Self::Affine),
            other => Err(Error::Config(format!(
                "unknown mean family '{other}' (expected 'linear' or 'affine')"
            ))),
        }
    }

    pub fn id(&self) -> &str {
        match self {
            Self::Linear => "linear",
            Self::Affine => "affine",
            Self::Custom(c) => c.id(),
        }
    }

    pub fn dim(&self, p: usize) -> usize {
        match self {
            Self::Linear => p,
            Self::Affine => p + 1,
            Self::Custom(c) => c.dim(p),
        }
    }

    pub fn eval(&self, x: &[f64], beta: &[f64]) -> f64 {
        match self {
            Self::Linear => dot(x, beta),
            Self::Affine => beta[0] + dot(x, &beta[1..]),
            Self::Custom(c) => c.eval(x, beta),
        }
    }

    fn gradient(&self, x: &[f64], beta: &[f64], out: &mut [f64]) {
        match self {
            Self::Linear => out.copy_from_slice(x),
            Self::Affine => {
                out[0] = 1.0;
                out[1..].copy_from_slice(x);
            }
            Self::Custom(c) => {
                if !c.gradient(x, beta, out) {
                    let mut b = beta.to_vec();
                    for k in 0..beta.len() {
                        let step = 1e-6 * beta[k].abs().max(1.0);
                        b[k] = beta[k] + step;
                        let up = c.eval(x, &b);
                        b[k] = beta[k] - step;
                        let down = c.eval(x, &b);
                        b[k] = beta[k];
                        out[k] = (up - down) / (2.0 * step);
                    }
                }
            }
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelKind {
    GaussianProduct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub bandwidth: f64,
}

impl KernelSpec {
    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::Config(format!("bandwidth must be positive, got {bandwidth}")));
        }
        Ok(Self {
            kind: KernelKind::GaussianProduct,
            bandwidth,
        })
    }

    /// `K(u)` for the `p`-variate standard normal density.
    pub fn density(&self, u: &[f64]) -> f64 {
        let sq: f64 = u.iter().map(|v| v * v).sum();
        (-0.5 * sq).exp() / (2.0 * PI).powf(u.len() as f64 / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BandwidthRule {
    /// `h = c · n^(-1/(p+4))`
    Rate {
        c: f64,
    },
    Fixed(f64),
}

impl BandwidthRule {
    pub fn bandwidth(&self, n: usize, p: usize) -> f64 {
        match *self {
            Self::Rate { c } => default_bandwidth(n, p, c),
            Self::Fixed(h) => h,
        }
    }
}

#[derive(Debug, Clone)]
pub enum MeanModelSpec {
    Parametric {
        family: MeanFamily,
        /// Starting point for iterative fits; closed-form families ignore it.
        beta_init: Option<Vec<f64>>,
    },
    Nonparametric {
        rule: BandwidthRule,
    },
}

impl MeanModelSpec {
    pub fn parametric(family: MeanFamily) -> Self {
        Self::Parametric {
            family,
            beta_init: None,
        }
    }

    pub fn nonparametric(c: f64) -> Self {
        Self::Nonparametric {
            rule: BandwidthRule::Rate { c },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanFit {
    pub fitted_values: Vec<f64>,
    pub beta_hat: Option<Vec<f64>>,
    /// Residual sum of squares at the returned fit.
    pub objective: f64,
    pub converged: bool,
    /// Bandwidth used by the kernel smoother, when nonparametric.
    pub bandwidth: Option<f64>,
}

impl MeanFit {
    pub fn residuals(&self, ds: &Dataset) -> Vec<f64> {
        ds.y().iter().zip(&self.fitted_values).map(|(y, m)| y - m).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeastSquaresOptions {
    pub gradient_tol: f64,
    pub max_iter: usize,
}

impl Default for LeastSquaresOptions {
    fn default() -> Self {
        Self {
            gradient_tol: 1e-8,
            max_iter: 200,
        }
    }
}

pub fn default_bandwidth(n: usize, p: usize, c: f64) -> f64 {
    c * (n as f64).powf(-1.0 / (p as f64 + 4.0))
}

fn sse(ds: &Dataset, family: &MeanFamily, beta: &[f64]) -> f64 {
    (0..ds.n())
        .map(|i| (ds.y()[i] - family.eval(ds.x_row(i), beta)).powi(2))
        .sum()
}

/// Least-squares fit of a parametric mean. Linear-in-parameter families are
/// solved in closed form (QR); custom families use damped Gauss–Newton.
pub fn fit_mean_parametric(
    ds: &Dataset,
    family: &MeanFamily,
    beta_init: Option<&[f64]>,
    opts: &LeastSquaresOptions,
) -> Result<MeanFit> {
    let k = family.dim(ds.p());
    if let Some(b) = beta_init {
        if b.len() != k {
            return Err(Error::Config(format!(
                "mean family '{}' expects {k} parameters, initial vector has {}",
                family.id(),
                b.len()
            )));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("initial mean parameters must be finite".into()));
        }
    }
    let (beta, converged) = match family {
        MeanFamily::Linear | MeanFamily::Affine => (closed_form(ds, family)?, true),
        MeanFamily::Custom(_) => {
            let init = beta_init.map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; k]);
            damped_gauss_newton(ds, family, init, opts)?
        }
    };
    let fitted_values: Vec<f64> = (0..ds.n()).map(|i| family.eval(ds.x_row(i), &beta)).collect();
    let objective = ds.y().iter().zip(&fitted_values).map(|(y, m)| (y - m).powi(2)).sum();
    Ok(MeanFit {
        fitted_values,
        beta_hat: Some(beta),
        objective,
        converged,
        bandwidth: None,
    })
}

fn closed_form(ds: &Dataset, family: &MeanFamily) -> Result<Vec<f64>> {
    let n = ds.n();
    let k = family.dim(ds.p());
    let offset = k - ds.p();
    let design = DMatrix::from_fn(n, k, |i, j| if j < offset { 1.0 } else { ds.x_row(i)[j - offset] });
    if n < k {
        return Err(Error::RankDeficient);
    }
    let qr = design.qr();
    let r = qr.r();
    let scale = (0..k).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    if scale == 0.0 || (0..k).any(|j| r[(j, j)].abs() <= 1e-10 * scale) {
        return Err(Error::RankDeficient);
    }
    let qty = qr.q().transpose() * DVector::from_column_slice(ds.y());
    let beta = r.solve_upper_triangular(&qty).ok_or(Error::RankDeficient)?;
    Ok(beta.iter().copied().collect())
}

fn damped_gauss_newton(
    ds: &Dataset,
    family: &MeanFamily,
    mut beta: Vec<f64>,
    opts: &LeastSquaresOptions,
) -> Result<(Vec<f64>, bool)> {
    let n = ds.n();
    let k = beta.len();
    let mut lambda = 1e-3;
    let mut current = sse(ds, family, &beta);
    let mut grad_row = vec![0.0; k];
    for _ in 0..opts.max_iter {
        let mut jtj = DMatrix::<f64>::zeros(k, k);
        let mut jtr = DVector::<f64>::zeros(k);
        for i in 0..n {
            let x = ds.x_row(i);
            family.gradient(x, &beta, &mut grad_row);
            let r = ds.y()[i] - family.eval(x, &beta);
            for a in 0..k {
                jtr[a] += grad_row[a] * r;
                for b in 0..k {
                    jtj[(a, b)] += grad_row[a] * grad_row[b];
                }
            }
        }
        if jtr.amax() < opts.gradient_tol {
            return Ok((beta, true));
        }
        let mut improved = false;
        while lambda < 1e16 {
            let mut damped = jtj.clone();
            for a in 0..k {
                damped[(a, a)] += lambda * jtj[(a, a)].max(1e-12);
            }
            if let Some(step) = damped.cholesky().map(|c| c.solve(&jtr)) {
                let trial: Vec<f64> = beta.iter().zip(step.iter()).map(|(b, s)| b + s).collect();
                let value = sse(ds, family, &trial);
                if value.is_finite() && value <= current {
                    let small = step.amax() <= 1e-14 * (1.0 + beta.iter().fold(0.0f64, |m, b| m.max(b.abs())));
                    beta = trial;
                    current = value;
                    lambda = (lambda / 10.0).max(1e-12);
                    improved = true;
                    if small {
                        return Ok((beta, true));
                    }
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !improved {
            // No descent direction left at machine precision.
            return Ok((beta, true));
        }
    }
    Ok((beta, false))
}

/// Leave-one-out Gaussian kernel weights for a fixed covariate sample.
///
/// The matrix depends only on `X` and `h`, so one instance serves every
/// bootstrap refit of the same design.
#[derive(Debug, Clone)]
pub struct KernelWeights {
    n: usize,
    bandwidth: f64,
    w: Vec<f64>,
    row_mass: Vec<f64>,
}

impl KernelWeights {
    /// `K_h(X_i - X_j) = K((X_i - X_j)/h) / h^p` for `i ≠ j`, zero on the
    /// diagonal. Fails if any row's total weight is below
    /// [`MIN_KERNEL_MASS`].
    pub fn new(ds: &Dataset, kernel: &KernelSpec) -> Result<Self> {
        Self::from_points(ds.x(), ds.p(), kernel)
    }

    /// As [`KernelWeights::new`] for a raw row-major `n×p` buffer.
    pub fn from_points(points: &[f64], p: usize, kernel: &KernelSpec) -> Result<Self> {
        let weights = Self::unchecked(points, p, kernel)?;
        if let Some((index, &weight)) = weights
            .row_mass
            .iter()
            .enumerate()
            .find(|(_, &m)| !(m >= MIN_KERNEL_MASS))
        {
            return Err(Error::IsolatedPoint { index, weight });
        }
        Ok(weights)
    }

    /// Weights without the isolated-point check, for callers that never
    /// divide by the row mass.
    pub(crate) fn unchecked(points: &[f64], p: usize, kernel: &KernelSpec) -> Result<Self> {
        if p == 0 || !points.len().is_multiple_of(p) {
            return Err(Error::Dimension(format!(
                "buffer of length {} is not n×{p}",
                points.len()
            )));
        }
        let n = points.len() / p;
        let row = |i: usize| &points[i * p..(i + 1) * p];
        if n < 2 {
            return Err(Error::Size("kernel smoothing needs n >= 2".into()));
        }
        let h = kernel.bandwidth;
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Config(format!("bandwidth must be positive, got {h}")));
        }
        let norm = 1.0 / ((2.0 * PI).powf(p as f64 / 2.0) * h.powi(p as i32));
        let inv_two_h2 = 1.0 / (2.0 * h * h);
        let mut w = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let sq: f64 = row(i).iter().zip(row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
                let k = norm * (-sq * inv_two_h2).exp();
                w[i * n + j] = k;
                w[j * n + i] = k;
            }
        }
        let row_mass: Vec<f64> = (0..n).map(|i| w[i * n..(i + 1) * n].iter().sum()).collect();
        Ok(Self {
            n,
            bandwidth: h,
            w,
            row_mass,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `Σ_{i≠j} w_ij a_i a_j`.
    pub fn quadratic_form(&self, a: &[f64]) -> f64 {
        (0..self.n)
            .map(|i| a[i] * dot(&self.w[i * self.n..(i + 1) * self.n], a))
            .sum()
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.w[i * self.n + j]
    }

    /// Leave-one-out weighted averages of `values`.
    pub fn smooth(&self, values: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| dot(&self.w[i * self.n..(i + 1) * self.n], values) / self.row_mass[i])
            .collect()
    }
}

/// Leave-one-out Nadaraya–Watson estimates of `y` at each row of `points`.
pub fn nw_loo(points: &[f64], p: usize, y: &[f64], kernel: &KernelSpec) -> Result<Vec<f64>> {
    let weights = KernelWeights::from_points(points, p, kernel)?;
    if y.len() != weights.n {
        return Err(Error::Dimension(format!(
            "{} responses for {} points",
            y.len(),
            weights.n
        )));
    }
    Ok(weights.smooth(y))
}

/// Leave-one-out Nadaraya–Watson fit of the response.
pub fn fit_mean_nw(ds: &Dataset, kernel: &KernelSpec) -> Result<MeanFit> {
    let weights = KernelWeights::new(ds, kernel)?;
    Ok(fit_mean_nw_with(ds, &weights))
}

/// As [`fit_mean_nw`], reusing precomputed weights for `ds`'s covariates.
pub fn fit_mean_nw_with(ds: &Dataset, weights: &KernelWeights) -> MeanFit {
    let fitted_values = weights.smooth(ds.y());
    let objective = ds.y().iter().zip(&fitted_values).map(|(y, m)| (y - m).powi(2)).sum();
    MeanFit {
        fitted_values,
        beta_hat: None,
        objective,
        converged: true,
        bandwidth: Some(weights.bandwidth()),
    }
}
