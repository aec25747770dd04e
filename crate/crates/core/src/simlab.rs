//! Simulation models, Monte Carlo size/power estimation, and bandwidth
//! sweeps.
//!
//! Every model has `Y = β₀ᵀX + s(X; a) ε` with `X ~ N(0, I_p)`,
//! `ε ~ N(0, 1)` and `β₀ = θ₀ = (1, …, 1)ᵀ/√p`. The multiplier `s` is:
//!
//! | model | `s(X; a)`                               | null family |
//! |-------|-----------------------------------------|-------------|
//! | H11   | `(1 + |t + a·exp(t)|)^½`, `t = θ₀ᵀX`     | abs-linear  |
//! | H12   | `(1 + |t₁| + a·t₁)^½`, `t₁ = θ₁ᵀX`       | abs-linear  |
//! | H21   | `|1 + t² + a·sin(t)|^½`                  | quad        |
//! | H22   | `1 + |sin(t)| + a·exp(t)`               | sin-abs     |
//!
//! `θ₁` has ones in its first `p/2` coordinates, scaled by `1/√(p/2)`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::competitors::{run_competitor, Competitor};
use crate::data::Dataset;
use crate::dcov_test::{run_test, TestConfig, DEFAULT_ALPHA};
use crate::error::{Error, Result};
use crate::mean_models::{MeanFamily, MeanModelSpec, DEFAULT_BANDWIDTH_C};
use crate::rng::{RngSpec, StreamRng};
use crate::variance_models::{VarianceFamily, VarianceFitOptions};

/// Replications and bootstrap size used when nothing else is requested.
pub const DESK_REPS: usize = 300;
pub const DESK_BOOTSTRAP_B: usize = 300;
/// Bandwidth multipliers for the default sweep.
pub const DEFAULT_C_GRID: [f64; 5] = [0.6, 0.8, 1.0, 1.2, 1.4];
/// Largest tolerated fraction of failed Monte Carlo replications per test.
pub const MAX_SCENARIO_FAILURE_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Model {
    H11,
    H12,
    H21,
    H22,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::H11, Model::H12, Model::H21, Model::H22];

    pub fn name(&self) -> &'static str {
        match self {
            Model::H11 => "H11",
            Model::H12 => "H12",
            Model::H21 => "H21",
            Model::H22 => "H22",
        }
    }

    /// Variance family that contains the model's `a = 0` variance.
    pub fn null_family(&self) -> VarianceFamily {
        let id = match self {
            Model::H11 | Model::H12 => "abs-linear",
            Model::H21 => "quad",
            Model::H22 => "sin-abs",
        };
        VarianceFamily::from_id(id).expect("built-in family")
    }

    /// `θ` at which [`Model::null_family`] reproduces the `a = 0` variance.
    pub fn theta_null(&self, p: usize) -> Vec<f64> {
        match self {
            Model::H12 => theta1(p),
            _ => theta0(p),
        }
    }

    pub fn validate(&self, p: usize, a: f64) -> Result<()> {
        if p == 0 {
            return Err(Error::Config("p must be at least 1".into()));
        }
        if !a.is_finite() {
            return Err(Error::Config(format!("deviation amplitude must be finite, got {a}")));
        }
        if *self == Model::H12 {
            if !p.is_multiple_of(2) {
                return Err(Error::Config(format!("model H12 needs an even p, got {p}")));
            }
            if a.abs() > 1.0 {
                return Err(Error::Config(format!(
                    "model H12 needs |a| <= 1 for a non-negative variance, got {a}"
                )));
            }
        }
        Ok(())
    }

    /// Conditional standard deviation of `Y` given `X = x`.
    pub fn conditional_sd(&self, x: &[f64], a: f64) -> f64 {
        let p = x.len();
        match self {
            Model::H11 => {
                let t = index(x, p);
                (1.0 + (t + a * t.exp()).abs()).sqrt()
            }
            Model::H12 => {
                let half = p / 2;
                let t1 = x[..half].iter().sum::<f64>() / (half as f64).sqrt();
                (1.0 + t1.abs() + a * t1).sqrt()
            }
            Model::H21 => {
                let t = index(x, p);
                (1.0 + t * t + a * t.sin()).abs().sqrt()
            }
            Model::H22 => {
                let t = index(x, p);
                (1.0 + t.sin().abs() + a * t.exp()).abs()
            }
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "H11" => Ok(Model::H11),
            "H12" => Ok(Model::H12),
            "H21" => Ok(Model::H21),
            "H22" => Ok(Model::H22),
            _ => Err(Error::Config(format!(
                "unknown model '{s}' (expected H11, H12, H21 or H22)"
            ))),
        }
    }
}

/// `θ₀ᵀx` with `θ₀ = (1, …, 1)ᵀ/√p`.
fn index(x: &[f64], p: usize) -> f64 {
    x.iter().sum::<f64>() / (p as f64).sqrt()
}

pub fn theta0(p: usize) -> Vec<f64> {
    vec![1.0 / (p as f64).sqrt(); p]
}

pub fn theta1(p: usize) -> Vec<f64> {
    let half = p / 2;
    let mut t = vec![0.0; p];
    t[..half].iter_mut().for_each(|v| *v = 1.0 / (half as f64).sqrt());
    t
}

/// Draw `n` observations of `model` with amplitude `a`.
pub fn generate_with(model: Model, n: usize, p: usize, a: f64, rng: &mut StreamRng) -> Result<Dataset> {
    model.validate(p, a)?;
    let beta = theta0(p);
    let mut x = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let start = x.len();
        x.extend((0..p).map(|_| rng.sample::<f64, _>(StandardNormal)));
        let row = &x[start..];
        let eps: f64 = rng.sample(StandardNormal);
        let mean: f64 = beta.iter().zip(row).map(|(b, v)| b * v).sum();
        y.push(mean + model.conditional_sd(row, a) * eps);
    }
    Dataset::from_flat(y, x, p)
}

pub fn generate(model: Model, n: usize, p: usize, a: f64, seed: u64) -> Result<Dataset> {
    generate_with(model, n, p, a, &mut RngSpec::new(seed).stream(model.name(), 0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mode {
    Nonlinear,
    Nonparametric,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Nonlinear => "nonlinear",
            Mode::Nonparametric => "nonparametric",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nonlinear" => Ok(Mode::Nonlinear),
            "nonparametric" => Ok(Mode::Nonparametric),
            _ => Err(Error::Config(format!(
                "unknown mode '{s}' (expected nonlinear or nonparametric)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TestKind {
    Dcov,
    Competitor(Competitor),
}

impl TestKind {
    pub const ALL: [TestKind; 3] = [
        TestKind::Dcov,
        TestKind::Competitor(Competitor::Cvm),
        TestKind::Competitor(Competitor::Wz),
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TestKind::Dcov => "dcov",
            TestKind::Competitor(c) => c.name(),
        }
    }
}

impl FromStr for TestKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dcov" => Ok(TestKind::Dcov),
            other => other.parse().map(TestKind::Competitor),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationScenario {
    pub model: Model,
    pub n: usize,
    pub p: usize,
    pub a: f64,
    pub mode: Mode,
    pub reps: usize,
    pub bootstrap_b: usize,
    pub alpha: f64,
    pub bandwidth_c: f64,
    pub tests: Vec<TestKind>,
    pub seed: u64,
}

impl SimulationScenario {
    /// Desk-scale defaults for the dCov test in nonlinear mode.
    pub fn new(model: Model, n: usize, p: usize, a: f64, seed: u64) -> Self {
        Self {
            model,
            n,
            p,
            a,
            mode: Mode::Nonlinear,
            reps: DESK_REPS,
            bootstrap_b: DESK_BOOTSTRAP_B,
            alpha: DEFAULT_ALPHA,
            bandwidth_c: DEFAULT_BANDWIDTH_C,
            tests: vec![TestKind::Dcov],
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate(self.p, self.a)?;
        if self.reps < 1 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.tests.is_empty() {
            return Err(Error::Config("at least one test must be selected".into()));
        }
        if self.n < crate::data::MIN_SAMPLES {
            return Err(Error::Config(format!(
                "n must be at least {}",
                crate::data::MIN_SAMPLES
            )));
        }
        self.test_config(RngSpec::new(self.seed)).validate()
    }

    /// Test configuration used for every replication of this scenario.
    pub fn test_config(&self, seed: RngSpec) -> TestConfig {
        let mean_spec = match self.mode {
            Mode::Nonlinear => MeanModelSpec::parametric(MeanFamily::Linear),
            Mode::Nonparametric => MeanModelSpec::nonparametric(self.bandwidth_c),
        };
        let mut cfg = TestConfig::new(mean_spec, self.model.null_family(), seed.master_seed)
            .with_bootstrap(self.bootstrap_b)
            .with_alpha(self.alpha);
        cfg.bandwidth_c = self.bandwidth_c;
        cfg.variance_opts = VarianceFitOptions::default();
        cfg
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerRow {
    pub model: Model,
    pub mode: Mode,
    pub p: usize,
    pub n: usize,
    pub a: f64,
    pub test: TestKind,
    pub reps: usize,
    pub rejections: usize,
    pub failures: usize,
    pub bandwidth_c: f64,
}

impl PowerRow {
    /// `rejections / reps`.
    pub fn rate(&self) -> f64 {
        self.rejections as f64 / self.reps as f64
    }

    /// Binomial standard error of [`PowerRow::rate`].
    pub fn se(&self) -> f64 {
        let r = self.rate();
        (r * (1.0 - r) / self.reps as f64).sqrt()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PowerTable {
    pub rows: Vec<PowerRow>,
}

impl PowerTable {
    pub fn find(&self, model: Model, p: usize, n: usize, a: f64, test: TestKind) -> Option<&PowerRow> {
        self.rows
            .iter()
            .find(|r| r.model == model && r.p == p && r.n == n && r.a == a && r.test == test)
    }

    pub fn extend(&mut self, other: PowerTable) {
        self.rows.extend(other.rows);
    }
}

/// Seed used to generate replication `r` of a scenario. It depends on the
/// model but not on `a`, so power curves over `a` use coupled samples.
pub fn replicate_seed(seed: u64, model: Model, r: usize) -> u64 {
    RngSpec::new(seed).child(model.name(), r as u64).master_seed
}

fn run_one(kind: TestKind, ds: &Dataset, cfg: &TestConfig) -> Result<bool> {
    match kind {
        TestKind::Dcov => run_test(ds, cfg).map(|r| r.reject),
        TestKind::Competitor(c) => run_competitor(ds, cfg, c).map(|r| r.reject),
    }
}

/// Empirical rejection rates of the selected tests over `scn.reps`
/// replications.
pub fn monte_carlo(scn: &SimulationScenario) -> Result<PowerTable> {
    scn.validate()?;
    let outcomes: Vec<Vec<Option<bool>>> = (0..scn.reps)
        .into_par_iter()
        .map(|r| {
            let data_seed = replicate_seed(scn.seed, scn.model, r);
            let ds = match generate(scn.model, scn.n, scn.p, scn.a, data_seed) {
                Ok(ds) => ds,
                Err(_) => return vec![None; scn.tests.len()],
            };
            let cfg = scn.test_config(RngSpec::new(scn.seed).child("replicate-bootstrap", r as u64));
            scn.tests.iter().map(|&t| run_one(t, &ds, &cfg).ok()).collect()
        })
        .collect();

    let mut table = PowerTable::default();
    for (k, &test) in scn.tests.iter().enumerate() {
        let rejections = outcomes.iter().filter(|o| o[k] == Some(true)).count();
        let failures = outcomes.iter().filter(|o| o[k].is_none()).count();
        if failures as f64 > MAX_SCENARIO_FAILURE_FRACTION * scn.reps as f64 {
            return Err(Error::Scenario {
                test: test.name().to_string(),
                failures,
                reps: scn.reps,
            });
        }
        table.rows.push(PowerRow {
            model: scn.model,
            mode: scn.mode,
            p: scn.p,
            n: scn.n,
            a: scn.a,
            test,
            reps: scn.reps,
            rejections,
            failures,
            bandwidth_c: scn.bandwidth_c,
        });
    }
    Ok(table)
}

/// Run `base` once per amplitude in `a_values`, sharing seeds.
pub fn monte_carlo_grid(base: &SimulationScenario, a_values: &[f64]) -> Result<PowerTable> {
    let mut table = PowerTable::default();
    for &a in a_values {
        table.extend(monte_carlo(&SimulationScenario { a, ..base.clone() })?);
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub c: f64,
    pub rate: f64,
    pub se: f64,
    pub failures: usize,
}

/// Nonparametric-mode dCov rejection rate at each bandwidth multiplier in
/// `c_grid`, reusing the same seeds for every `c`.
pub fn bandwidth_sweep(base: &SimulationScenario, c_grid: &[f64]) -> Result<Vec<SweepPoint>> {
    if c_grid.is_empty() {
        return Err(Error::Config("bandwidth grid is empty".into()));
    }
    if let Some(c) = c_grid.iter().find(|c| !(**c > 0.0) || !c.is_finite()) {
        return Err(Error::Config(format!(
            "bandwidth multipliers must be positive, got {c}"
        )));
    }
    c_grid
        .iter()
        .map(|&c| {
            let scn = SimulationScenario {
                mode: Mode::Nonparametric,
                bandwidth_c: c,
                tests: vec![TestKind::Dcov],
                ..base.clone()
            };
            let row = monte_carlo(&scn)?.rows.remove(0);
            Ok(SweepPoint {
                c,
                rate: row.rate(),
                se: row.se(),
                failures: row.failures,
            })
        })
        .collect()
}
