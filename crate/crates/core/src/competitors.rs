//! Benchmark tests: a Cramér–von Mises comparison of residual distributions
//! and a kernel-smoothed lack-of-fit statistic on squared residuals.
//!
//! Both are calibrated with the same residual bootstrap as the dCov test.
//! The Cramér–von Mises test here uses the plain residual bootstrap rather
//! than a smoothed one; every report says so in its notes.

use std::fmt;
use std::str::FromStr;

use crate::data::{Dataset, ResidualKind, ResidualSet};
use crate::dcov_test::{
    bootstrap_critical_value, bootstrap_p_value, compute_residuals, residual_bootstrap, FitContext, TestConfig,
};
use crate::error::{Error, Result};
use crate::mean_models::{KernelSpec, KernelWeights, MeanFit};
use crate::variance_models::VarianceFit;

pub const CVM_BOOTSTRAP_NOTE: &str =
    "critical value from the plain residual bootstrap, not the smooth residual bootstrap";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Competitor {
    Cvm,
    Wz,
}

impl Competitor {
    pub fn name(&self) -> &'static str {
        match self {
            Competitor::Cvm => "cvm",
            Competitor::Wz => "wz",
        }
    }
}

impl fmt::Display for Competitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Competitor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cvm" => Ok(Competitor::Cvm),
            "wz" => Ok(Competitor::Wz),
            other => Err(Error::Config(format!("unknown competitor test '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompetitorReport {
    pub which: Competitor,
    pub statistic: f64,
    pub p_value: f64,
    pub critical_value: f64,
    pub reject: bool,
    pub alpha: f64,
    pub bootstrap_stats: Vec<f64>,
    pub failed_replicates: usize,
    pub notes: Vec<String>,
}

/// `n ∫ [F̂_ε̂ - F̂_η̂]² dF̂_ε̂`, which for empirical CDFs is
/// `Σ_i [F̂_ε̂(ε̂_i) - F̂_η̂(ε̂_i)]²` with right-continuous `F̂(y) = #{v ≤ y}/n`.
pub fn cvm_statistic(eps_hat: &ResidualSet, eta_hat: &ResidualSet) -> Result<f64> {
    if eps_hat.len() != eta_hat.len() {
        return Err(Error::Dimension(format!(
            "residual sets have lengths {} and {}",
            eps_hat.len(),
            eta_hat.len()
        )));
    }
    let n = eps_hat.len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut eps = eps_hat.values.clone();
    let mut eta = eta_hat.values.clone();
    eps.sort_by(f64::total_cmp);
    eta.sort_by(f64::total_cmp);
    let nf = n as f64;
    Ok(eps
        .iter()
        .map(|&y| {
            let f_eps = eps.partition_point(|&v| v <= y) as f64 / nf;
            let f_eta = eta.partition_point(|&v| v <= y) as f64 / nf;
            (f_eps - f_eta).powi(2)
        })
        .sum())
}

/// `(1 / (n(n-1)h^p)) Σ_{i≠j} K((X_i - X_j)/h) u_i u_j` for marks `u`.
pub fn wz_statistic_from_marks(points: &[f64], p: usize, marks: &[f64], kernel: &KernelSpec) -> Result<f64> {
    let weights = KernelWeights::unchecked(points, p, kernel)?;
    wz_with(&weights, marks)
}

fn wz_with(weights: &KernelWeights, marks: &[f64]) -> Result<f64> {
    let n = weights.n();
    if marks.len() != n {
        return Err(Error::Dimension(format!("{} marks for {n} points", marks.len())));
    }
    let nf = n as f64;
    Ok(weights.quadratic_form(marks) / (nf * (nf - 1.0)))
}

/// Squared-residual marks `u_i = (Y_i - m̂(X_i))² - σ²(X_i, θ̂)`.
pub fn wz_marks(ds: &Dataset, mean_fit: &MeanFit, var_fit: &VarianceFit) -> Vec<f64> {
    mean_fit
        .residuals(ds)
        .iter()
        .zip(&var_fit.sigma_values)
        .map(|(r, s)| r * r - s * s)
        .collect()
}

pub fn wz_statistic(ds: &Dataset, mean_fit: &MeanFit, var_fit: &VarianceFit, kernel: &KernelSpec) -> Result<f64> {
    wz_statistic_from_marks(ds.x(), ds.p(), &wz_marks(ds, mean_fit, var_fit), kernel)
}

/// Nonparametric `σ̂(X_i)`: leave-one-out kernel regression of squared mean
/// residuals, floored, then square-rooted.
pub fn nonparametric_sigma(ds: &Dataset, mean_fit: &MeanFit, weights: &KernelWeights, floor: f64) -> Vec<f64> {
    let sq: Vec<f64> = mean_fit.residuals(ds).iter().map(|r| r * r).collect();
    weights.smooth(&sq).into_iter().map(|v| v.max(floor).sqrt()).collect()
}

/// `(ε̂, η̂)` for the Cramér–von Mises comparison.
pub fn cvm_residuals(
    ds: &Dataset,
    mean_fit: &MeanFit,
    var_fit: &VarianceFit,
    weights: &KernelWeights,
    floor: f64,
) -> (ResidualSet, ResidualSet) {
    let sigma_np = nonparametric_sigma(ds, mean_fit, weights, floor);
    let eps = mean_fit
        .residuals(ds)
        .iter()
        .zip(&sigma_np)
        .map(|(r, s)| r / s)
        .collect();
    (
        ResidualSet::new(eps, ResidualKind::RawEtaHat),
        compute_residuals(ds, mean_fit, var_fit),
    )
}

/// Run one benchmark test with residual-bootstrap calibration.
pub fn run_competitor(ds: &Dataset, cfg: &TestConfig, which: Competitor) -> Result<CompetitorReport> {
    let ctx = FitContext::new(ds, cfg)?;
    let null = ctx.fit(ds, None, cfg.seed.child("variance", 0).master_seed)?;
    let kernel = KernelSpec::gaussian(ctx.bandwidth)?;
    let floor = cfg.variance_family.floor;

    let (statistic, boot, notes) = match which {
        Competitor::Cvm => {
            let weights = KernelWeights::new(ds, &kernel)?;
            let (eps, eta) = cvm_residuals(ds, &null.mean, &null.variance, &weights, floor);
            let statistic = cvm_statistic(&eps, &eta)?;
            let boot = residual_bootstrap(&ctx, &null, |b, refit| {
                let (eps, eta) = cvm_residuals(b, &refit.mean, &refit.variance, &weights, floor);
                cvm_statistic(&eps, &eta)
            })?;
            (statistic, boot, vec![CVM_BOOTSTRAP_NOTE.to_string()])
        }
        Competitor::Wz => {
            let weights = KernelWeights::unchecked(ds.x(), ds.p(), &kernel)?;
            let statistic = wz_with(&weights, &wz_marks(ds, &null.mean, &null.variance))?;
            let boot = residual_bootstrap(&ctx, &null, |b, refit| {
                wz_with(&weights, &wz_marks(b, &refit.mean, &refit.variance))
            })?;
            (statistic, boot, Vec::new())
        }
    };
    let critical_value = bootstrap_critical_value(&boot.stats, cfg.alpha);
    Ok(CompetitorReport {
        which,
        statistic,
        p_value: bootstrap_p_value(statistic, &boot.stats),
        critical_value,
        reject: statistic > critical_value,
        alpha: cfg.alpha,
        bootstrap_stats: boot.stats,
        failed_replicates: boot.failed,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcov_test::FitContext;
    use crate::mean_models::{MeanFamily, MeanModelSpec};
    use crate::simlab::{generate, Model};
    use crate::variance_models::VarianceFamily;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn rs(v: &[f64]) -> ResidualSet {
        ResidualSet::new(v.to_vec(), ResidualKind::RawEtaHat)
    }

    #[test]
    fn cvm_examples() {
        let e = rs(&[0.3, -1.2, 2.0, 0.3]);
        assert_eq!(cvm_statistic(&e, &e).unwrap(), 0.0);
        let t = cvm_statistic(&rs(&[1.0, 2.0, 3.0]), &rs(&[10.0, 20.0, 30.0])).unwrap();
        assert_abs_diff_eq!(t, 14.0 / 9.0, epsilon = 1e-15);
        let t2 = cvm_statistic(&rs(&[3.0, 1.0, 2.0]), &rs(&[30.0, 10.0, 20.0])).unwrap();
        assert_eq!(t, t2);
        assert!(cvm_statistic(&rs(&[1.0]), &rs(&[1.0, 2.0])).is_err());
    }

    #[test]
    fn wz_examples() {
        let h = 0.7;
        let kernel = KernelSpec::gaussian(h).unwrap();
        let t = wz_statistic_from_marks(&[0.0, h], 1, &[1.0, -1.0], &kernel).unwrap();
        let k1 = (-0.5f64).exp() / (2.0 * PI).sqrt();
        assert_abs_diff_eq!(t, -k1 / h, epsilon = 1e-14);

        let pts = [0.1, 0.5, -0.3, 1.2, 0.8];
        assert_eq!(wz_statistic_from_marks(&pts, 1, &[0.0; 5], &kernel).unwrap(), 0.0);
        let marks = [0.4, -1.0, 2.0, 0.1, -0.7];
        let base = wz_statistic_from_marks(&pts, 1, &marks, &kernel).unwrap();
        let (mut p2, mut m2) = (pts, marks);
        p2.swap(0, 3);
        m2.swap(0, 3);
        assert_abs_diff_eq!(
            wz_statistic_from_marks(&p2, 1, &m2, &kernel).unwrap(),
            base,
            epsilon = 1e-14
        );
    }

    fn fitted(model: Model, seed: u64, family: &str) -> (Dataset, TestConfig) {
        let ds = generate(model, 60, 2, 0.0, seed).unwrap();
        let cfg = TestConfig::new(
            MeanModelSpec::parametric(MeanFamily::Linear),
            VarianceFamily::from_id(family).unwrap(),
            seed,
        )
        .with_bootstrap(19);
        (ds, cfg)
    }

    #[test]
    fn cvm_self_comparison_is_zero_and_nonnegative() {
        let (ds, cfg) = fitted(Model::H22, 3, "sin-abs");
        let ctx = FitContext::new(&ds, &cfg).unwrap();
        let null = ctx.fit(&ds, None, 1).unwrap();
        let eta = compute_residuals(&ds, &null.mean, &null.variance);
        assert_eq!(cvm_statistic(&eta, &eta).unwrap(), 0.0);
        let weights = KernelWeights::new(&ds, &KernelSpec::gaussian(ctx.bandwidth).unwrap()).unwrap();
        let (eps, eta) = cvm_residuals(&ds, &null.mean, &null.variance, &weights, 1e-8);
        assert!(cvm_statistic(&eps, &eta).unwrap() >= 0.0);
    }

    #[test]
    fn wz_takes_negative_values() {
        let mut found = false;
        for seed in 0..20 {
            let (ds, cfg) = fitted(Model::H11, seed, "abs-linear");
            let ctx = FitContext::new(&ds, &cfg).unwrap();
            let null = ctx.fit(&ds, None, 1).unwrap();
            let t = wz_statistic(
                &ds,
                &null.mean,
                &null.variance,
                &KernelSpec::gaussian(ctx.bandwidth).unwrap(),
            )
            .unwrap();
            if t < 0.0 {
                found = true;
                break;
            }
        }
        assert!(found);
    }

    #[test]
    fn competitor_reports_obey_lattice() {
        for which in [Competitor::Cvm, Competitor::Wz] {
            let (ds, cfg) = fitted(Model::H21, 5, "quad");
            let r = run_competitor(&ds, &cfg, which).unwrap();
            assert_eq!(r.bootstrap_stats.len(), 19);
            let k = r.p_value * 20.0;
            assert!((k - k.round()).abs() < 1e-12 && k >= 1.0 - 1e-12);
            assert_eq!(r.reject, r.statistic > r.critical_value);
            assert_eq!(
                which == Competitor::Cvm,
                r.notes.iter().any(|n| n == CVM_BOOTSTRAP_NOTE)
            );
        }
    }
}
