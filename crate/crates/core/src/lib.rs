//! Distance-covariance test for the parametric form of the conditional
//! variance in nonlinear and nonparametric regression.
//!
//! Given `Y = m(X) + σ(X) ε`, the null hypothesis is that
//! `σ²(x) = σ²(x, θ₀)` for some `θ₀` in a parametric family. Under the null,
//! the standardized residual `η = (Y - m(X)) / σ(X, θ₀)` is independent of
//! `X`, and the test measures that dependence with the unbiased
//! distance-covariance estimator. Critical values come from a residual
//! bootstrap that refits both the mean and the variance on every replicate.
//!
//! Module map:
//!
//! - [`data`], [`rng`]: datasets, CSV ingestion, residual vectors, seeded substreams
//! - [`dcov`]: distance matrices, U-centering, unbiased dCov²
//! - [`mean_models`]: least-squares and leave-one-out Nadaraya–Watson means
//! - [`variance_models`]: variance families and their Nelder–Mead fit
//! - [`dcov_test`]: the test statistic and bootstrap calibration
//! - [`competitors`]: Cramér–von Mises and kernel lack-of-fit benchmarks
//! - [`simlab`]: simulation models, Monte Carlo size/power, bandwidth sweeps
//! - [`report`]: plain-text and CSV output bundles

pub mod competitors;
pub mod data;
pub mod dcov;
pub mod error;
pub mod mean_models;
pub mod optim;
pub mod report;
pub mod rng;
pub mod simlab;
pub mod variance_models;

pub use data::{load_dataset, standardize_residuals, Dataset, ResidualKind, ResidualSet};
pub use dcov::{dcov_unbiased, pairwise_distances, u_center, DcovStatistic, DistanceMatrix, UCenteredMatrix};

pub use dcov_test::{run_test, TestConfig, TestReport};
pub use error::{Error, Result};
pub use mean_models::{MeanFamily, MeanFit, MeanModelSpec};
pub use rng::RngSpec;
pub use variance_models::{VarianceFamily, VarianceFit};
