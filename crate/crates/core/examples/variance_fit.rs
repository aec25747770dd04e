//! Fit each built-in variance family to heteroscedastic data and compare the
//! least-squares objective.

use dcov_hetero::mean_models::{fit_mean_parametric, LeastSquaresOptions};
use dcov_hetero::simlab::{generate, theta0, Model};
use dcov_hetero::variance_models::{fit_variance, VarianceFitOptions};
use dcov_hetero::{MeanFamily, VarianceFamily};

fn main() -> dcov_hetero::Result<()> {
    let ds = generate(Model::H21, 400, 2, 0.0, 8)?;
    let mean = fit_mean_parametric(&ds, &MeanFamily::Linear, None, &LeastSquaresOptions::default())?;
    println!("generating theta = {:.4?}\n", theta0(2));

    for id in ["constant", "abs-linear", "quad", "sin-abs", "power-of-mean"] {
        let family = VarianceFamily::from_id(id)?;
        let fit = fit_variance(&ds, &mean, &family, None, &VarianceFitOptions::default())?;
        println!(
            "{id:>14}: objective = {:>9.2}  theta = {:.4?}  floored = {}",
            fit.objective, fit.theta_hat, fit.floored
        );
    }
    Ok(())
}
