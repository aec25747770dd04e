//! Parametric least squares and leave-one-out Nadaraya–Watson on the same data.

use dcov_hetero::mean_models::{default_bandwidth, fit_mean_nw, fit_mean_parametric, KernelSpec, LeastSquaresOptions};
use dcov_hetero::simlab::{generate, Model};
use dcov_hetero::MeanFamily;

fn main() -> dcov_hetero::Result<()> {
    let ds = generate(Model::H21, 100, 2, 0.0, 3)?;

    let linear = fit_mean_parametric(&ds, &MeanFamily::Linear, None, &LeastSquaresOptions::default())?;
    let affine = fit_mean_parametric(&ds, &MeanFamily::Affine, None, &LeastSquaresOptions::default())?;
    println!(
        "linear beta = {:.4?}  sse = {:.3}",
        linear.beta_hat.unwrap(),
        linear.objective
    );
    println!(
        "affine beta = {:.4?}  sse = {:.3}",
        affine.beta_hat.unwrap(),
        affine.objective
    );
    println!("true beta   = [{:.4}, {:.4}]", 1.0 / 2f64.sqrt(), 1.0 / 2f64.sqrt());

    for c in [0.6, 1.2] {
        let h = default_bandwidth(ds.n(), ds.p(), c);
        let nw = fit_mean_nw(&ds, &KernelSpec::gaussian(h)?)?;
        println!("nw c={c}: h = {h:.4}  loo sse = {:.3}", nw.objective);
    }
    Ok(())
}
