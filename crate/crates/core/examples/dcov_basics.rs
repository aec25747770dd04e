//! Unbiased distance covariance on independent and dependent samples.

use dcov_hetero::dcov::{dcov_from_points, pairwise_distances, u_center};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> dcov_hetero::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let n = 200;
    let x: Vec<f64> = (0..2 * n).map(|_| rng.sample(StandardNormal)).collect();
    let noise: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();

    // |x1| drives the spread of w but not its mean: uncorrelated, not independent.
    let w: Vec<f64> = (0..n).map(|i| x[2 * i].abs() * noise[i]).collect();

    let indep = dcov_from_points(&x, 2, &noise, 1)?;
    let dep = dcov_from_points(&x, 2, &w, 1)?;
    println!("dCov^2(x, noise)       = {:+.5}", indep.value);
    println!("dCov^2(x, |x1|*noise)  = {:+.5}", dep.value);

    let a = u_center(&pairwise_distances(&x, 2)?)?;
    let row_sum: f64 = a.row(0).iter().sum();
    println!("U-centered row sum     = {row_sum:.2e}");
    Ok(())
}
