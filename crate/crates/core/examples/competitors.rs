//! Cramér–von Mises and kernel lack-of-fit tests next to the dCov test.

use dcov_hetero::competitors::{run_competitor, Competitor};
use dcov_hetero::simlab::{generate, Model};
use dcov_hetero::{run_test, MeanFamily, MeanModelSpec, TestConfig};

fn main() -> dcov_hetero::Result<()> {
    let cfg = TestConfig::new(
        MeanModelSpec::parametric(MeanFamily::Linear),
        Model::H22.null_family(),
        5,
    )
    .with_bootstrap(199);

    for a in [0.0, 1.0] {
        let ds = generate(Model::H22, 100, 2, a, 23)?;
        let dcov = run_test(&ds, &cfg)?;
        println!("H22 a = {a}");
        println!("  dcov  stat = {:>10.4}  p = {:.3}", dcov.statistic, dcov.p_value);
        for which in [Competitor::Cvm, Competitor::Wz] {
            let r = run_competitor(&ds, &cfg, which)?;
            println!(
                "  {:<5} stat = {:>10.4}  p = {:.3}",
                which.name(),
                r.statistic,
                r.p_value
            );
        }
    }
    Ok(())
}
