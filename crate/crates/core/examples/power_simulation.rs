//! Small Monte Carlo size/power table with seeds coupled across `a`.
//!
//! Desk-scale settings are 300 replications with B = 300; this example uses
//! far fewer so it finishes in seconds.

use dcov_hetero::report::power_table_markdown;
use dcov_hetero::simlab::{monte_carlo_grid, Model, SimulationScenario, TestKind};

fn main() -> dcov_hetero::Result<()> {
    let mut scn = SimulationScenario::new(Model::H21, 50, 2, 0.0, 2026);
    scn.reps = 60;
    scn.bootstrap_b = 99;
    scn.tests = TestKind::ALL.to_vec();

    let table = monte_carlo_grid(&scn, &[0.0, 1.0, 2.5])?;
    print!("{}", power_table_markdown(&table));
    for row in &table.rows {
        println!(
            "{} a={} rate={:.3} se={:.3}",
            row.test.name(),
            row.a,
            row.rate(),
            row.se()
        );
    }
    Ok(())
}
