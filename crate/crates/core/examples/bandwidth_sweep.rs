//! Nonparametric-mode rejection rate as a function of the bandwidth multiplier.

use dcov_hetero::report::sweep_csv;
use dcov_hetero::simlab::{bandwidth_sweep, Model, SimulationScenario, DEFAULT_C_GRID};

fn main() -> dcov_hetero::Result<()> {
    let mut scn = SimulationScenario::new(Model::H21, 50, 2, 2.0, 7);
    scn.reps = 40;
    scn.bootstrap_b = 99;
    let points = bandwidth_sweep(&scn, &DEFAULT_C_GRID)?;
    print!("{}", sweep_csv(&points));
    Ok(())
}
