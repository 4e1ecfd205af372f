//! A small declarative sweep over the DDS update rate, written as CSV.
//! The full-size scenario ships as the `fig3a` preset of the `conveyor` bin.

use conveyor::sweep::{run_scenario, validate_config, write_csv, RunOptions};

const SCENARIO: &str = "
kind = fdds_sweep
trap_depth_uK = 254
n_eff = 20
gamma0_over_2pi_kHz = 1.67
temperature_uK = 40
profiles = sine
distance_mm = 0.2
n_traversals = 4
trip_time_ms = 1
axis_fdds_kHz = linspace(150, 450, 13)
";

fn main() -> conveyor::Result<()> {
    let scenario = validate_config(SCENARIO)?;
    let result = run_scenario(&scenario, &RunOptions::default())?;
    write_csv(&result, std::io::stdout().lock())
}
