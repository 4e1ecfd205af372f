//! One thermal transport run with the per-step trajectory written as CSV.
//!
//! `cargo run --release --example thermal_transport -- 300 > traj.csv`
//! (argument: DDS update rate in kHz)

use std::f64::consts::PI;

use conveyor::evolution::{evolve, InitialState, OperatorTables, SimulationConfig};
use conveyor::profiles::{discretize, Stepping, TripPlan, VelocityProfile};
use conveyor::{solve_bound_spectrum, PhysicalParams, SpatialGrid};

fn main() -> conveyor::Result<()> {
    let f_dds_khz: f64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(300.0);
    let params = PhysicalParams::reference();
    let spectrum = solve_bound_spectrum(&params, &SpatialGrid::default_for(&params))?;
    let profile = VelocityProfile::sine(0.2e-3, 1e-3)?;
    let schedule = discretize(
        &profile,
        &TripPlan::round_trips(10)?,
        Stepping::UpdateRate(f_dds_khz * 1e3),
    )?;
    let config = SimulationConfig {
        n_eff: 28,
        gamma0: 2.0 * PI * 1.67e3,
        initial: InitialState::Thermal(40e-6),
        record_trajectory: true,
    };
    let tables = OperatorTables::for_schedules(&spectrum, config.n_eff, [&schedule])?;
    let r = evolve(&config, &spectrum, &schedule, &tables)?;
    eprintln!(
        "f_DDS {f_dds_khz} kHz, {} steps: retention {:.4}, T_eff {:.1} uK, ground {:.4}",
        schedule.len(),
        r.retention,
        r.effective_temperature_kelvin().unwrap_or(f64::NAN) * 1e6,
        r.ground_population
    );
    r.write_trajectory_csv(std::io::stdout().lock())
}
