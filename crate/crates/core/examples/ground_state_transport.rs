//! Ground-state survival after one traversal, sine against triangle.

use std::f64::consts::PI;

use conveyor::evolution::{evolve, InitialState, OperatorTables, SimulationConfig};
use conveyor::profiles::{
    discretize, min_transport_time, ProfileKind, Stepping, TripPlan, VelocityProfile,
};
use conveyor::{solve_bound_spectrum, PhysicalParams, SpatialGrid};

fn main() -> conveyor::Result<()> {
    let params = PhysicalParams::reference();
    let spectrum = solve_bound_spectrum(&params, &SpatialGrid::default_for(&params))?;
    let dt_min = min_transport_time(ProfileKind::Sine, 0.2e-3, params.max_acceleration())?;
    let trips: Vec<f64> = [1.5, 2.0, 3.0, 4.0, 6.0, 9.0]
        .iter()
        .map(|m| m * dt_min)
        .collect();
    let config = SimulationConfig {
        n_eff: 28,
        gamma0: 2.0 * PI * 1.67e3,
        initial: InitialState::Ground,
        record_trajectory: false,
    };

    println!("# trip_ms profile ground_pop t_eff_uK");
    for kind in [ProfileKind::Sine, ProfileKind::Triangle] {
        let schedules = trips
            .iter()
            .map(|&t| {
                discretize(
                    &VelocityProfile::builtin(kind, 0.2e-3, t)?,
                    &TripPlan::one_way(),
                    Stepping::StepsPerTraversal(200),
                )
            })
            .collect::<conveyor::Result<Vec<_>>>()?;
        let tables = OperatorTables::for_schedules(&spectrum, config.n_eff, &schedules)?;
        for (t, s) in trips.iter().zip(&schedules) {
            let r = evolve(&config, &spectrum, s, &tables)?;
            let t_eff = r.effective_temperature_kelvin().unwrap_or(f64::NAN) * 1e6;
            println!(
                "{:.4} {:8} {:.4} {:.2}",
                t * 1e3,
                kind.name(),
                r.ground_population,
                t_eff
            );
        }
    }
    Ok(())
}
