//! The operator engine against the split-step grid propagation, in the
//! coherent limit where both describe the same physics.

use std::time::Instant;

use conveyor::evolution::{evolve, InitialState, OperatorTables, SimulationConfig};
use conveyor::oracle::{propagate_grid, OracleInitial, OracleSettings};
use conveyor::profiles::{
    discretize, min_transport_time, ProfileKind, Stepping, TripPlan, VelocityProfile,
};
use conveyor::{solve_bound_spectrum, PhysicalParams, SpatialGrid};

fn main() -> conveyor::Result<()> {
    let params = PhysicalParams::reference();
    let spectrum = solve_bound_spectrum(&params, &SpatialGrid::default_for(&params))?;
    let dt_min = min_transport_time(ProfileKind::Sine, 0.2e-3, params.max_acceleration())?;
    let n = spectrum.n_bound();
    let config = SimulationConfig {
        n_eff: n,
        gamma0: 0.0,
        initial: InitialState::Ground,
        record_trajectory: false,
    };

    println!(
        "# trip/dt_min  engine_ret oracle_ret  engine_ground oracle_ground  engine_s oracle_s"
    );
    for m in [3.0, 5.0, 10.0] {
        let profile = VelocityProfile::sine(0.2e-3, m * dt_min)?;
        let sched = discretize(
            &profile,
            &TripPlan::one_way(),
            Stepping::StepsPerTraversal(200),
        )?;
        let t = Instant::now();
        let tables = OperatorTables::for_schedules(&spectrum, n, [&sched])?;
        let e = evolve(&config, &spectrum, &sched, &tables)?;
        let te = t.elapsed().as_secs_f64();
        let t = Instant::now();
        let o = propagate_grid(
            &params,
            OracleInitial::Eigenstate(0),
            &sched,
            OracleSettings::default(),
        )?;
        let to = t.elapsed().as_secs_f64();
        println!(
            "{m:5}  {:.5} {:.5}  {:.5} {:.5}  {te:.1} {to:.1}",
            e.retention,
            o.retention,
            e.ground_population,
            o.ground_population()
        );
    }
    Ok(())
}
