//! Triangle and sine velocity ramps, their speed limits and the DDS
//! staircase that approximates them.

use conveyor::profiles::{
    discretize, min_transport_time, ProfileKind, Stepping, TripPlan, VelocityProfile,
};
use conveyor::PhysicalParams;

fn main() -> conveyor::Result<()> {
    let params = PhysicalParams::reference();
    let a_max = params.max_acceleration();
    let dx = 0.2e-3;
    for kind in [ProfileKind::Triangle, ProfileKind::Sine] {
        let t_min = min_transport_time(kind, dx, a_max)?;
        let p = VelocityProfile::builtin(kind, dx, 1e-3)?;
        let sched = discretize(&p, &TripPlan::round_trips(10)?, Stepping::UpdateRate(400e3))?;
        println!(
            "{:8}  dt_min {:.4} ms  v_max {:.4} m/s  a_peak {:.3e} m/s^2  steps {}  net displacement {:.2e} m",
            kind.name(),
            t_min * 1e3,
            p.v_max(),
            p.peak_acceleration(),
            sched.len(),
            sched.net_displacement()
        );
    }

    // one traversal at 200 steps, printed as t, v for plotting
    let p = VelocityProfile::sine(dx, 0.5e-3)?;
    let sched = discretize(&p, &TripPlan::one_way(), Stepping::StepsPerTraversal(200))?;
    println!("\n# t_s v_staircase v_profile");
    for (i, v) in sched.cumulative_velocities().iter().enumerate().step_by(10) {
        let t = (i + 1) as f64 * sched.dt();
        println!("{t:.6e} {v:.6e} {:.6e}", p.velocity(t));
    }
    Ok(())
}
