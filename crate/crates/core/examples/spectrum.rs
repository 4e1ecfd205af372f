//! Bound states of one lattice well and the derived trap constants.
//!
//! `cargo run --release --example spectrum -- 254`

use conveyor::constants::K_B;
use conveyor::spectrum::refinement_drift;
use conveyor::{solve_bound_spectrum, trap_constants, PhysicalParams, SpatialGrid};

fn main() -> conveyor::Result<()> {
    let depth_uk: f64 = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(254.0);
    let params = PhysicalParams::rb87(depth_uk)?;
    let grid = SpatialGrid::default_for(&params);
    let spectrum = solve_bound_spectrum(&params, &grid)?;
    let c = trap_constants(&params);

    println!("U0 / k_B = {depth_uk} uK");
    println!("f_trap   = {:.3} kHz", c.f_trap / 1e3);
    println!("a_max    = {:.5e} m/s^2", c.a_max);
    println!("N        = {}", spectrum.n_bound());

    let fine = solve_bound_spectrum(&params, &grid.refined())?;
    let drift = refinement_drift(&spectrum, &fine);
    println!(
        "worst drift under 2x refinement: {:.2e}",
        drift.iter().fold(0.0f64, |m, &d| m.max(d))
    );

    let hw = c.omega0 * conveyor::constants::HBAR;
    println!("\n  i   E_i (uK)   E_i - E_(i-1) (uK)   spacing / hbar w0");
    let e = spectrum.energies();
    for (i, &ei) in e.iter().enumerate() {
        let gap = if i == 0 { f64::NAN } else { ei - e[i - 1] };
        println!(
            "{:3} {:10.3} {:14.3} {:18.4}",
            i + 1,
            ei / K_B * 1e6,
            gap / K_B * 1e6,
            gap / hw
        );
    }
    Ok(())
}
