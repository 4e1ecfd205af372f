//! Dephasing rate from the transverse depth excursion, with both amplitude
//! conventions and a scan over the atom temperature.

use std::f64::consts::PI;

use conveyor::gamma0::{estimate_gamma0, Amplitude, TransverseParams};
use conveyor::PhysicalParams;

fn main() -> conveyor::Result<()> {
    let params = PhysicalParams::reference();
    let omega_r = 2.0 * PI * 1.6e3;
    for amplitude in [Amplitude::FullDifference, Amplitude::HalfDifference] {
        let g = estimate_gamma0(&params, TransverseParams::new(omega_r, 40e-6)?, amplitude)?;
        println!(
            "{amplitude:?}: tau = {:.2} us, gamma0/2pi = {:.3} kHz",
            g.tau * 1e6,
            g.gamma0 / (2.0 * PI) / 1e3
        );
    }
    println!("\n# T_uK gamma0_over_2pi_kHz");
    for t_uk in [5.0, 10.0, 20.0, 40.0, 80.0, 160.0] {
        let g = estimate_gamma0(
            &params,
            TransverseParams::new(omega_r, t_uk * 1e-6)?,
            Amplitude::default(),
        )?;
        println!("{t_uk} {:.4}", g.gamma0 / (2.0 * PI) / 1e3);
    }
    Ok(())
}
