//! Tabulated boost and frame operators: how many nodes the adaptive build
//! needs and how far interpolation strays from the exact operators.

use std::time::Instant;

use conveyor::operators::{boost_operator_exact, frame_transform_exact};
use conveyor::table::{OperatorTable, TableKind, DEFAULT_SAMPLES, DEFAULT_TOLERANCE};
use conveyor::{solve_bound_spectrum, PhysicalParams, SpatialGrid};

fn main() -> conveyor::Result<()> {
    let params = PhysicalParams::reference();
    let spectrum = solve_bound_spectrum(&params, &SpatialGrid::default_for(&params))?;
    let n_eff = 28;
    let a_max = params.max_acceleration();

    let t = Instant::now();
    let boost = OperatorTable::build_adaptive(
        &spectrum,
        n_eff,
        TableKind::Boost,
        0.02,
        DEFAULT_SAMPLES,
        DEFAULT_TOLERANCE,
    )?;
    println!(
        "boost: |dv| <= 0.02 m/s, {} nodes, probe error {:.2e} ({:.1?})",
        boost.n_samples(),
        boost.worst_probe_error(),
        t.elapsed()
    );
    let t = Instant::now();
    let frame = OperatorTable::build_adaptive(
        &spectrum,
        n_eff,
        TableKind::Frame,
        0.9 * a_max,
        DEFAULT_SAMPLES,
        DEFAULT_TOLERANCE,
    )?;
    println!(
        "frame: |a| <= 0.9 a_max, {} nodes, probe error {:.2e} ({:.1?})",
        frame.n_samples(),
        frame.worst_probe_error(),
        t.elapsed()
    );

    let dv = 0.0123;
    let exact = boost_operator_exact(&spectrum, n_eff, dv)?;
    let table = boost.boost_at(dv)?;
    let err = (&exact - &table)
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    println!("T_b({dv}) table vs exact: {err:.2e}");

    // Unitarity is lost only through truncation, so it degrades toward the top levels.
    let tb_dag_tb = exact.t().mapv(|c| c.conj()).dot(&exact);
    println!(
        "diag(T_b^H T_b): first {:.6}, last {:.6}",
        tb_dag_tb[[0, 0]].re,
        tb_dag_tb[[n_eff - 1, n_eff - 1]].re
    );

    let a = 0.5 * a_max;
    let exact = frame_transform_exact(&spectrum, n_eff, a)?;
    let err = (&exact - &frame.frame_at(a)?)
        .iter()
        .map(|x| x.abs())
        .fold(0.0, f64::max);
    println!(
        "T_x(a_max/2) table vs exact: {err:.2e}, <1|1'> = {:.6}",
        exact[[0, 0]]
    );
    Ok(())
}
