//! Bound-state count and low-lying levels from two independent routes: the
//! inertia of a fine-grid finite-difference Hamiltonian, and Numerov
//! shooting with node counting.

use conveyor::constants::{HBAR, K_B};
use conveyor::spectrum::potential_at;
use conveyor::{solve_bound_spectrum, PhysicalParams, SpatialGrid};

/// Bound states at the reference parameters, frozen from both oracles below.
const N_BOUND: usize = 33;
/// `E_2 - E_1` in μK, frozen from Numerov shooting.
const SPACING_UK: f64 = 9.84538;

/// Eigenvalues of the Dirichlet FD Hamiltonian below `e`, by the signs of
/// the LDLᵀ pivots of `H - e`.
fn fd_count_below(p: &PhysicalParams, half_width: f64, n: usize, e: f64) -> usize {
    let h = 2.0 * half_width / (n - 1) as f64;
    let c = HBAR * HBAR / (2.0 * p.atomic_mass() * h * h);
    let mut count = 0;
    let mut q = 1.0;
    for j in 1..n - 1 {
        let z = -half_width + j as f64 * h;
        let d = 2.0 * c + potential_at(p, z) - e;
        q = if j == 1 { d } else { d - c * c / q };
        if q == 0.0 {
            q = -1e-300;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Nodes of the Numerov solution from the left wall at energy `e`, and its
/// value at the right wall.
fn numerov(p: &PhysicalParams, half_width: f64, n: usize, e: f64) -> (usize, f64) {
    let h = 2.0 * half_width / (n - 1) as f64;
    let k2 = |z: f64| 2.0 * p.atomic_mass() * (e - potential_at(p, z)) / (HBAR * HBAR);
    let f = |z: f64| 1.0 + h * h * k2(z) / 12.0;
    let z = |j: usize| -half_width + j as f64 * h;
    let (mut y0, mut y1) = (0.0, 1e-30);
    let mut nodes = 0;
    for j in 1..n - 1 {
        let y2 = ((12.0 - 10.0 * f(z(j))) * y1 - f(z(j - 1)) * y0) / f(z(j + 1));
        if j + 1 < n - 1 && y2 * y1 < 0.0 {
            nodes += 1;
        }
        // keep the amplitude in range through the classically forbidden tail
        let scale = if y2.abs() > 1e200 { 1e-200 } else { 1.0 };
        y0 = y1 * scale;
        y1 = y2 * scale;
    }
    (nodes, y1)
}

/// Level `i` (0-based) by bisection on the Numerov node count.
fn numerov_level(p: &PhysicalParams, half_width: f64, n: usize, i: usize) -> f64 {
    let (mut lo, mut hi) = (-p.trap_depth(), 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (nodes, end) = numerov(p, half_width, n, mid);
        // below the i-th level there are at most i nodes with the tail not yet crossed
        let below = nodes + usize::from(end * if nodes % 2 == 0 { 1.0 } else { -1.0 } < 0.0);
        if below <= i {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn bound_state_count_three_ways() {
    let p = PhysicalParams::reference();
    let grid = SpatialGrid::default_for(&p);
    let fine = 4 * (grid.n_points() - 1) + 1;
    assert_eq!(fd_count_below(&p, grid.half_width(), fine, 0.0), N_BOUND);
    let (nodes, _) = numerov(&p, grid.half_width(), fine, -1e-9 * p.trap_depth());
    assert_eq!(nodes, N_BOUND);
    assert_eq!(solve_bound_spectrum(&p, &grid).unwrap().n_bound(), N_BOUND);
}

#[test]
fn low_levels_match_numerov() {
    let p = PhysicalParams::reference();
    let grid = SpatialGrid::default_for(&p);
    let fine = 4 * (grid.n_points() - 1) + 1;
    let s = solve_bound_spectrum(&p, &grid).unwrap();
    let e: Vec<f64> = (0..3)
        .map(|i| numerov_level(&p, grid.half_width(), fine, i))
        .collect();
    let spacing_uk = (e[1] - e[0]) / K_B * 1e6;
    assert!((spacing_uk - SPACING_UK).abs() < 1e-4, "{spacing_uk}");
    let engine_uk = s.ground_spacing() / K_B * 1e6;
    assert!((engine_uk / SPACING_UK - 1.0).abs() < 1e-4, "{engine_uk}");
    for i in 0..3 {
        let depth = p.trap_depth();
        let rel = (s.energies()[i] - e[i]).abs() / (e[i] + depth);
        assert!(rel < 1e-4, "level {i}: {rel:.2e}");
    }
}
