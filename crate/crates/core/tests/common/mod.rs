//! Structural properties shared by the property suite and the acceptance
//! run. Each check takes its random inputs as arguments so it can be driven
//! by `proptest!` or by a hand-held `TestRunner`.

#![allow(dead_code)]

use std::sync::OnceLock;

use nalgebra::DMatrix;
use ndarray as nd;
use num_complex::Complex64 as C64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

use conveyor::density::MotionalDensityMatrix;
use conveyor::dephasing::dephasing_matrix;
use conveyor::evolution::{OperatorTables, Propagator};
use conveyor::operators::{boost_operator_exact, frame_transform_exact};
use conveyor::{solve_bound_spectrum, BoundSpectrum, PhysicalParams, SpatialGrid};

pub const N_EFF: usize = 12;
pub const MAX_DV: f64 = 0.02;
pub const ACCEL_FRACTION: f64 = 0.6;
pub const INTERPOLATION_LIMIT: f64 = 1e-6;

pub struct Fixture {
    pub spectrum: BoundSpectrum,
    pub tables: OperatorTables,
}

pub fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let p = PhysicalParams::reference();
        let spectrum = solve_bound_spectrum(&p, &SpatialGrid::default_for(&p)).unwrap();
        let tables = OperatorTables::build(
            &spectrum,
            N_EFF,
            MAX_DV,
            ACCEL_FRACTION * p.max_acceleration(),
            1e-6,
        )
        .unwrap();
        Fixture { spectrum, tables }
    })
}

pub fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0xc0ffee),
        failure_persistence: None,
        ..Config::default()
    }
}

fn max_abs(m: &nd::Array2<C64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

/// A random density matrix `G G† / tr * trace`.
pub fn density_strategy(n: usize) -> impl Strategy<Value = MotionalDensityMatrix> {
    (
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n),
        0.05f64..1.0,
    )
        .prop_map(move |(g, trace)| {
            let g = nd::Array2::from_shape_vec(
                (n, n),
                g.into_iter().map(|(a, b)| C64::new(a, b)).collect(),
            )
            .unwrap();
            let mut rho = g.dot(&g.t().mapv(|c| c.conj()));
            let tr: f64 = rho.diag().iter().map(|c| c.re).sum();
            rho.mapv_inplace(|c| c * (trace / tr));
            // exact Hermiticity
            let h = (&rho + &rho.t().mapv(|c| c.conj())).mapv(|c| c * 0.5);
            MotionalDensityMatrix::from_matrix(h).unwrap()
        })
}

/// Step time and boosts with `|δv| ≤ MAX_DV` and `|a| ≤ ACCEL_FRACTION a_max`.
pub fn schedule_strategy() -> impl Strategy<Value = (f64, Vec<f64>)> {
    (
        3e-7f64..2e-5,
        proptest::collection::vec(-MAX_DV..MAX_DV, 1..40),
    )
}

/// Trace never grows; ρ stays Hermitian and positive semidefinite.
pub fn evolution_invariants(
    rho: MotionalDensityMatrix,
    gamma0: f64,
    dt: f64,
    boosts: &[f64],
) -> Result<(), TestCaseError> {
    let fx = fixture();
    let mut rho = rho;
    let mut prop = Propagator::new(&fx.spectrum, &fx.tables, dt, gamma0)
        .map_err(|e| TestCaseError::fail(e.to_string()))?;
    let mut last = rho.trace();
    for &dv in boosts {
        prop.step(&mut rho, dv)
            .map_err(|e| TestCaseError::fail(e.to_string()))?;
        let tr = rho.trace();
        prop_assert!(tr <= last + 1e-12, "trace grew {last} -> {tr}");
        prop_assert!(
            rho.hermiticity_error() < 1e-12,
            "hermiticity {}",
            rho.hermiticity_error()
        );
        prop_assert!(rho.is_psd_within(1e-10), "lost positivity");
        last = tr;
    }
    Ok(())
}

pub fn dephasing_matrix_is_psd(rates: &[f64], dt: f64) -> Result<(), TestCaseError> {
    let md = dephasing_matrix(rates, dt);
    let n = md.nrows();
    let m = DMatrix::from_fn(n, n, |i, j| md[[i, j]]);
    let min = m.symmetric_eigen().eigenvalues.min();
    prop_assert!(min >= -1e-12, "min eigenvalue {min}");
    Ok(())
}

/// `T_b(0) = T_x(0) = 1` and the basis is orthonormal, for any depth.
pub fn identities_at_zero(depth_uk: f64, n_eff_fraction: f64) -> Result<(), TestCaseError> {
    let p = PhysicalParams::rb87(depth_uk).unwrap();
    let s = solve_bound_spectrum(&p, &SpatialGrid::default_for(&p)).unwrap();
    let n = s.n_bound();
    let n_eff = ((n as f64 * n_eff_fraction).ceil() as usize).clamp(1, n);
    let eye = nd::Array2::<f64>::eye(n);
    let gram_err = (&s.overlap_matrix(n) - &eye)
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    prop_assert!(gram_err < 1e-10, "orthonormality error {gram_err}");
    let eye_c = nd::Array2::<C64>::eye(n_eff);
    let tb = boost_operator_exact(&s, n_eff, 0.0).unwrap();
    prop_assert!(max_abs(&(&tb - &eye_c)) < 1e-10);
    let tx = frame_transform_exact(&s, n_eff, 0.0).unwrap();
    let err = (&tx - &nd::Array2::<f64>::eye(n_eff))
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    prop_assert!(err < 1e-10, "T_x(0) error {err}");
    Ok(())
}

pub fn boost_adjoint_symmetry(dv: f64) -> Result<(), TestCaseError> {
    let s = &fixture().spectrum;
    let plus = boost_operator_exact(s, N_EFF, dv).unwrap();
    let minus = boost_operator_exact(s, N_EFF, -dv).unwrap();
    prop_assert!(max_abs(&(&minus - &plus.t().mapv(|c| c.conj()))) < 1e-14);
    Ok(())
}

/// Tabulated operators stay within the interpolation budget anywhere in range.
pub fn interpolation_error(dv: f64, accel_fraction: f64) -> Result<(), TestCaseError> {
    let fx = fixture();
    let s = &fx.spectrum;
    let exact = boost_operator_exact(s, N_EFF, dv).unwrap();
    let err = max_abs(&(&exact - &fx.tables.boost.boost_at(dv).unwrap()));
    prop_assert!(err <= INTERPOLATION_LIMIT, "boost error {err:.3e} at {dv}");
    let a = accel_fraction * s.params().max_acceleration();
    let exact = frame_transform_exact(s, N_EFF, a).unwrap();
    let err = (&exact - &fx.tables.frame.frame_at(a).unwrap())
        .iter()
        .fold(0.0f64, |m, x| m.max(x.abs()));
    prop_assert!(err <= INTERPOLATION_LIMIT, "frame error {err:.3e} at {a}");
    Ok(())
}
