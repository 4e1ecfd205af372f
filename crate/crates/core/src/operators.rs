//! Per-step operators in the truncated stationary eigenbasis.

use ndarray as nd;
use num_complex::Complex64 as C64;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::shift::Shifter;
use crate::spectrum::{BoundSpectrum, PhysicalParams};

/// Velocity-boost operator `T_b(i,j) = ∫ ψ_i ψ_j exp(-i m δv z / ħ) dz`.
///
/// The minus sign makes this a boost of the lattice frame rather than of the
/// atom. The matrix is symmetric (real eigenfunctions) and
/// `T_b(-δv) = T_b(δv)†`.
pub fn boost_operator_exact(
    spectrum: &BoundSpectrum,
    n_eff: usize,
    dv: f64,
) -> Result<nd::Array2<C64>> {
    spectrum.check_n_eff(n_eff)?;
    let q = spectrum.params().mass_over_hbar() * dv;
    let grid = spectrum.grid();
    let z = grid.positions();
    let psi = spectrum.states().slice_move(nd::s![..n_eff, ..]);
    let h = grid.spacing();
    let weighted = |f: fn(f64) -> f64| {
        let w = z.mapv(|z| h * f(q * z));
        let scaled = &psi * &w;
        psi.dot(&scaled.t())
    };
    let c = weighted(f64::cos);
    let s = weighted(f64::sin);
    Ok(nd::Zip::from(&c)
        .and(&s)
        .map_collect(|&c, &s| C64::new(c, -s)))
}

/// Diagonal of the free propagator `exp(-i H δt / ħ)`.
pub fn free_propagator(spectrum: &BoundSpectrum, n_eff: usize, dt: f64) -> Result<nd::Array1<C64>> {
    spectrum.check_n_eff(n_eff)?;
    if !(dt >= 0.0 && dt.is_finite()) {
        return Err(Error::Parameter(format!(
            "time step must be non-negative, got {dt}"
        )));
    }
    Ok(spectrum.energies()[..n_eff]
        .iter()
        .map(|e| C64::from_polar(1.0, -e * dt / HBAR))
        .collect())
}

/// Displacement `Δz(a) = -(1/2k) arcsin(m a / (k U0))` of the well minimum
/// under lattice acceleration `a`.
pub fn trap_minimum_shift(params: &PhysicalParams, accel: f64) -> Result<f64> {
    let ratio = accel / params.max_acceleration();
    if !(ratio.abs() <= 1.0) {
        return Err(Error::MaxAccelerationExceeded {
            accel,
            a_max: params.max_acceleration(),
        });
    }
    Ok(-ratio.asin() / (2.0 * params.wavenumber()))
}

/// Inverse of [`trap_minimum_shift`].
pub fn acceleration_for_shift(params: &PhysicalParams, dz: f64) -> f64 {
    -params.max_acceleration() * (2.0 * params.wavenumber() * dz).sin()
}

/// Builds accelerated-frame transforms for one spectrum and truncation.
///
/// Holds the Fourier data of every included eigenfunction so repeated
/// evaluations (operator tables) only pay for the inverse transforms.
pub struct FrameBuilder<'a> {
    spectrum: &'a BoundSpectrum,
    n_eff: usize,
    shifter: Shifter,
}

impl<'a> FrameBuilder<'a> {
    pub fn new(spectrum: &'a BoundSpectrum, n_eff: usize) -> Result<Self> {
        spectrum.check_n_eff(n_eff)?;
        let n = spectrum.grid().n_points();
        let rows: Vec<Vec<f64>> = (0..n_eff).map(|i| spectrum.state(i).to_vec()).collect();
        let shifter = Shifter::new(n, rows.iter().map(|r| r.as_slice()));
        Ok(Self {
            spectrum,
            n_eff,
            shifter,
        })
    }

    /// `T_x(i,j) = ∫ ψ_i(z - Δz) ψ_j(z) dz` for a displacement `dz` (m).
    pub fn at_shift(&self, dz: f64) -> nd::Array2<f64> {
        let grid = self.spectrum.grid();
        let s = dz / grid.spacing();
        let n = grid.n_points();
        let mut displaced = nd::Array2::<f64>::zeros((self.n_eff, n));
        for (i, row) in self.shifter.shifted_all(s).into_iter().enumerate() {
            displaced.row_mut(i).assign(&nd::Array1::from(row));
        }
        let psi = self.spectrum.states().slice_move(nd::s![..self.n_eff, ..]);
        displaced.dot(&psi.t()) * grid.spacing()
    }

    pub fn at_acceleration(&self, accel: f64) -> Result<nd::Array2<f64>> {
        let dz = trap_minimum_shift(self.spectrum.params(), accel)?;
        Ok(self.at_shift(dz))
    }
}

/// Overlap matrix between the displaced and the stationary eigenbasis.
pub fn frame_transform_exact(
    spectrum: &BoundSpectrum,
    n_eff: usize,
    accel: f64,
) -> Result<nd::Array2<f64>> {
    let dz = trap_minimum_shift(spectrum.params(), accel)?;
    Ok(FrameBuilder::new(spectrum, n_eff)?.at_shift(dz))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SpatialGrid;

    fn spectrum() -> BoundSpectrum {
        let p = PhysicalParams::reference();
        BoundSpectrum::compute(&p, &SpatialGrid::default_for(&p)).unwrap()
    }

    fn max_dev_from_identity<T: Copy>(m: &nd::Array2<T>, abs: impl Fn(T, bool) -> f64) -> f64 {
        m.indexed_iter()
            .map(|((i, j), &x)| abs(x, i == j))
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_arguments_give_identity() {
        let s = spectrum();
        let tb = boost_operator_exact(&s, 28, 0.0).unwrap();
        assert!(
            max_dev_from_identity(&tb, |x, d| (x - if d {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            })
            .norm())
                < 1e-12
        );
        let tx = frame_transform_exact(&s, 28, 0.0).unwrap();
        assert!(max_dev_from_identity(&tx, |x, d| (x - if d { 1.0 } else { 0.0 }).abs()) < 1e-12);
        let tf = free_propagator(&s, 28, 0.0).unwrap();
        assert!(tf.iter().all(|c| (c - C64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn boost_adjoint_symmetry() {
        let s = spectrum();
        let a = boost_operator_exact(&s, 20, 0.013).unwrap();
        let b = boost_operator_exact(&s, 20, -0.013).unwrap();
        for ((i, j), x) in a.indexed_iter() {
            assert!((x - b[[j, i]].conj()).norm() < 1e-14);
        }
    }

    #[test]
    fn free_propagator_phases() {
        let s = spectrum();
        let tf = free_propagator(&s, 28, 3.7e-6).unwrap();
        assert!(tf.iter().all(|c| (c.norm() - 1.0).abs() < 1e-12));
        let period = 2.0 * std::f64::consts::PI * HBAR / s.ground_spacing();
        let tf = free_propagator(&s, 2, period).unwrap();
        let rel = (tf[0] / tf[1]).arg();
        assert!(rel.abs() < 1e-9, "relative phase {rel}");
        assert!(free_propagator(&s, 2, -1.0).is_err());
        assert!(free_propagator(&s, 40, 1e-6).is_err());
    }

    #[test]
    fn trap_shift_limits() {
        let p = PhysicalParams::reference();
        let a_max = p.max_acceleration();
        assert_eq!(trap_minimum_shift(&p, 0.0).unwrap(), 0.0);
        let dz = trap_minimum_shift(&p, a_max).unwrap();
        assert!((dz + p.wavelength() / 8.0).abs() < 1e-20);
        assert!(trap_minimum_shift(&p, 0.3 * a_max).unwrap() < 0.0);
        assert!(trap_minimum_shift(&p, -0.3 * a_max).unwrap() > 0.0);
        assert!(matches!(
            trap_minimum_shift(&p, 1.1 * a_max),
            Err(Error::MaxAccelerationExceeded { .. })
        ));
        let a = 0.42 * a_max;
        let back = acceleration_for_shift(&p, trap_minimum_shift(&p, a).unwrap());
        assert!((back - a).abs() < 1e-9 * a_max);
    }

    #[test]
    fn frame_columns_are_subnormalized() {
        let s = spectrum();
        for frac in [-0.9, -0.5, 0.2, 0.5, 1.0] {
            let tx = frame_transform_exact(&s, 28, frac * s.params().max_acceleration()).unwrap();
            for col in tx.columns() {
                assert!(col.dot(&col).sqrt() <= 1.0 + 1e-9);
            }
        }
    }
}
