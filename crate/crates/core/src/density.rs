//! Motional density matrices in the truncated stationary eigenbasis.

use ndarray as nd;
use num_complex::Complex64 as C64;

use crate::constants::K_B;
use crate::error::{Error, Result};
use crate::spectrum::BoundSpectrum;

/// `ρ` over the lowest `n_eff` bound states. The trace is the probability
/// that the atom is still trapped.
#[derive(Clone, Debug, PartialEq)]
pub struct MotionalDensityMatrix {
    rho: nd::Array2<C64>,
}

impl MotionalDensityMatrix {
    /// Wrap a matrix, checking shape, Hermiticity (1e-12) and trace.
    pub fn from_matrix(rho: nd::Array2<C64>) -> Result<Self> {
        if !rho.is_square() || rho.nrows() == 0 {
            return Err(Error::Parameter(
                "density matrix must be square and non-empty".into(),
            ));
        }
        let m = Self { rho };
        if m.hermiticity_error() > 1e-12 {
            return Err(Error::Parameter("density matrix is not Hermitian".into()));
        }
        let tr = m.trace();
        if !(0.0..=1.0 + 1e-12).contains(&tr) {
            return Err(Error::Parameter(format!(
                "density matrix trace {tr} outside [0, 1]"
            )));
        }
        Ok(m)
    }

    pub fn from_populations(p: &[f64]) -> Result<Self> {
        Self::from_matrix(nd::Array2::from_diag(
            &p.iter()
                .map(|&x| C64::new(x, 0.0))
                .collect::<nd::Array1<_>>(),
        ))
    }

    /// Pure motional ground state.
    pub fn ground(n_eff: usize) -> Self {
        let mut rho = nd::Array2::zeros((n_eff, n_eff));
        rho[[0, 0]] = C64::new(1.0, 0.0);
        Self { rho }
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &nd::Array2<C64> {
        &self.rho
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut nd::Array2<C64> {
        &mut self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.diag().iter().map(|c| c.re).sum()
    }

    /// Absolute level populations (diagonal of `ρ`).
    pub fn populations(&self) -> Vec<f64> {
        self.rho.diag().iter().map(|c| c.re).collect()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                err = err.max((self.rho[[i, j]] - self.rho[[j, i]].conj()).norm());
            }
        }
        err
    }

    /// Replace `ρ` by its Hermitian part.
    pub(crate) fn symmetrize(&mut self) {
        let n = self.dim();
        for i in 0..n {
            self.rho[[i, i]].im = 0.0;
            for j in i + 1..n {
                let avg = 0.5 * (self.rho[[i, j]] + self.rho[[j, i]].conj());
                self.rho[[i, j]] = avg;
                self.rho[[j, i]] = avg.conj();
            }
        }
    }

    /// True if `ρ + tol·I` admits a Cholesky factorization, i.e. the
    /// smallest eigenvalue is at least `-tol` (up to rounding).
    pub fn is_psd_within(&self, tol: f64) -> bool {
        is_psd_within(&self.rho, tol)
    }

    /// Mean energy of the normalized state, measured from `E_1` (J).
    pub fn mean_excitation(&self, spectrum: &BoundSpectrum) -> Result<f64> {
        let tr = self.trace();
        if tr <= 0.0 {
            return Err(Error::Parameter(
                "empty density matrix has no mean energy".into(),
            ));
        }
        let e = spectrum.energies();
        Ok(self
            .populations()
            .iter()
            .zip(e)
            .map(|(p, ei)| p * (ei - e[0]))
            .sum::<f64>()
            / tr)
    }
}

/// Cholesky test of `m + tol·I` for a Hermitian matrix.
pub fn is_psd_within(m: &nd::Array2<C64>, tol: f64) -> bool {
    let n = m.nrows();
    let mut l = nd::Array2::<C64>::zeros((n, n));
    for j in 0..n {
        let mut d = m[[j, j]].re + tol;
        for k in 0..j {
            d -= l[[j, k]].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        l[[j, j]] = C64::new(d, 0.0);
        for i in j + 1..n {
            let mut s = m[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]].conj();
            }
            l[[i, j]] = s / d;
        }
    }
    true
}

/// Boltzmann populations over the lowest `n_eff` levels at temperature `t`,
/// normalized over those levels.
pub fn boltzmann_populations(energies: &[f64], t: f64) -> Vec<f64> {
    let e0 = energies[0];
    let w: Vec<f64> = energies
        .iter()
        .map(|e| (-(e - e0) / (K_B * t)).exp())
        .collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Thermal initial state, diagonal in the eigenbasis.
pub fn thermal_state(
    spectrum: &BoundSpectrum,
    n_eff: usize,
    temperature: f64,
) -> Result<MotionalDensityMatrix> {
    spectrum.check_n_eff(n_eff)?;
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::Parameter(format!(
            "temperature must be positive, got {temperature}"
        )));
    }
    MotionalDensityMatrix::from_populations(&boltzmann_populations(
        &spectrum.energies()[..n_eff],
        temperature,
    ))
}

/// Bisection bracket for the effective temperature (K).
pub const T_EFF_MIN: f64 = 1e-9;
pub const T_EFF_MAX: f64 = 1e-1;
const T_EFF_RTOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveTemperature {
    pub kelvin: f64,
    /// The mean energy lies at or beyond what the bracket can represent.
    pub saturated: bool,
}

fn boltzmann_mean(excitations: &[f64], t: f64) -> f64 {
    let mut z = 0.0;
    let mut s = 0.0;
    for &e in excitations {
        let w = (-e / (K_B * t)).exp();
        z += w;
        s += w * e;
    }
    s / z
}

/// Temperature whose Boltzmann distribution over the same levels has the
/// mean energy of the (renormalized) state.
pub fn effective_temperature(
    rho: &MotionalDensityMatrix,
    spectrum: &BoundSpectrum,
) -> Result<EffectiveTemperature> {
    let tr = rho.trace();
    if !(tr > 1e-6) {
        return Err(Error::Parameter(format!(
            "trace {tr:.3e} too small for a temperature"
        )));
    }
    let n = rho.dim();
    let e = &spectrum.energies()[..n];
    let excitations: Vec<f64> = e.iter().map(|x| x - e[0]).collect();
    let target = rho.mean_excitation(spectrum)?;
    if target <= boltzmann_mean(&excitations, T_EFF_MIN) {
        return Ok(EffectiveTemperature {
            kelvin: T_EFF_MIN,
            saturated: false,
        });
    }
    if target >= boltzmann_mean(&excitations, T_EFF_MAX) {
        return Ok(EffectiveTemperature {
            kelvin: T_EFF_MAX,
            saturated: true,
        });
    }
    let (mut lo, mut hi) = (T_EFF_MIN, T_EFF_MAX);
    while hi / lo - 1.0 > T_EFF_RTOL * 0.1 {
        let mid = (lo * hi).sqrt();
        if boltzmann_mean(&excitations, mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(EffectiveTemperature {
        kelvin: (lo * hi).sqrt(),
        saturated: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{PhysicalParams, SpatialGrid};

    fn spectrum() -> BoundSpectrum {
        let p = PhysicalParams::reference();
        BoundSpectrum::compute(&p, &SpatialGrid::default_for(&p)).unwrap()
    }

    #[test]
    fn cold_limit_is_ground_state() {
        let s = spectrum();
        let rho = thermal_state(&s, 28, 1e-9).unwrap();
        assert!((rho.populations()[0] - 1.0).abs() < 1e-12);
        assert!((rho.trace() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn degenerate_levels_share_evenly() {
        let p = boltzmann_populations(&[1.0, 1.0, 1.0, 1.0], 1e-5);
        assert!(p.iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }

    #[test]
    fn temperature_round_trip() {
        let s = spectrum();
        for t in [5e-6, 40e-6, 150e-6] {
            let rho = thermal_state(&s, 28, t).unwrap();
            let est = effective_temperature(&rho, &s).unwrap();
            assert!(!est.saturated);
            assert!((est.kelvin / t - 1.0).abs() < 1e-3, "{t}: {}", est.kelvin);
        }
        let g = effective_temperature(&MotionalDensityMatrix::ground(28), &s).unwrap();
        assert!(g.kelvin < 1e-6);
    }

    #[test]
    fn saturation_is_flagged() {
        let s = spectrum();
        let mut p = vec![0.0; 28];
        p[27] = 1.0;
        let rho = MotionalDensityMatrix::from_populations(&p).unwrap();
        assert!(effective_temperature(&rho, &s).unwrap().saturated);
        let empty = MotionalDensityMatrix::from_populations(&[0.0; 28]).unwrap();
        assert!(effective_temperature(&empty, &s).is_err());
    }

    #[test]
    fn psd_check() {
        let mut m = nd::Array2::<C64>::zeros((2, 2));
        m[[0, 0]] = C64::new(0.5, 0.0);
        m[[1, 1]] = C64::new(0.5, 0.0);
        m[[0, 1]] = C64::new(0.0, 0.5);
        m[[1, 0]] = C64::new(0.0, -0.5);
        assert!(is_psd_within(&m, 1e-12));
        m[[0, 1]] = C64::new(0.0, 0.6);
        m[[1, 0]] = C64::new(0.0, -0.6);
        assert!(!is_psd_within(&m, 1e-12));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = nd::Array2::<C64>::zeros((2, 2));
        m[[0, 1]] = C64::new(0.1, 0.0);
        assert!(MotionalDensityMatrix::from_matrix(m).is_err());
        assert!(thermal_state(&spectrum(), 28, 0.0).is_err());
    }
}
