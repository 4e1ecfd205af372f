//! State-dependent dephasing.
//!
//! Each level dephases at a rate that grows with its departure from the
//! harmonic spacing `ħω0`; the most anharmonic included level gets `2γ0`.
//! Coherences `ρ_ij` decay by `exp(-(γ_i + γ_j) δt / 2)` per step.

use ndarray as nd;

use crate::constants::HBAR;
use crate::error::{Error, Result};
use crate::spectrum::BoundSpectrum;

/// Per-level dephasing rates (rad/s) for the lowest `n_eff` states.
///
/// Levels above the ground state use the spacing deficit
/// `ħω0 - (E_i - E_{i-1})`; the ground state uses `ħω0 - 2E_1` with `E_1`
/// measured from the bottom of the well. All are normalized by the largest
/// spacing deficit among the included excited levels.
pub fn dephasing_rates(spectrum: &BoundSpectrum, n_eff: usize, gamma0: f64) -> Result<Vec<f64>> {
    spectrum.check_n_eff(n_eff)?;
    if n_eff < 2 {
        return Err(Error::Parameter("dephasing rates need n_eff >= 2".into()));
    }
    if !(gamma0 >= 0.0 && gamma0.is_finite()) {
        return Err(Error::Parameter(format!(
            "gamma0 must be non-negative, got {gamma0}"
        )));
    }
    let params = spectrum.params();
    let hw = HBAR * params.harmonic_angular_frequency();
    let e = spectrum.energies();
    let mut numerators = Vec::with_capacity(n_eff);
    numerators.push(hw - 2.0 * (e[0] + params.trap_depth()));
    numerators.extend((1..n_eff).map(|i| hw - e[i] + e[i - 1]));
    let max = numerators[1..]
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) {
        return Err(Error::Parameter(
            "level spacings are not compressed below ħω0".into(),
        ));
    }
    Ok(numerators
        .iter()
        .map(|n| 2.0 * gamma0 * n.max(0.0) / max)
        .collect())
}

/// Coherence decay factors `d_i = exp(-γ_i δt / 2)`.
pub fn decay_factors(rates: &[f64], dt: f64) -> Vec<f64> {
    rates.iter().map(|g| (-g * dt / 2.0).exp()).collect()
}

/// `M_d(i,j) = exp(-(γ_i + γ_j) δt / 2)` off the diagonal, 1 on it.
pub fn dephasing_matrix(rates: &[f64], dt: f64) -> nd::Array2<f64> {
    let d = decay_factors(rates, dt);
    let n = d.len();
    nd::Array2::from_shape_fn((n, n), |(i, j)| if i == j { 1.0 } else { d[i] * d[j] })
}
