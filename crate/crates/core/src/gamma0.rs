//! Order-of-magnitude estimate of the dephasing parameter from transverse
//! motion.
//!
//! Transverse oscillation at `ω_r` makes the effective depth swing between
//! `U0 ∓ k_B T/2`, so the longitudinal frequency wanders as
//! `Δω(t) = Δω0 sin(2 ω_r t)`. The coherence time `τ` is where the
//! accumulated phase `∫ |Δω| dt` reaches `π`; then `γ0 ≈ 1/τ`.

use std::f64::consts::PI;

use crate::constants::K_B;
use crate::error::{Error, Result};
use crate::spectrum::PhysicalParams;

/// Give up after this many transverse periods.
pub const MAX_PERIODS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransverseParams {
    /// Transverse angular frequency `ω_r` (rad/s).
    pub omega_r: f64,
    /// Atom temperature (K).
    pub temperature: f64,
}

impl TransverseParams {
    pub fn new(omega_r: f64, temperature: f64) -> Result<Self> {
        if !(omega_r > 0.0 && omega_r.is_finite())
            || !(temperature > 0.0 && temperature.is_finite())
        {
            return Err(Error::Parameter(
                "transverse frequency and temperature must be positive".into(),
            ));
        }
        Ok(Self {
            omega_r,
            temperature,
        })
    }
}

/// How the frequency excursion maps to the oscillation amplitude.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Amplitude {
    /// `Δω0 = ω_max - ω_min`.
    #[default]
    FullDifference,
    /// `Δω0 = (ω_max - ω_min) / 2`.
    HalfDifference,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DepthExcursion {
    pub u_min: f64,
    pub u_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub delta_omega0: f64,
}

pub fn depth_excursion(params: &PhysicalParams, temperature: f64) -> Result<DepthExcursion> {
    if !(temperature >= 0.0 && temperature.is_finite()) {
        return Err(Error::Parameter(format!(
            "temperature must be non-negative, got {temperature}"
        )));
    }
    let half = K_B * temperature / 2.0;
    let u0 = params.trap_depth();
    if half >= u0 {
        return Err(Error::Parameter(format!(
            "k_B T / 2 = {:.3e} J leaves no trap depth (U0 = {u0:.3e} J)",
            half
        )));
    }
    let omega = |u: f64| params.wavenumber() * (2.0 * u / params.atomic_mass()).sqrt();
    let (u_min, u_max) = (u0 - half, u0 + half);
    let (omega_min, omega_max) = (omega(u_min), omega(u_max));
    Ok(DepthExcursion {
        u_min,
        u_max,
        omega_min,
        omega_max,
        delta_omega0: omega_max - omega_min,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Gamma0Estimate {
    pub excursion: DepthExcursion,
    /// Amplitude actually used for `Δω(t)` (rad/s).
    pub amplitude: f64,
    /// Coherence time (s).
    pub tau: f64,
    /// `1/τ` (rad/s).
    pub gamma0: f64,
}

/// `∫_0^τ A |sin(2 ω_r t)| dt`.
pub fn accumulated_phase(amplitude: f64, omega_r: f64, tau: f64) -> f64 {
    let arch = PI / (2.0 * omega_r);
    let full = (tau / arch).floor();
    let rest = tau - full * arch;
    amplitude / omega_r * full + amplitude / (2.0 * omega_r) * (1.0 - (2.0 * omega_r * rest).cos())
}

/// Smallest `τ` with accumulated phase `π`, inverted arch by arch.
pub fn coherence_time(amplitude: f64, omega_r: f64) -> Result<f64> {
    if !(amplitude > 0.0) {
        return Err(Error::Divergence {
            periods: MAX_PERIODS,
        });
    }
    let per_arch = amplitude / omega_r;
    let full = (PI / per_arch).floor();
    // 4 arches per transverse period
    if full >= (4 * MAX_PERIODS) as f64 {
        return Err(Error::Divergence {
            periods: MAX_PERIODS,
        });
    }
    let mut rest = PI - full * per_arch;
    let mut arches = full;
    if rest <= 0.0 {
        // the target sits exactly on an arch boundary
        arches -= 1.0;
        rest += per_arch;
    }
    let x = (1.0 - 2.0 * omega_r * rest / amplitude).clamp(-1.0, 1.0);
    let within = x.acos() / (2.0 * omega_r);
    Ok(arches * PI / (2.0 * omega_r) + within)
}

pub fn estimate_gamma0(
    params: &PhysicalParams,
    transverse: TransverseParams,
    amplitude: Amplitude,
) -> Result<Gamma0Estimate> {
    let excursion = depth_excursion(params, transverse.temperature)?;
    let amp = match amplitude {
        Amplitude::FullDifference => excursion.delta_omega0,
        Amplitude::HalfDifference => excursion.delta_omega0 / 2.0,
    };
    let tau = coherence_time(amp, transverse.omega_r)?;
    Ok(Gamma0Estimate {
        excursion,
        amplitude: amp,
        tau,
        gamma0: 1.0 / tau,
    })
}
