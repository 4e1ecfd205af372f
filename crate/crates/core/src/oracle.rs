//! Wavefunction propagation on a spatial grid, independent of the
//! eigenbasis engine.
//!
//! Works in the lattice frame: each DDS update multiplies `ψ` by
//! `exp(-i m δv z / ħ)`, then the single-site Hamiltonian acts for `δt`
//! through Strang-split Fourier substeps. The site is embedded in a window
//! several sites wide whose outer parts absorb escaping atoms. Eigenstates
//! for initial states and populations come from imaginary-time relaxation
//! on the same grid. No dephasing.

use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::constants::{HBAR, K_B};
use crate::error::{Error, Result};
use crate::profiles::BoostSchedule;
use crate::spectrum::{potential_at, PhysicalParams};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleSettings {
    /// Window width in lattice periods (λ/2).
    pub window_sites: f64,
    /// Grid points (a power of two); `None` picks the smallest that resolves
    /// the schedule.
    pub n_points: Option<usize>,
    /// Upper bound on the split-step interval (s).
    pub substep: f64,
    pub absorber: bool,
    /// Fraction of each half-window covered by the absorber.
    pub absorber_fraction: f64,
    /// Absorption rate at the outer edge (1/s).
    pub absorber_rate: f64,
    /// Free evolution after the schedule so unbound atoms clear the site (s).
    pub settle_time: f64,
    /// Number of stationary states found by relaxation.
    pub n_states: usize,
}

impl Default for OracleSettings {
    fn default() -> Self {
        Self {
            window_sites: 6.0,
            n_points: None,
            substep: 5e-9,
            absorber: true,
            absorber_fraction: 0.35,
            absorber_rate: 2e8,
            settle_time: 20e-6,
            n_states: 4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OracleInitial {
    /// Stationary state by index (0 = ground).
    Eigenstate(usize),
    /// Boltzmann mixture over the relaxed states, normalized over them.
    Thermal(f64),
}

#[derive(Clone, Debug)]
pub struct OracleResult {
    /// Norm left inside the central site after settling.
    pub retention: f64,
    /// `|⟨φ_i|ψ⟩|²` against the relaxed stationary states.
    pub populations: Vec<f64>,
    /// Total norm on the grid at the end.
    pub norm: f64,
}

impl OracleResult {
    pub fn ground_population(&self) -> f64 {
        self.populations[0]
    }
}

/// Largest grid spacing that resolves momenta up to `m·v_max` plus the
/// deepest bound-state momentum `sqrt(2 m U0)`.
pub fn spacing_limit(params: &PhysicalParams, v_max: f64) -> f64 {
    let m = params.atomic_mass();
    let p = m * v_max + (2.0 * m * params.trap_depth()).sqrt();
    HBAR * std::f64::consts::PI / p
}

pub struct GridOracle {
    params: PhysicalParams,
    settings: OracleSettings,
    z: Vec<f64>,
    potential: Vec<f64>,
    k2: Vec<f64>,
    mask: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    states: Vec<Vec<C64>>,
    energies: Vec<f64>,
}

impl GridOracle {
    /// Set up a grid able to follow lattice velocities up to `v_max`.
    pub fn new(params: &PhysicalParams, settings: OracleSettings, v_max: f64) -> Result<Self> {
        if settings.window_sites < 4.0 {
            return Err(Error::Parameter(
                "oracle window must span at least 4 sites".into(),
            ));
        }
        if settings.n_states == 0 || !(settings.substep > 0.0) {
            return Err(Error::Parameter(
                "oracle needs at least one state and a positive substep".into(),
            ));
        }
        let width = settings.window_sites * params.wavelength() / 2.0;
        let limit = spacing_limit(params, v_max);
        let n = match settings.n_points {
            Some(n) => {
                if !n.is_power_of_two() {
                    return Err(Error::Parameter(format!(
                        "oracle grid size {n} is not a power of two"
                    )));
                }
                n
            }
            None => ((width / limit).ceil() as usize)
                .next_power_of_two()
                .max(256),
        };
        let dz = width / n as f64;
        if dz > limit {
            return Err(Error::Resolution { spacing: dz, limit });
        }
        let half = width / 2.0;
        let z: Vec<f64> = (0..n).map(|j| -half + j as f64 * dz).collect();
        let potential = z.iter().map(|&z| potential_at(params, z)).collect();
        let dk = 2.0 * std::f64::consts::PI / width;
        let k2 = (0..n)
            .map(|j| {
                let f = if j < n / 2 {
                    j as f64
                } else {
                    j as f64 - n as f64
                };
                (f * dk).powi(2)
            })
            .collect();
        let inner = half * (1.0 - settings.absorber_fraction);
        let mask = z
            .iter()
            .map(|&z| {
                if !settings.absorber || z.abs() <= inner {
                    0.0
                } else {
                    let s = ((z.abs() - inner) / (half - inner)).min(1.0);
                    (std::f64::consts::FRAC_PI_2 * s).sin().powi(2)
                }
            })
            .collect();
        let mut planner = FftPlanner::new();
        let mut oracle = Self {
            params: *params,
            settings,
            z,
            potential,
            k2,
            mask,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
            states: Vec::new(),
            energies: Vec::new(),
        };
        oracle.relax()?;
        Ok(oracle)
    }

    pub fn n_points(&self) -> usize {
        self.z.len()
    }

    pub fn spacing(&self) -> f64 {
        self.z[1] - self.z[0]
    }

    /// Energies of the relaxed stationary states (J, zero at the well top).
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<C64>() * self.spacing()
    }

    fn normalize(&self, psi: &mut [C64]) {
        let n = self.inner(psi, psi).re.sqrt();
        psi.iter_mut().for_each(|c| *c /= n);
    }

    fn energy(&self, psi: &[C64]) -> f64 {
        let m = self.params.atomic_mass();
        let mut buf = psi.to_vec();
        self.fwd.process(&mut buf);
        let kin: f64 = buf
            .iter()
            .zip(&self.k2)
            .map(|(c, k2)| c.norm_sqr() * HBAR * HBAR * k2 / (2.0 * m))
            .sum::<f64>()
            / self.n_points() as f64
            * self.spacing();
        let pot: f64 = psi
            .iter()
            .zip(&self.potential)
            .map(|(c, v)| c.norm_sqr() * v)
            .sum::<f64>()
            * self.spacing();
        kin + pot
    }

    /// Imaginary-time relaxation of the lowest `n_states` states with
    /// Gram-Schmidt after every step.
    fn relax(&mut self) -> Result<()> {
        let m = self.params.atomic_mass();
        let k = self.params.wavenumber();
        let n = self.n_points();
        let count = self.settings.n_states;
        let tau = 0.5 * self.settings.substep;
        let half_v: Vec<f64> = self
            .potential
            .iter()
            .map(|v| (-v * tau / (2.0 * HBAR)).exp())
            .collect();
        let kin: Vec<f64> = self
            .k2
            .iter()
            .map(|k2| (-HBAR * k2 * tau / (2.0 * m)).exp())
            .collect();
        let mut states: Vec<Vec<C64>> = (0..count)
            .map(|i| {
                self.z
                    .iter()
                    .map(|&z| {
                        let x = k * z;
                        let env = (-2.0 * x * x).exp();
                        C64::new(env * x.powi(i as i32), 0.0)
                    })
                    .collect()
            })
            .collect();
        let norm = 1.0 / n as f64;
        let mut last = vec![0.0; count];
        for iter in 0..200_000 {
            for psi in states.iter_mut() {
                psi.iter_mut().zip(&half_v).for_each(|(c, w)| *c *= w);
                self.fwd.process(psi);
                psi.iter_mut().zip(&kin).for_each(|(c, w)| *c *= w * norm);
                self.inv.process(psi);
                psi.iter_mut().zip(&half_v).for_each(|(c, w)| *c *= w);
            }
            for i in 0..count {
                let (done, rest) = states.split_at_mut(i);
                let psi = &mut rest[0];
                for prev in done.iter() {
                    let c = self.inner(prev, psi);
                    psi.iter_mut().zip(prev).for_each(|(x, p)| *x -= c * p);
                }
                self.normalize(psi);
            }
            if iter % 200 == 199 {
                let e: Vec<f64> = states.iter().map(|s| self.energy(s)).collect();
                let change = e
                    .iter()
                    .zip(&last)
                    .map(|(a, b)| ((a - b) / a).abs())
                    .fold(0.0, f64::max);
                last = e;
                if change < 1e-13 {
                    break;
                }
            }
        }
        if last.iter().any(|&e| e >= 0.0) {
            return Err(Error::Parameter(format!(
                "only some of the {count} requested oracle states are bound"
            )));
        }
        self.energies = last;
        self.states = states;
        Ok(())
    }

    /// Propagate stationary state `index` through `schedule`.
    pub fn propagate_state(&self, index: usize, schedule: &BoostSchedule) -> Result<OracleResult> {
        let Some(start) = self.states.get(index) else {
            return Err(Error::Parameter(format!(
                "oracle has only {} states",
                self.states.len()
            )));
        };
        let v_peak = schedule
            .cumulative_velocities()
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));
        let limit = spacing_limit(&self.params, v_peak);
        if self.spacing() > limit {
            return Err(Error::Resolution {
                spacing: self.spacing(),
                limit,
            });
        }
        let mut psi = start.clone();
        let mut stepper = Stepper::new(self, schedule.dt());
        let q = self.params.mass_over_hbar();
        for &dv in schedule.boosts() {
            psi.iter_mut()
                .zip(&self.z)
                .for_each(|(c, &z)| *c *= C64::from_polar(1.0, -q * dv * z));
            stepper.advance(self, &mut psi);
        }
        if self.settings.settle_time > 0.0 {
            Stepper::new(self, self.settings.settle_time).advance(self, &mut psi);
        }
        let edge = std::f64::consts::FRAC_PI_2 / self.params.wavenumber();
        let dz = self.spacing();
        let retention = psi
            .iter()
            .zip(&self.z)
            .filter(|(_, z)| z.abs() <= edge)
            .map(|(c, _)| c.norm_sqr())
            .sum::<f64>()
            * dz;
        let norm = psi.iter().map(|c| c.norm_sqr()).sum::<f64>() * dz;
        let populations = self
            .states
            .iter()
            .map(|s| self.inner(s, &psi).norm_sqr())
            .collect();
        Ok(OracleResult {
            retention,
            populations,
            norm,
        })
    }
}

/// Precomputed split-step factors for one interval length.
struct Stepper {
    substeps: usize,
    half_v: Vec<C64>,
    kin: Vec<C64>,
    mask: Vec<f64>,
}

impl Stepper {
    fn new(o: &GridOracle, interval: f64) -> Self {
        let substeps = (interval / o.settings.substep).ceil().max(1.0) as usize;
        let h = interval / substeps as f64;
        let m = o.params.atomic_mass();
        let n = o.n_points() as f64;
        Self {
            substeps,
            half_v: o
                .potential
                .iter()
                .map(|v| C64::from_polar(1.0, -v * h / (2.0 * HBAR)))
                .collect(),
            kin: o
                .k2
                .iter()
                .map(|k2| C64::from_polar(1.0 / n, -HBAR * k2 * h / (2.0 * m)))
                .collect(),
            mask: o
                .mask
                .iter()
                .map(|s| (-o.settings.absorber_rate * h * s).exp())
                .collect(),
        }
    }

    fn advance(&mut self, o: &GridOracle, psi: &mut [C64]) {
        for _ in 0..self.substeps {
            psi.iter_mut().zip(&self.half_v).for_each(|(c, w)| *c *= w);
            o.fwd.process(psi);
            psi.iter_mut().zip(&self.kin).for_each(|(c, w)| *c *= w);
            o.inv.process(psi);
            psi.iter_mut()
                .zip(&self.half_v)
                .zip(&self.mask)
                .for_each(|((c, w), a)| *c *= w * a);
        }
    }
}

/// Propagate an eigenstate or a thermal mixture through `schedule`.
pub fn propagate_grid(
    params: &PhysicalParams,
    initial: OracleInitial,
    schedule: &BoostSchedule,
    settings: OracleSettings,
) -> Result<OracleResult> {
    let v_peak = schedule
        .cumulative_velocities()
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let oracle = GridOracle::new(params, settings, v_peak)?;
    match initial {
        OracleInitial::Eigenstate(i) => oracle.propagate_state(i, schedule),
        OracleInitial::Thermal(t) => {
            if !(t > 0.0) {
                return Err(Error::Parameter(format!(
                    "temperature must be positive, got {t}"
                )));
            }
            let e = oracle.energies();
            let w: Vec<f64> = e.iter().map(|x| (-(x - e[0]) / (K_B * t)).exp()).collect();
            let z: f64 = w.iter().sum();
            let runs = (0..e.len())
                .into_par_iter()
                .map(|i| oracle.propagate_state(i, schedule))
                .collect::<Result<Vec<_>>>()?;
            let mut out = OracleResult {
                retention: 0.0,
                populations: vec![0.0; e.len()],
                norm: 0.0,
            };
            for (r, wi) in runs.iter().zip(&w) {
                let p = wi / z;
                out.retention += p * r.retention;
                out.norm += p * r.norm;
                out.populations
                    .iter_mut()
                    .zip(&r.populations)
                    .for_each(|(a, b)| *a += p * b);
            }
            Ok(out)
        }
    }
}
