//! Single-site lattice potential and its bound spectrum.
//!
//! The potential of one lattice well is `U(z) = -U0 cos²(kz)` for
//! `|z| <= π/(2k)` and zero outside, so bound states have `E < 0`. The
//! time-independent Schrödinger equation is discretized with second-order
//! central differences on a uniform grid with hard walls at its edges and
//! diagonalized as a symmetric tridiagonal matrix.

use std::f64::consts::PI;

use ndarray as nd;

use crate::constants::{DEFAULT_WAVELENGTH, HBAR, K_B, MICROKELVIN, RB87_MASS};
use crate::error::{Error, Result};
use crate::tridiag;

/// Wavelength, atomic mass and effective trap depth, with the closed-form
/// trap constants derived from them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    wavelength: f64,
    atomic_mass: f64,
    trap_depth: f64,
}

impl PhysicalParams {
    pub fn new(wavelength: f64, atomic_mass: f64, trap_depth: f64) -> Result<Self> {
        for (name, v) in [
            ("wavelength", wavelength),
            ("atomic_mass", atomic_mass),
            ("trap_depth", trap_depth),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Parameter(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self {
            wavelength,
            atomic_mass,
            trap_depth,
        })
    }

    /// ⁸⁷Rb in a 1064 nm lattice with the given depth `U0/k_B` in μK.
    pub fn rb87(trap_depth_uk: f64) -> Result<Self> {
        Self::new(
            DEFAULT_WAVELENGTH,
            RB87_MASS,
            trap_depth_uk * MICROKELVIN * K_B,
        )
    }

    /// The calibrated conveyor parameters: ⁸⁷Rb, 1064 nm, `U0/k_B = 254 μK`.
    pub fn reference() -> Self {
        Self::rb87(254.0).expect("reference parameters are valid")
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn atomic_mass(&self) -> f64 {
        self.atomic_mass
    }

    /// Effective depth `U0` in joules.
    pub fn trap_depth(&self) -> f64 {
        self.trap_depth
    }

    pub fn trap_depth_uk(&self) -> f64 {
        self.trap_depth / K_B / MICROKELVIN
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }

    /// `ω0 = k sqrt(2 U0 / m)`.
    pub fn harmonic_angular_frequency(&self) -> f64 {
        self.wavenumber() * (2.0 * self.trap_depth / self.atomic_mass).sqrt()
    }

    pub fn trap_frequency(&self) -> f64 {
        self.harmonic_angular_frequency() / (2.0 * PI)
    }

    /// `a_max = U0 k / m`, beyond which the tilted potential has no minima.
    pub fn max_acceleration(&self) -> f64 {
        self.trap_depth * self.wavenumber() / self.atomic_mass
    }

    /// Half-width `π/(2k)` of the single-site window.
    pub fn site_half_width(&self) -> f64 {
        PI / (2.0 * self.wavenumber())
    }

    pub fn recoil_energy(&self) -> f64 {
        let k = self.wavenumber();
        HBAR * HBAR * k * k / (2.0 * self.atomic_mass)
    }

    /// `m / ħ`, the factor converting a velocity into a wavenumber.
    pub fn mass_over_hbar(&self) -> f64 {
        self.atomic_mass / HBAR
    }

    pub(crate) fn fingerprint(&self) -> [u64; 3] {
        [
            self.wavelength.to_bits(),
            self.atomic_mass.to_bits(),
            self.trap_depth.to_bits(),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrapConstants {
    /// Harmonic angular frequency ω0 (rad/s).
    pub omega0: f64,
    /// `ω0 / 2π` (Hz).
    pub f_trap: f64,
    /// Maximum sustainable acceleration (m/s²).
    pub a_max: f64,
}

pub fn trap_constants(params: &PhysicalParams) -> TrapConstants {
    TrapConstants {
        omega0: params.harmonic_angular_frequency(),
        f_trap: params.trap_frequency(),
        a_max: params.max_acceleration(),
    }
}

/// Uniform grid of `n_points` samples on `[-half_width, half_width]`.
///
/// `n_points` is odd so that `z = 0` is a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpatialGrid {
    half_width: f64,
    n_points: usize,
}

impl SpatialGrid {
    pub const DEFAULT_POINTS: usize = 2001;
    pub const DEFAULT_WIDTH_FACTOR: f64 = 1.5;

    pub fn new(half_width: f64, n_points: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Parameter(format!(
                "grid half-width must be positive, got {half_width}"
            )));
        }
        if n_points < 5 || n_points % 2 == 0 {
            return Err(Error::Parameter(format!(
                "grid point count must be odd and >= 5, got {n_points}"
            )));
        }
        Ok(Self {
            half_width,
            n_points,
        })
    }

    /// Grid covering `width_factor` times the single-site window.
    pub fn for_params(params: &PhysicalParams, width_factor: f64, n_points: usize) -> Result<Self> {
        if width_factor < 1.0 {
            return Err(Error::Parameter(format!(
                "grid must cover the whole site window (width factor {width_factor} < 1)"
            )));
        }
        Self::new(width_factor * params.site_half_width(), n_points)
    }

    /// 1.5 x the site window, 2001 points.
    pub fn default_for(params: &PhysicalParams) -> Self {
        Self::for_params(params, Self::DEFAULT_WIDTH_FACTOR, Self::DEFAULT_POINTS)
            .expect("default grid is valid")
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / (self.n_points - 1) as f64
    }

    pub fn center_index(&self) -> usize {
        self.n_points / 2
    }

    pub fn position(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn positions(&self) -> nd::Array1<f64> {
        nd::Array1::from_shape_fn(self.n_points, |j| self.position(j))
    }

    /// Same extent with the spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            half_width: self.half_width,
            n_points: 2 * self.n_points - 1,
        }
    }

    pub fn covers_site(&self, params: &PhysicalParams) -> bool {
        self.half_width >= params.site_half_width() * (1.0 - 1e-12)
    }

    /// Trapezoidal quadrature of sampled values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        let n = values.len();
        let interior: f64 = values[1..n - 1].iter().sum();
        self.spacing() * (interior + 0.5 * (values[0] + values[n - 1]))
    }
}

/// Potential `U(z) = -U0 Π(z) cos²(kz)` at a single position.
pub fn potential_at(params: &PhysicalParams, z: f64) -> f64 {
    if z.abs() >= params.site_half_width() {
        0.0
    } else {
        let c = (params.wavenumber() * z).cos();
        -params.trap_depth() * c * c
    }
}

/// Potential sampled on every grid point (J).
pub fn build_potential(params: &PhysicalParams, grid: &SpatialGrid) -> nd::Array1<f64> {
    grid.positions().mapv(|z| potential_at(params, z))
}

/// Bound eigenpairs of the single-site potential.
#[derive(Clone, Debug)]
pub struct BoundSpectrum {
    energies: Vec<f64>,
    /// One row per bound state, sampled on `grid`, normalized in 1/√m.
    states: nd::Array2<f64>,
    params: PhysicalParams,
    grid: SpatialGrid,
}

impl BoundSpectrum {
    /// Diagonalize on `grid` without the refinement check.
    pub fn compute(params: &PhysicalParams, grid: &SpatialGrid) -> Result<Self> {
        if !grid.covers_site(params) {
            return Err(Error::Parameter(format!(
                "grid half-width {:.4e} m does not cover the site window {:.4e} m",
                grid.half_width(),
                params.site_half_width()
            )));
        }
        // dimensionless: x = kz, energies in units of U0
        let n = grid.n_points();
        let dx = params.wavenumber() * grid.spacing();
        let s = params.recoil_energy() / params.trap_depth() / (dx * dx);
        let potential = build_potential(params, grid);
        let interior = n - 2;
        let diag: Vec<f64> = (1..n - 1)
            .map(|j| 2.0 * s + potential[j] / params.trap_depth())
            .collect();
        let off = vec![-s; interior - 1];

        let values = tridiag::eigenvalues_below(&diag, &off, 0.0);
        let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(values.len());
        for &lam in &values {
            // parity alternates, so only same-parity neighbours can contaminate
            let v = tridiag::eigenvector(&diag, &off, lam, &vectors);
            vectors.push(v);
        }

        let norm = grid.spacing().sqrt();
        let c = grid.center_index();
        let mut states = nd::Array2::<f64>::zeros((values.len(), n));
        for (i, v) in vectors.iter().enumerate() {
            let mut row = states.row_mut(i);
            for (j, x) in v.iter().enumerate() {
                row[j + 1] = x / norm;
            }
            let probe = if i % 2 == 0 { row[c] } else { row[c + 1] };
            if probe < 0.0 {
                row.mapv_inplace(|x| -x);
            }
        }
        let energies = values.iter().map(|l| l * params.trap_depth()).collect();
        Ok(Self {
            energies,
            states,
            params: *params,
            grid: *grid,
        })
    }

    pub fn n_bound(&self) -> usize {
        self.energies.len()
    }

    /// Ascending energies (J), zero at the top of the well.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn states(&self) -> nd::ArrayView2<'_, f64> {
        self.states.view()
    }

    pub fn state(&self, i: usize) -> nd::ArrayView1<'_, f64> {
        self.states.row(i)
    }

    pub fn params(&self) -> &PhysicalParams {
        &self.params
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    /// `E_2 - E_1`.
    pub fn ground_spacing(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }

    /// Gram matrix of the first `n` states under trapezoidal quadrature.
    pub fn overlap_matrix(&self, n: usize) -> nd::Array2<f64> {
        let s = self.states.slice(nd::s![..n, ..]);
        s.dot(&s.t()) * self.grid.spacing()
    }

    pub fn check_n_eff(&self, n_eff: usize) -> Result<()> {
        if n_eff == 0 || n_eff > self.n_bound() {
            return Err(Error::Parameter(format!(
                "n_eff = {n_eff} must lie in 1..={} (number of bound states)",
                self.n_bound()
            )));
        }
        Ok(())
    }
}

/// Largest relative eigenvalue change accepted under 2x grid refinement.
pub const REFINEMENT_TOLERANCE: f64 = 1e-3;

/// Relative energy drift per level between `coarse` and `fine`, measured
/// against each level's height above the well bottom.
pub fn refinement_drift(coarse: &BoundSpectrum, fine: &BoundSpectrum) -> Vec<f64> {
    let u0 = coarse.params.trap_depth();
    coarse
        .energies
        .iter()
        .zip(&fine.energies)
        .map(|(a, b)| (a - b).abs() / (a + u0))
        .collect()
}

/// Solve the bound eigenproblem and verify it against a 2x refined grid.
pub fn solve_bound_spectrum(params: &PhysicalParams, grid: &SpatialGrid) -> Result<BoundSpectrum> {
    let coarse = BoundSpectrum::compute(params, grid)?;
    let fine = BoundSpectrum::compute(params, &grid.refined())?;
    if let Some((level, drift)) = refinement_drift(&coarse, &fine)
        .into_iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(&b.1))
    {
        if drift > REFINEMENT_TOLERANCE {
            return Err(Error::GridTooCoarse {
                level: level + 1,
                drift,
            });
        }
    }
    Ok(coarse)
}
