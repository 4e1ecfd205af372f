//! Physical constants (CODATA 2018) in SI units.

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;

/// Mass of a ⁸⁷Rb atom, in atomic mass units.
pub const RB87_MASS_AMU: f64 = 86.909_180_527;

pub const RB87_MASS: f64 = RB87_MASS_AMU * ATOMIC_MASS_UNIT;

/// Lattice laser wavelength used throughout the defaults.
pub const DEFAULT_WAVELENGTH: f64 = 1064e-9;

pub const MICROKELVIN: f64 = 1e-6;
