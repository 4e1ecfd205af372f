//! Heating, retention loss and ground-state survival of atoms carried by an
//! optical conveyor belt (a moving 1D optical lattice).
//!
//! The longitudinal motion in one lattice site is modelled as a motional
//! density matrix in the basis of bound eigenstates. Each DDS frequency
//! update boosts the lattice frame; between updates the state evolves
//! freely, and transverse motion enters as state-dependent dephasing applied
//! in the (approximate) eigenbasis of the accelerated well.

pub mod cache;
pub mod constants;
pub mod density;
pub mod dephasing;
pub mod error;
pub mod evolution;
pub mod gamma0;
pub mod operators;
pub mod oracle;
pub mod profiles;
mod shift;
pub mod spectrum;
pub mod sweep;
pub mod table;
mod tridiag;

pub use error::{Error, Result};
pub use spectrum::{
    build_potential, solve_bound_spectrum, trap_constants, BoundSpectrum, PhysicalParams,
    SpatialGrid, TrapConstants,
};
