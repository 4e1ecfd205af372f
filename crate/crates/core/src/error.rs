use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("acceleration {accel:.6e} m/s^2 exceeds the maximum {a_max:.6e} m/s^2 the lattice can sustain")]
    MaxAccelerationExceeded { accel: f64, a_max: f64 },

    #[error(
        "spatial grid too coarse: E_{level} drifts by {drift:.3e} (relative) under 2x refinement"
    )]
    GridTooCoarse { level: usize, drift: f64 },

    #[error(
        "operator table rejected: worst interpolation error {worst:.3e} exceeds {tolerance:.1e}"
    )]
    TableAccuracy { worst: f64, tolerance: f64 },

    #[error("query {value:.6e} lies outside the tabulated range [{lo:.6e}, {hi:.6e}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("{0}")]
    Capability(String),

    #[error("no dephasing time found within {periods} transverse periods")]
    Divergence { periods: usize },

    #[error("grid resolution insufficient: spacing {spacing:.3e} m exceeds {limit:.3e} m")]
    Resolution { spacing: f64, limit: f64 },

    #[error("invalid profile file: {0}")]
    ProfileFormat(String),

    #[error("configuration invalid:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("cache: {0}")]
    Cache(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
