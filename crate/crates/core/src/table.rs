//! Tabulated boost and frame operators with per-element linear interpolation.
//!
//! Boost tables are uniform in `δv`. Frame tables are uniform in the well
//! displacement `u = -Δz(a) = arcsin(a/a_max)/(2k)`, which is smooth right
//! up to `a_max`; their sample points are still reported as accelerations.
//!
//! Only the non-negative half of the range is stored. Negative arguments
//! follow from parity of the eigenfunctions: `T_b(-δv) = conj(T_b(δv))` and
//! `T_x(-a)_ij = (-1)^(i+j) T_x(a)_ij`.

use ndarray as nd;
use num_complex::Complex64 as C64;
use rand::{rngs::StdRng, Rng, SeedableRng};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operators::{
    acceleration_for_shift, boost_operator_exact, trap_minimum_shift, FrameBuilder,
};
use crate::spectrum::{BoundSpectrum, PhysicalParams};

pub const DEFAULT_SAMPLES: usize = 60;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const PROBE_COUNT: usize = 10;
/// Adaptive builds densify until the probes pass this fraction of the
/// tolerance; a handful of probes can miss the worst interval by ~25%.
pub const PROBE_MARGIN: f64 = 0.5;
const MAX_SAMPLES: usize = 200_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TableKind {
    Boost,
    Frame,
}

impl TableKind {
    pub fn name(self) -> &'static str {
        match self {
            TableKind::Boost => "boost",
            TableKind::Frame => "frame",
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum TableData {
    Boost(Vec<nd::Array2<C64>>),
    Frame(Vec<nd::Array2<f64>>),
}

#[derive(Clone, Debug)]
pub struct OperatorTable {
    pub(crate) kind: TableKind,
    pub(crate) n_eff: usize,
    pub(crate) params: PhysicalParams,
    /// Half-width of the tabulated range, in δv (m/s) or a (m/s²).
    pub(crate) half_range: f64,
    pub(crate) data: TableData,
    pub(crate) worst_probe_error: f64,
}

/// Interpolation coordinate for a query value.
fn coordinate(kind: TableKind, params: &PhysicalParams, x: f64) -> f64 {
    match kind {
        TableKind::Boost => x,
        TableKind::Frame => -trap_minimum_shift(params, x).expect("range checked against a_max"),
    }
}

impl OperatorTable {
    /// Tabulate `n_samples` operators over `[-half_range, half_range]` and
    /// verify interpolation on random probe points.
    pub fn build(
        spectrum: &BoundSpectrum,
        n_eff: usize,
        kind: TableKind,
        half_range: f64,
        n_samples: usize,
        tolerance: f64,
    ) -> Result<Self> {
        let stored = n_samples / 2 + 1;
        let table = Self::tabulate(spectrum, n_eff, kind, half_range, stored)?;
        let worst = table.probe(spectrum, PROBE_COUNT, 0x5eed ^ stored as u64)?;
        if worst > tolerance {
            return Err(Error::TableAccuracy { worst, tolerance });
        }
        Ok(Self {
            worst_probe_error: worst,
            ..table
        })
    }

    /// Start at `min_samples` and densify until the probes pass
    /// `PROBE_MARGIN * tolerance`.
    ///
    /// Linear interpolation error scales with the node spacing squared, so
    /// each retry jumps straight to the count the last probe predicts.
    pub fn build_adaptive(
        spectrum: &BoundSpectrum,
        n_eff: usize,
        kind: TableKind,
        half_range: f64,
        min_samples: usize,
        tolerance: f64,
    ) -> Result<Self> {
        let mut n = min_samples / 2 + 1;
        loop {
            let table = Self::tabulate(spectrum, n_eff, kind, half_range, n)?;
            let worst = table.probe(spectrum, PROBE_COUNT, 0x5eed ^ n as u64)?;
            let target = PROBE_MARGIN * tolerance;
            if worst <= target {
                return Ok(Self {
                    worst_probe_error: worst,
                    ..table
                });
            }
            let grow = (worst / target).sqrt() * 1.15;
            let next = (((n - 1) as f64) * grow).ceil() as usize + 1;
            if next > MAX_SAMPLES {
                return Err(Error::TableAccuracy { worst, tolerance });
            }
            n = next.max(n + 1);
        }
    }

    fn tabulate(
        spectrum: &BoundSpectrum,
        n_eff: usize,
        kind: TableKind,
        half_range: f64,
        stored: usize,
    ) -> Result<Self> {
        spectrum.check_n_eff(n_eff)?;
        if !(half_range > 0.0 && half_range.is_finite()) {
            return Err(Error::Parameter(format!(
                "table half-range must be positive, got {half_range}"
            )));
        }
        if stored < 2 {
            return Err(Error::Parameter("a table needs at least 3 samples".into()));
        }
        let params = *spectrum.params();
        if kind == TableKind::Frame && half_range > params.max_acceleration() {
            return Err(Error::MaxAccelerationExceeded {
                accel: half_range,
                a_max: params.max_acceleration(),
            });
        }
        let hi = coordinate(kind, &params, half_range);
        let nodes: Vec<f64> = (0..stored)
            .map(|k| hi * k as f64 / (stored - 1) as f64)
            .collect();
        let data = match kind {
            TableKind::Boost => TableData::Boost(
                nodes
                    .par_iter()
                    .map(|&dv| boost_operator_exact(spectrum, n_eff, dv))
                    .collect::<Result<Vec<_>>>()?,
            ),
            TableKind::Frame => {
                let builder = FrameBuilder::new(spectrum, n_eff)?;
                TableData::Frame(nodes.par_iter().map(|&u| builder.at_shift(-u)).collect())
            }
        };
        Ok(Self {
            kind,
            n_eff,
            params,
            half_range,
            data,
            worst_probe_error: f64::NAN,
        })
    }

    /// Largest element-wise deviation from the exact operator over
    /// `count` random points.
    pub fn probe(&self, spectrum: &BoundSpectrum, count: usize, seed: u64) -> Result<f64> {
        let mut rng = StdRng::seed_from_u64(seed);
        let points: Vec<f64> = (0..count)
            .map(|_| rng.random_range(-self.half_range..=self.half_range))
            .collect();
        let errors = points
            .par_iter()
            .map(|&x| -> Result<f64> {
                Ok(match self.kind {
                    TableKind::Boost => {
                        let exact = boost_operator_exact(spectrum, self.n_eff, x)?;
                        let approx = self.boost_at(x)?;
                        (&exact - &approx)
                            .iter()
                            .map(|c| c.norm())
                            .fold(0.0, f64::max)
                    }
                    TableKind::Frame => {
                        let builder = FrameBuilder::new(spectrum, self.n_eff)?;
                        let exact = builder.at_acceleration(x)?;
                        let approx = self.frame_at(x)?;
                        (&exact - &approx)
                            .iter()
                            .map(|c| c.abs())
                            .fold(0.0, f64::max)
                    }
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(errors.into_iter().fold(0.0, f64::max))
    }

    pub fn kind(&self) -> TableKind {
        self.kind
    }

    pub fn n_eff(&self) -> usize {
        self.n_eff
    }

    pub fn half_range(&self) -> f64 {
        self.half_range
    }

    /// Number of stored (non-negative) nodes.
    pub fn n_stored(&self) -> usize {
        match &self.data {
            TableData::Boost(v) => v.len(),
            TableData::Frame(v) => v.len(),
        }
    }

    /// Worst interpolation error seen during build-time verification.
    pub fn worst_probe_error(&self) -> f64 {
        self.worst_probe_error
    }

    /// Number of sample points over the full symmetric range.
    pub fn n_samples(&self) -> usize {
        2 * self.n_stored() - 1
    }

    /// Tabulated abscissae over the full range, strictly increasing:
    /// δv (m/s) for boosts, a (m/s²) for frames.
    pub fn sample_points(&self) -> Vec<f64> {
        let hi = coordinate(self.kind, &self.params, self.half_range);
        let n = self.n_stored();
        (1 - n as isize..n as isize)
            .map(|k| {
                let u = hi * k as f64 / (n - 1) as f64;
                match self.kind {
                    TableKind::Boost => u,
                    TableKind::Frame => acceleration_for_shift(&self.params, -u),
                }
            })
            .collect()
    }

    pub fn covers(&self, x: f64) -> bool {
        x.abs() <= self.half_range
    }

    fn locate(&self, x: f64) -> Result<(usize, f64)> {
        if !self.covers(x) {
            return Err(Error::OutOfRange {
                value: x,
                lo: -self.half_range,
                hi: self.half_range,
            });
        }
        let hi = coordinate(self.kind, &self.params, self.half_range);
        let u = coordinate(self.kind, &self.params, x.abs());
        let n = self.n_stored();
        let pos = (u / hi * (n - 1) as f64).clamp(0.0, (n - 1) as f64);
        let k = (pos.floor() as usize).min(n - 2);
        Ok((k, pos - k as f64))
    }

    /// Interpolated boost operator at `δv`.
    pub fn boost_at(&self, dv: f64) -> Result<nd::Array2<C64>> {
        let TableData::Boost(m) = &self.data else {
            return Err(Error::Capability("not a boost table".into()));
        };
        let (k, t) = self.locate(dv)?;
        let mut out = lerp(&m[k], &m[k + 1], t);
        if dv < 0.0 {
            out.mapv_inplace(|c| c.conj());
        }
        Ok(out)
    }

    /// Interpolated frame transform at acceleration `a`.
    pub fn frame_at(&self, accel: f64) -> Result<nd::Array2<f64>> {
        let TableData::Frame(m) = &self.data else {
            return Err(Error::Capability("not a frame table".into()));
        };
        let (k, t) = self.locate(accel)?;
        let mut out = lerp(&m[k], &m[k + 1], t);
        if accel < 0.0 {
            out.indexed_iter_mut()
                .filter(|((i, j), _)| (i + j) % 2 == 1)
                .for_each(|(_, x)| *x = -*x);
        }
        Ok(out)
    }

    /// Stored matrix at non-negative node `k` (boost tables).
    pub fn boost_node(&self, k: usize) -> Option<&nd::Array2<C64>> {
        match &self.data {
            TableData::Boost(m) => m.get(k),
            TableData::Frame(_) => None,
        }
    }

    /// Stored matrix at non-negative node `k` (frame tables).
    pub fn frame_node(&self, k: usize) -> Option<&nd::Array2<f64>> {
        match &self.data {
            TableData::Frame(m) => m.get(k),
            TableData::Boost(_) => None,
        }
    }
}

fn lerp<T>(a: &nd::Array2<T>, b: &nd::Array2<T>, t: f64) -> nd::Array2<T>
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    if t == 0.0 {
        return a.clone();
    }
    nd::Zip::from(a)
        .and(b)
        .map_collect(|&x, &y| x * (1.0 - t) + y * t)
}
