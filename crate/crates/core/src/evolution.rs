//! Step-by-step propagation of the motional density matrix through a boost
//! schedule.
//!
//! One step, with `B = T_x(a) T_f T_b(δv)` and `a = δv/δt`:
//!
//! ```text
//! ρ' = T_x(a)ᵀ [ (B ρ B†) ∘ M_d ] T_x(a)
//! ```

use std::collections::HashMap;
use std::io::Write;

use ndarray as nd;
use num_complex::Complex64 as C64;

use crate::density::{
    effective_temperature, thermal_state, EffectiveTemperature, MotionalDensityMatrix,
};
use crate::dephasing::{dephasing_matrix, dephasing_rates};
use crate::error::{Error, Result};
use crate::operators::free_propagator;
use crate::profiles::BoostSchedule;
use crate::spectrum::BoundSpectrum;
use crate::table::{OperatorTable, TableKind, DEFAULT_SAMPLES, DEFAULT_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InitialState {
    /// Boltzmann populations at this temperature (K).
    Thermal(f64),
    Ground,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimulationConfig {
    pub n_eff: usize,
    /// Dephasing parameter `γ0` (rad/s).
    pub gamma0: f64,
    pub initial: InitialState,
    pub record_trajectory: bool,
}

impl SimulationConfig {
    pub fn validate(&self, spectrum: &BoundSpectrum) -> Result<()> {
        if self.n_eff < 2 {
            return Err(Error::Parameter(format!(
                "n_eff must be at least 2, got {}",
                self.n_eff
            )));
        }
        spectrum.check_n_eff(self.n_eff)?;
        if !(self.gamma0 >= 0.0 && self.gamma0.is_finite()) {
            return Err(Error::Parameter(format!(
                "gamma0 must be non-negative, got {}",
                self.gamma0
            )));
        }
        if let InitialState::Thermal(t) = self.initial {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Parameter(format!(
                    "temperature must be positive, got {t}"
                )));
            }
        }
        Ok(())
    }

    pub fn initial_state(&self, spectrum: &BoundSpectrum) -> Result<MotionalDensityMatrix> {
        match self.initial {
            InitialState::Thermal(t) => thermal_state(spectrum, self.n_eff, t),
            InitialState::Ground => Ok(MotionalDensityMatrix::ground(self.n_eff)),
        }
    }
}

/// Boost and frame tables for one spectrum and truncation.
#[derive(Clone, Debug)]
pub struct OperatorTables {
    pub boost: OperatorTable,
    pub frame: OperatorTable,
}

impl OperatorTables {
    pub fn new(boost: OperatorTable, frame: OperatorTable) -> Result<Self> {
        if boost.kind() != TableKind::Boost || frame.kind() != TableKind::Frame {
            return Err(Error::Parameter(
                "expected one boost and one frame table".into(),
            ));
        }
        if boost.n_eff() != frame.n_eff() {
            return Err(Error::Parameter(
                "boost and frame tables disagree on n_eff".into(),
            ));
        }
        Ok(Self { boost, frame })
    }

    /// Adaptive tables covering `|δv| ≤ max_dv` and `|a| ≤ max_accel`.
    pub fn build(
        spectrum: &BoundSpectrum,
        n_eff: usize,
        max_dv: f64,
        max_accel: f64,
        tolerance: f64,
    ) -> Result<Self> {
        let floor = |x: f64| if x > 0.0 { x } else { 1e-6 };
        let boost = OperatorTable::build_adaptive(
            spectrum,
            n_eff,
            TableKind::Boost,
            floor(max_dv),
            DEFAULT_SAMPLES,
            tolerance,
        )?;
        let frame = OperatorTable::build_adaptive(
            spectrum,
            n_eff,
            TableKind::Frame,
            floor(max_accel),
            DEFAULT_SAMPLES,
            tolerance,
        )?;
        Ok(Self { boost, frame })
    }

    /// Tables covering every step of `schedules` that can run. A step beyond
    /// `a_max` ends the run without a table lookup.
    pub fn for_schedules<'a>(
        spectrum: &BoundSpectrum,
        n_eff: usize,
        schedules: impl IntoIterator<Item = &'a BoostSchedule>,
    ) -> Result<Self> {
        let a_max = spectrum.params().max_acceleration();
        let (mut dv, mut a) = (0.0f64, 0.0f64);
        for s in schedules {
            let b = s.max_reachable_boost(a_max);
            dv = dv.max(b);
            a = a.max(b / s.dt());
        }
        Self::build(spectrum, n_eff, dv, a.min(a_max), DEFAULT_TOLERANCE)
    }

    pub fn n_eff(&self) -> usize {
        self.boost.n_eff()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub step: usize,
    /// Time at the end of the step (s).
    pub time: f64,
    /// Lattice velocity after the step (m/s).
    pub velocity: f64,
    pub retention: f64,
    pub ground_population: f64,
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub rho: MotionalDensityMatrix,
    pub retention: f64,
    /// Absolute level populations.
    pub populations: Vec<f64>,
    /// Mean energy above `E_1` of the surviving population (J).
    pub mean_energy: Option<f64>,
    pub effective_temperature: Option<EffectiveTemperature>,
    /// Absolute ground-state population.
    pub ground_population: f64,
    pub trajectory: Option<Vec<TrajectoryPoint>>,
    /// First step whose acceleration exceeded `a_max`, if any.
    pub over_limit_step: Option<usize>,
}

impl EvolutionResult {
    fn assemble(
        rho: MotionalDensityMatrix,
        spectrum: &BoundSpectrum,
        trajectory: Option<Vec<TrajectoryPoint>>,
        over_limit_step: Option<usize>,
    ) -> Self {
        let populations = rho.populations();
        let retention = rho.trace().clamp(0.0, 1.0);
        let alive = rho.trace() > 1e-6;
        Self {
            mean_energy: if alive {
                rho.mean_excitation(spectrum).ok()
            } else {
                None
            },
            effective_temperature: if alive {
                effective_temperature(&rho, spectrum).ok()
            } else {
                None
            },
            ground_population: populations[0],
            retention,
            populations,
            rho,
            trajectory,
            over_limit_step,
        }
    }

    /// Ground-state population among the surviving atoms.
    pub fn ground_fraction(&self) -> Option<f64> {
        (self.retention > 0.0).then(|| self.ground_population / self.retention)
    }

    pub fn effective_temperature_kelvin(&self) -> Option<f64> {
        self.effective_temperature.map(|t| t.kelvin)
    }

    /// Per-step CSV: step, time_s, velocity_m_per_s, retention, ground_population.
    pub fn write_trajectory_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let Some(traj) = &self.trajectory else {
            return Err(Error::Capability("no trajectory was recorded".into()));
        };
        writeln!(
            out,
            "step,time_s,velocity_m_per_s,retention,ground_population"
        )?;
        for p in traj {
            writeln!(
                out,
                "{},{:.9e},{:.9e},{:.12},{:.12}",
                p.step, p.time, p.velocity, p.retention, p.ground_population
            )?;
        }
        Ok(())
    }
}

struct StepOps {
    /// `T_x T_f T_b`.
    forward: nd::Array2<C64>,
    /// `T_x` as a complex matrix.
    frame: nd::Array2<C64>,
}

/// Applies single steps at a fixed `δt`, caching the step operators for
/// every distinct `δv` it has seen.
pub struct Propagator<'a> {
    spectrum: &'a BoundSpectrum,
    tables: &'a OperatorTables,
    dt: f64,
    tf: nd::Array1<C64>,
    md: nd::Array2<f64>,
    cache: HashMap<u64, StepOps>,
}

impl<'a> Propagator<'a> {
    pub fn new(
        spectrum: &'a BoundSpectrum,
        tables: &'a OperatorTables,
        dt: f64,
        gamma0: f64,
    ) -> Result<Self> {
        let n_eff = tables.n_eff();
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Parameter(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let rates = dephasing_rates(spectrum, n_eff, gamma0)?;
        Ok(Self {
            spectrum,
            tables,
            dt,
            tf: free_propagator(spectrum, n_eff, dt)?,
            md: dephasing_matrix(&rates, dt),
            cache: HashMap::new(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dephasing(&self) -> &nd::Array2<f64> {
        &self.md
    }

    fn ops(&mut self, dv: f64) -> Result<&StepOps> {
        let key = dv.to_bits();
        if !self.cache.contains_key(&key) {
            let accel = dv / self.dt;
            let a_max = self.spectrum.params().max_acceleration();
            if accel.abs() > a_max {
                return Err(Error::MaxAccelerationExceeded { accel, a_max });
            }
            let tb = self.tables.boost.boost_at(dv)?;
            let tx = self
                .tables
                .frame
                .frame_at(accel)?
                .mapv(|x| C64::new(x, 0.0));
            let mut ftb = tb;
            for (mut row, &phase) in ftb.rows_mut().into_iter().zip(&self.tf) {
                row.mapv_inplace(|c| c * phase);
            }
            let forward = tx.dot(&ftb);
            self.cache.insert(key, StepOps { forward, frame: tx });
        }
        Ok(&self.cache[&key])
    }

    /// Advance `rho` by one boost `dv` followed by free evolution and
    /// dephasing in the accelerated frame.
    pub fn step(&mut self, rho: &mut MotionalDensityMatrix, dv: f64) -> Result<()> {
        let md = self.md.clone();
        let ops = self.ops(dv)?;
        let m = rho.matrix();
        let b_adj = ops.forward.t().mapv(|c| c.conj());
        let mut y = ops.forward.dot(m).dot(&b_adj);
        nd::Zip::from(&mut y).and(&md).for_each(|c, &w| *c *= w);
        let out = ops.frame.t().dot(&y).dot(&ops.frame);
        *rho.matrix_mut() = out;
        rho.symmetrize();
        Ok(())
    }
}

const PSD_CHECK_INTERVAL: usize = 50;

/// Run the whole schedule from the configured initial state.
pub fn evolve(
    config: &SimulationConfig,
    spectrum: &BoundSpectrum,
    schedule: &BoostSchedule,
    tables: &OperatorTables,
) -> Result<EvolutionResult> {
    config.validate(spectrum)?;
    if tables.n_eff() != config.n_eff {
        return Err(Error::Parameter(format!(
            "tables built for n_eff = {}, configuration asks for {}",
            tables.n_eff(),
            config.n_eff
        )));
    }
    let rho = config.initial_state(spectrum)?;
    evolve_from(rho, config, spectrum, schedule, tables)
}

/// Like [`evolve`] but from an explicit initial state.
pub fn evolve_from(
    mut rho: MotionalDensityMatrix,
    config: &SimulationConfig,
    spectrum: &BoundSpectrum,
    schedule: &BoostSchedule,
    tables: &OperatorTables,
) -> Result<EvolutionResult> {
    if rho.dim() != tables.n_eff() {
        return Err(Error::Parameter(
            "initial state and tables differ in dimension".into(),
        ));
    }
    let mut trajectory = config
        .record_trajectory
        .then(|| Vec::with_capacity(schedule.len()));
    if schedule.is_empty() {
        return Ok(EvolutionResult::assemble(rho, spectrum, trajectory, None));
    }
    let mut prop = Propagator::new(spectrum, tables, schedule.dt(), config.gamma0)?;
    let mut velocity = 0.0;
    let mut over_limit = None;
    for (i, &dv) in schedule.boosts().iter().enumerate() {
        velocity += dv;
        if over_limit.is_none() {
            match prop.step(&mut rho, dv) {
                Ok(()) => {}
                Err(Error::MaxAccelerationExceeded { .. }) => {
                    over_limit = Some(i);
                    rho.matrix_mut().fill(C64::new(0.0, 0.0));
                }
                Err(e) => return Err(e),
            }
            if cfg!(debug_assertions) && i % PSD_CHECK_INTERVAL == 0 {
                debug_assert!(
                    rho.is_psd_within(1e-10),
                    "density matrix lost positivity at step {i}"
                );
            }
        }
        if let Some(t) = trajectory.as_mut() {
            t.push(TrajectoryPoint {
                step: i,
                time: (i + 1) as f64 * schedule.dt(),
                velocity,
                retention: rho.trace(),
                ground_population: rho.populations()[0],
            });
        }
    }
    Ok(EvolutionResult::assemble(
        rho, spectrum, trajectory, over_limit,
    ))
}
