use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ProfileSpec, Scenario};
use crate::cache::{TableCache, TableKey};
use crate::error::{Error, Result};
use crate::evolution::{evolve, InitialState, OperatorTables, SimulationConfig};
use crate::oracle::{propagate_grid, OracleInitial, OracleSettings};
use crate::profiles::{BoostSchedule, TripPlan};
use crate::spectrum::{solve_bound_spectrum, BoundSpectrum};
use crate::table::{OperatorTable, TableKind};

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads; `None` uses every core.
    pub workers: Option<usize>,
    pub cache_dir: Option<PathBuf>,
    /// Write `wall_ms` as 0 so repeated runs produce identical files.
    pub no_timing: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PointStatus {
    Ok,
    /// The schedule exceeded `a_max` at this step; the atom is lost.
    OverLimit(usize),
    Failed(String),
}

#[derive(Clone, Debug)]
pub struct PointResult {
    pub axis_value: f64,
    pub retention: f64,
    /// NaN when nothing survives.
    pub t_eff_uk: f64,
    pub ground_pop: f64,
    pub populations: Vec<f64>,
    pub wall_ms: f64,
    pub status: PointStatus,
}

impl PointResult {
    fn failed(axis_value: f64, msg: String, wall_ms: f64) -> Self {
        Self {
            axis_value,
            retention: f64::NAN,
            t_eff_uk: f64::NAN,
            ground_pop: f64::NAN,
            populations: Vec::new(),
            wall_ms,
            status: PointStatus::Failed(msg),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Series {
    pub profile: String,
    pub points: Vec<PointResult>,
}

#[derive(Clone, Copy, Debug)]
pub struct TableSummary {
    pub kind: TableKind,
    pub half_range: f64,
    pub n_samples: usize,
    pub worst_probe_error: f64,
}

impl TableSummary {
    fn of(t: &OperatorTable) -> Self {
        Self {
            kind: t.kind(),
            half_range: t.half_range(),
            n_samples: t.n_samples(),
            worst_probe_error: t.worst_probe_error(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub scenario: Scenario,
    pub n_bound: usize,
    pub tables: Vec<TableSummary>,
    pub series: Vec<Series>,
    pub oracle: Option<OracleReport>,
}

impl SweepResult {
    pub fn series(&self, profile: &str) -> Option<&Series> {
        self.series.iter().find(|s| s.profile == profile)
    }
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::Parameter("--workers must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(|e| Error::Parameter(e.to_string()))
}

/// Boost and frame tables for the given extremes, optionally through the cache.
pub fn build_tables(
    spectrum: &BoundSpectrum,
    n_eff: usize,
    max_dv: f64,
    max_accel: f64,
    min_samples: usize,
    tolerance: f64,
    cache: Option<&TableCache>,
) -> Result<OperatorTables> {
    let floor = |x: f64| if x > 0.0 { x } else { 1e-6 };
    let one = |kind, half_range| -> Result<OperatorTable> {
        let key = TableKey {
            kind,
            n_eff,
            half_range,
            min_samples,
            tolerance,
        };
        match cache {
            Some(c) => c.get_or_build(spectrum, key),
            None => OperatorTable::build_adaptive(
                spectrum,
                n_eff,
                kind,
                half_range,
                min_samples,
                tolerance,
            ),
        }
    };
    let a = max_accel.min(spectrum.params().max_acceleration());
    OperatorTables::new(
        one(TableKind::Boost, floor(max_dv))?,
        one(TableKind::Frame, floor(a))?,
    )
}

fn extremes<'a>(schedules: impl IntoIterator<Item = &'a BoostSchedule>, a_max: f64) -> (f64, f64) {
    schedules.into_iter().fold((0.0f64, 0.0f64), |(dv, a), s| {
        let b = s.max_reachable_boost(a_max);
        (dv.max(b), a.max(b / s.dt()))
    })
}

fn run_point(
    config: &SimulationConfig,
    spectrum: &BoundSpectrum,
    tables: &OperatorTables,
    axis_value: f64,
    schedule: std::result::Result<&BoostSchedule, &String>,
    timing: bool,
) -> PointResult {
    let start = Instant::now();
    let wall = |start: Instant| {
        if timing {
            start.elapsed().as_secs_f64() * 1e3
        } else {
            0.0
        }
    };
    let schedule = match schedule {
        Ok(s) => s,
        Err(msg) => return PointResult::failed(axis_value, msg.clone(), wall(start)),
    };
    match evolve(config, spectrum, schedule, tables) {
        Ok(r) => PointResult {
            axis_value,
            retention: r.retention,
            t_eff_uk: r
                .effective_temperature_kelvin()
                .map_or(f64::NAN, |t| t * 1e6),
            ground_pop: r.ground_population,
            populations: r.populations.clone(),
            wall_ms: wall(start),
            status: r
                .over_limit_step
                .map_or(PointStatus::Ok, PointStatus::OverLimit),
        },
        Err(e) => PointResult::failed(axis_value, e.to_string(), wall(start)),
    }
}

/// Evolve every axis point of every profile. Rows come back in axis order
/// whatever the worker count.
pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> Result<SweepResult> {
    let pool = pool(options.workers)?;
    let cache = options
        .cache_dir
        .as_ref()
        .map(TableCache::new)
        .transpose()?;
    let grid = scenario.grid()?;
    pool.install(|| {
        let spectrum = solve_bound_spectrum(&scenario.params, &grid)?;
        let schedules: Vec<Vec<std::result::Result<BoostSchedule, String>>> = scenario
            .profiles
            .iter()
            .map(|p| {
                scenario
                    .axis
                    .iter()
                    .map(|&x| scenario.schedule_at(p, x).map_err(|e| e.to_string()))
                    .collect()
            })
            .collect();
        let (dv, a) = extremes(
            schedules.iter().flatten().filter_map(|s| s.as_ref().ok()),
            scenario.params.max_acceleration(),
        );
        let tables = build_tables(
            &spectrum,
            scenario.simulation.n_eff,
            dv,
            a,
            scenario.table_samples,
            scenario.table_tolerance,
            cache.as_ref(),
        )?;
        let series = scenario
            .profiles
            .iter()
            .zip(&schedules)
            .map(|(spec, scheds)| Series {
                profile: spec.label(),
                points: scenario
                    .axis
                    .par_iter()
                    .zip(scheds.par_iter())
                    .map(|(&x, s)| {
                        run_point(
                            &scenario.simulation,
                            &spectrum,
                            &tables,
                            x,
                            s.as_ref(),
                            !options.no_timing,
                        )
                    })
                    .collect(),
            })
            .collect();
        Ok(SweepResult {
            scenario: scenario.clone(),
            n_bound: spectrum.n_bound(),
            tables: vec![
                TableSummary::of(&tables.boost),
                TableSummary::of(&tables.frame),
            ],
            series,
            oracle: None,
        })
    })
}

/// Largest allowed engine/oracle disagreement (absolute).
pub const ORACLE_AGREEMENT: f64 = 0.02;
pub const ORACLE_POINTS: usize = 5;

#[derive(Clone, Debug)]
pub struct OracleComparison {
    pub profile: String,
    pub axis_value: f64,
    pub engine_retention: f64,
    pub oracle_retention: f64,
    pub engine_ground: f64,
    pub oracle_ground: f64,
}

impl OracleComparison {
    pub fn max_difference(&self) -> f64 {
        (self.engine_retention - self.oracle_retention)
            .abs()
            .max((self.engine_ground - self.oracle_ground).abs())
    }
}

#[derive(Clone, Debug)]
pub struct OracleReport {
    pub comparisons: Vec<OracleComparison>,
    pub tolerance: f64,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.comparisons
            .iter()
            .all(|c| c.max_difference() <= self.tolerance)
    }
}

/// Compare the operator engine with the grid oracle on sampled points of
/// the scenario, using the coherent ground-state setting both share: no
/// dephasing, every bound state, first traversal only.
pub fn oracle_cross_check(
    scenario: &Scenario,
    options: &RunOptions,
    n_points: usize,
) -> Result<OracleReport> {
    let pool = pool(options.workers)?;
    let grid = scenario.grid()?;
    pool.install(|| {
        let spectrum = solve_bound_spectrum(&scenario.params, &grid)?;
        let a_max = scenario.params.max_acceleration();
        let one_way = Scenario {
            plan: TripPlan::one_way(),
            ..scenario.clone()
        };
        let mut candidates: Vec<(&ProfileSpec, f64, BoostSchedule)> = Vec::new();
        for spec in &scenario.profiles {
            for &x in &scenario.axis {
                if let Ok(s) = one_way.schedule_at(spec, x) {
                    if s.max_abs_acceleration() <= a_max {
                        candidates.push((spec, x, s));
                    }
                }
            }
        }
        if candidates.is_empty() {
            return Err(Error::Parameter(
                "no sweep point lies within the acceleration limit".into(),
            ));
        }
        let k = n_points.min(candidates.len()).max(1);
        let mut picks: Vec<usize> = (0..k)
            .map(|i| {
                if k == 1 {
                    0
                } else {
                    i * (candidates.len() - 1) / (k - 1)
                }
            })
            .collect();
        picks.dedup();
        let chosen: Vec<_> = picks.iter().map(|&i| &candidates[i]).collect();

        let n = spectrum.n_bound();
        let config = SimulationConfig {
            n_eff: n,
            gamma0: 0.0,
            initial: InitialState::Ground,
            record_trajectory: false,
        };
        let (dv, a) = extremes(chosen.iter().map(|c| &c.2), a_max);
        let cache = options
            .cache_dir
            .as_ref()
            .map(TableCache::new)
            .transpose()?;
        let tables = build_tables(
            &spectrum,
            n,
            dv,
            a,
            scenario.table_samples,
            scenario.table_tolerance,
            cache.as_ref(),
        )?;
        let comparisons = chosen
            .iter()
            .map(|(spec, x, sched)| {
                let e = evolve(&config, &spectrum, sched, &tables)?;
                let o = propagate_grid(
                    &scenario.params,
                    OracleInitial::Eigenstate(0),
                    sched,
                    OracleSettings::default(),
                )?;
                Ok(OracleComparison {
                    profile: spec.label(),
                    axis_value: *x,
                    engine_retention: e.retention,
                    oracle_retention: o.retention,
                    engine_ground: e.ground_population,
                    oracle_ground: o.ground_population(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(OracleReport {
            comparisons,
            tolerance: ORACLE_AGREEMENT,
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::config::validate_config;

    const SMALL: &str =
        "kind = ground_state_sweep\ntrap_depth_uK = 254\nn_eff = 12\ngamma0_over_2pi_kHz = 1.67\n\
                         profiles = sine, triangle\ndistance_mm = 0.2\nn_steps = 200\n\
                         axis_trip_time_ms = 0.05, 0.3, 0.5, 1.0\n";

    #[test]
    fn rows_in_axis_order_for_any_worker_count() {
        let s = validate_config(SMALL).unwrap();
        let one = run_scenario(
            &s,
            &RunOptions {
                workers: Some(1),
                no_timing: true,
                ..Default::default()
            },
        )
        .unwrap();
        let four = run_scenario(
            &s,
            &RunOptions {
                workers: Some(4),
                no_timing: true,
                ..Default::default()
            },
        )
        .unwrap();
        for (a, b) in one.series.iter().zip(&four.series) {
            let xs: Vec<f64> = a.points.iter().map(|p| p.axis_value).collect();
            assert_eq!(xs, s.axis);
            for (p, q) in a.points.iter().zip(&b.points) {
                assert_eq!(p.retention.to_bits(), q.retention.to_bits());
                assert_eq!(p.ground_pop.to_bits(), q.ground_pop.to_bits());
            }
        }
    }

    #[test]
    fn over_limit_point_is_recorded_not_fatal() {
        let s = validate_config(SMALL).unwrap();
        let r = run_scenario(
            &s,
            &RunOptions {
                no_timing: true,
                ..Default::default()
            },
        )
        .unwrap();
        let first = &r.series("sine").unwrap().points[0];
        assert!(matches!(first.status, PointStatus::OverLimit(_)));
        assert_eq!(first.retention, 0.0);
        assert!(first.t_eff_uk.is_nan());
        let last = &r.series("sine").unwrap().points[3];
        assert_eq!(last.status, PointStatus::Ok);
        assert!(last.retention > 0.5 && last.ground_pop.is_finite());
    }
}
