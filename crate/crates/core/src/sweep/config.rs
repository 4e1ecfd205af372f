//! Flat `key = value` scenario files. Units are part of the key name.
//!
//! ```text
//! kind = fdds_sweep
//! trap_depth_uK = 254
//! n_eff = 28
//! gamma0_over_2pi_kHz = 1.67
//! temperature_uK = 40
//! profiles = sine
//! distance_mm = 0.2
//! n_traversals = 20
//! trip_time_ms = 1
//! axis_fdds_kHz = linspace(50, 650, 151)
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use sha2::{Digest, Sha256};

use crate::constants::{ATOMIC_MASS_UNIT, DEFAULT_WAVELENGTH, RB87_MASS_AMU};
use crate::error::{Error, Result};
use crate::evolution::{InitialState, SimulationConfig};
use crate::profiles::{
    discretize, min_transport_time, BoostSchedule, ProfileKind, Stepping, TripPlan, VelocityProfile,
};
use crate::spectrum::{solve_bound_spectrum, PhysicalParams, SpatialGrid};
use crate::table::{DEFAULT_SAMPLES, DEFAULT_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScenarioKind {
    FddsSweep,
    TripTimeSweep,
    GroundStateSweep,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::FddsSweep => "fdds_sweep",
            ScenarioKind::TripTimeSweep => "trip_time_sweep",
            ScenarioKind::GroundStateSweep => "ground_state_sweep",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [
            ScenarioKind::FddsSweep,
            ScenarioKind::TripTimeSweep,
            ScenarioKind::GroundStateSweep,
        ]
        .into_iter()
        .find(|k| k.name() == s)
    }

    /// Axis key and its unit label.
    pub fn axis(self) -> (&'static str, &'static str) {
        match self {
            ScenarioKind::FddsSweep => ("axis_fdds_kHz", "f_dds_kHz"),
            _ => ("axis_trip_time_ms", "trip_time_ms"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Output {
    Retention,
    Temperature,
    GroundPopulation,
    Populations,
}

impl Output {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "retention" => Output::Retention,
            "temperature" => Output::Temperature,
            "ground_population" => Output::GroundPopulation,
            "populations" => Output::Populations,
            _ => return None,
        })
    }
}

/// The step count or rate held fixed while the trip time varies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FixedStepping {
    Steps(usize),
    /// Update rate (Hz).
    Rate(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProfileSpec {
    Builtin(ProfileKind),
    /// `v(t)` samples from a file, used as is (distance and trip time come
    /// from the file).
    Custom(PathBuf),
}

impl ProfileSpec {
    pub fn label(&self) -> String {
        match self {
            ProfileSpec::Builtin(k) => k.name().to_string(),
            ProfileSpec::Custom(p) => format!("custom:{}", p.display()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub params: PhysicalParams,
    pub grid_points: usize,
    pub simulation: SimulationConfig,
    pub profiles: Vec<ProfileSpec>,
    pub distance: f64,
    pub plan: TripPlan,
    /// Trip time for f_DDS sweeps (s).
    pub trip_time: Option<f64>,
    /// Stepping for trip-time sweeps.
    pub stepping: Option<FixedStepping>,
    /// Axis values in the axis key's units (kHz or ms).
    pub axis: Vec<f64>,
    pub outputs: Vec<Output>,
    pub table_samples: usize,
    pub table_tolerance: f64,
    /// Non-fatal remarks, e.g. points beyond the speed limit.
    pub warnings: Vec<String>,
    /// Normalized `key = value` lines after defaults.
    pub echo: Vec<(String, String)>,
}

impl Scenario {
    pub fn grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::for_params(
            &self.params,
            SpatialGrid::DEFAULT_WIDTH_FACTOR,
            self.grid_points,
        )
    }

    /// SHA-256 over the normalized configuration.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.echo {
            h.update(k.as_bytes());
            h.update(b"=");
            h.update(v.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Velocity profile at one axis point.
    pub fn profile_at(&self, spec: &ProfileSpec, axis_value: f64) -> Result<VelocityProfile> {
        match spec {
            ProfileSpec::Custom(p) => VelocityProfile::load_custom(p),
            ProfileSpec::Builtin(k) => {
                let trip = match self.kind {
                    ScenarioKind::FddsSweep => self.trip_time.expect("validated"),
                    _ => axis_value * 1e-3,
                };
                VelocityProfile::builtin(*k, self.distance, trip)
            }
        }
    }

    pub fn schedule_at(&self, spec: &ProfileSpec, axis_value: f64) -> Result<BoostSchedule> {
        let profile = self.profile_at(spec, axis_value)?;
        let stepping = match self.kind {
            ScenarioKind::FddsSweep => Stepping::UpdateRate(axis_value * 1e3),
            _ => match self.stepping.expect("validated") {
                FixedStepping::Steps(n) => Stepping::StepsPerTraversal(n),
                FixedStepping::Rate(f) => Stepping::UpdateRate(f),
            },
        };
        discretize(&profile, &self.plan, stepping)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.echo {
            writeln!(f, "{k} = {v}")?;
        }
        Ok(())
    }
}

const KNOWN_KEYS: &[&str] = &[
    "kind",
    "wavelength_nm",
    "atomic_mass_amu",
    "trap_depth_uK",
    "n_eff",
    "gamma0_over_2pi_kHz",
    "initial_state",
    "temperature_uK",
    "profiles",
    "custom_profile_file",
    "distance_mm",
    "n_traversals",
    "pause_ms",
    "trip_time_ms",
    "n_steps",
    "fdds_kHz",
    "axis_fdds_kHz",
    "axis_trip_time_ms",
    "outputs",
    "grid_points",
    "table_samples",
    "table_tolerance",
];

const REQUIRED_KEYS: &[&str] = &[
    "kind",
    "trap_depth_uK",
    "n_eff",
    "gamma0_over_2pi_kHz",
    "profiles",
    "distance_mm",
];

/// Unit suffix of a key, if it carries one.
fn key_unit(key: &str) -> Option<&'static str> {
    ["nm", "mm", "ms", "uK", "kHz", "amu"]
        .into_iter()
        .find(|u| key.ends_with(&format!("_{u}")))
}

struct Collector {
    errors: Vec<String>,
    values: BTreeMap<String, (usize, String)>,
}

impl Collector {
    fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(_, v)| v.as_str())
    }

    fn line(&self, key: &str) -> usize {
        self.values.get(key).map_or(0, |(l, _)| *l)
    }

    fn err(&mut self, key: &str, msg: impl fmt::Display) {
        let line = self.line(key);
        if line > 0 {
            self.errors.push(format!("line {line}: {key}: {msg}"));
        } else {
            self.errors.push(format!("{key}: {msg}"));
        }
    }

    /// A number, tolerating a trailing unit that matches the key.
    fn number(&mut self, key: &str) -> Option<f64> {
        let raw = self.raw(key)?.to_string();
        match parse_quantity(key, &raw) {
            Ok(x) => Some(x),
            Err(e) => {
                self.err(key, e);
                None
            }
        }
    }

    fn positive(&mut self, key: &str) -> Option<f64> {
        let x = self.number(key)?;
        if x > 0.0 {
            Some(x)
        } else {
            self.err(key, format!("must be positive, got {x}"));
            None
        }
    }

    fn count(&mut self, key: &str) -> Option<usize> {
        let raw = self.raw(key)?.to_string();
        match raw.parse::<usize>() {
            Ok(n) => Some(n),
            Err(_) => {
                self.err(key, format!("expected a whole number, got `{raw}`"));
                None
            }
        }
    }
}

fn parse_quantity(key: &str, raw: &str) -> std::result::Result<f64, String> {
    let raw = raw.trim();
    let split = raw
        .find(|c: char| c.is_alphabetic() && c != 'e' && c != 'E')
        .unwrap_or(raw.len());
    let (num, unit) = raw.split_at(split);
    let unit = unit.trim();
    if !unit.is_empty() {
        match key_unit(key) {
            Some(u) if u == unit => {}
            Some(u) => return Err(format!("unit `{unit}` does not match the key's unit `{u}`")),
            None => return Err(format!("key takes a plain number, found unit `{unit}`")),
        }
    }
    num.trim()
        .parse::<f64>()
        .map_err(|_| format!("expected a number, got `{raw}`"))
        .and_then(|x| {
            if x.is_finite() {
                Ok(x)
            } else {
                Err(format!("`{raw}` is not finite"))
            }
        })
}

/// `linspace(a, b, n)`, `logspace(a, b, n)` (endpoints, not exponents) or a
/// comma-separated list.
pub fn parse_axis(key: &str, raw: &str) -> std::result::Result<Vec<f64>, String> {
    let raw = raw.trim();
    let call = |name: &str| {
        raw.strip_prefix(name)
            .and_then(|r| r.trim().strip_prefix('('))
            .and_then(|r| r.strip_suffix(')'))
    };
    if let Some((name, args)) = ["linspace", "logspace"]
        .into_iter()
        .find_map(|n| call(n).map(|a| (n, a)))
    {
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("{name} takes (start, stop, count)"));
        }
        let a = parse_quantity(key, parts[0])?;
        let b = parse_quantity(key, parts[1])?;
        let n: usize = parts[2]
            .parse()
            .map_err(|_| format!("bad point count `{}`", parts[2]))?;
        if n == 0 {
            return Err("axis needs at least one point".into());
        }
        if n == 1 {
            return Ok(vec![a]);
        }
        let t = |i: usize| i as f64 / (n - 1) as f64;
        return if name == "linspace" {
            Ok((0..n)
                .map(|i| if i == n - 1 { b } else { a + (b - a) * t(i) })
                .collect())
        } else {
            if !(a > 0.0 && b > 0.0) {
                return Err("logspace endpoints must be positive".into());
            }
            Ok((0..n)
                .map(|i| {
                    if i == n - 1 {
                        b
                    } else {
                        a * (b / a).powf(t(i))
                    }
                })
                .collect())
        };
    }
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_quantity(key, s))
        .collect()
}

/// Parse and check a scenario, reporting every problem at once.
pub fn validate_config(text: &str) -> Result<Scenario> {
    let mut c = Collector {
        errors: Vec::new(),
        values: BTreeMap::new(),
    };
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            c.errors
                .push(format!("line {}: expected `key = value`", i + 1));
            continue;
        };
        let (k, v) = (k.trim().to_string(), v.trim().to_string());
        if !KNOWN_KEYS.contains(&k.as_str()) {
            let hint = KNOWN_KEYS
                .iter()
                .find(|known| known.starts_with(&format!("{k}_")));
            match hint {
                Some(h) => c.errors.push(format!(
                    "line {}: unknown key `{k}` (units belong in the name: `{h}`)",
                    i + 1
                )),
                None => c.errors.push(format!("line {}: unknown key `{k}`", i + 1)),
            }
            continue;
        }
        if c.values.insert(k.clone(), (i + 1, v)).is_some() {
            c.errors
                .push(format!("line {}: `{k}` given more than once", i + 1));
        }
    }
    for key in REQUIRED_KEYS {
        if c.raw(key).is_none() {
            c.errors.push(format!("missing required key `{key}`"));
        }
    }

    let kind = c.raw("kind").map(str::to_string).and_then(|k| {
        let parsed = ScenarioKind::parse(&k);
        if parsed.is_none() {
            c.err(
                "kind",
                format!("expected fdds_sweep, trip_time_sweep or ground_state_sweep, got `{k}`"),
            );
        }
        parsed
    });

    let wavelength = if c.raw("wavelength_nm").is_some() {
        c.positive("wavelength_nm").map(|x| x * 1e-9)
    } else {
        Some(DEFAULT_WAVELENGTH)
    };
    let mass = if c.raw("atomic_mass_amu").is_some() {
        c.positive("atomic_mass_amu")
    } else {
        Some(RB87_MASS_AMU)
    }
    .map(|x| x * ATOMIC_MASS_UNIT);
    let depth = c.positive("trap_depth_uK");
    let n_eff = c.count("n_eff");
    let gamma = c.number("gamma0_over_2pi_kHz").and_then(|g| {
        if g < 0.0 {
            c.err("gamma0_over_2pi_kHz", "must be non-negative");
            None
        } else {
            Some(2.0 * std::f64::consts::PI * g * 1e3)
        }
    });

    let default_initial = if kind == Some(ScenarioKind::GroundStateSweep) {
        "ground"
    } else {
        "thermal"
    };
    let initial_name = c
        .raw("initial_state")
        .unwrap_or(default_initial)
        .to_string();
    let initial = match initial_name.as_str() {
        "ground" => Some(InitialState::Ground),
        "thermal" => match c.raw("temperature_uK") {
            None => {
                c.errors
                    .push("thermal initial state needs `temperature_uK`".into());
                None
            }
            Some(_) => c
                .positive("temperature_uK")
                .map(|t| InitialState::Thermal(t * 1e-6)),
        },
        other => {
            c.err(
                "initial_state",
                format!("expected `thermal` or `ground`, got `{other}`"),
            );
            None
        }
    };
    if initial_name == "ground" && c.raw("temperature_uK").is_some() {
        c.err(
            "temperature_uK",
            "not used with a ground-state initial condition",
        );
    }

    let mut profiles = Vec::new();
    if let Some(raw) = c.raw("profiles").map(str::to_string) {
        for name in raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match ProfileKind::parse(name) {
                Some(ProfileKind::Custom) => match c.raw("custom_profile_file") {
                    Some(p) => profiles.push(ProfileSpec::Custom(PathBuf::from(p))),
                    None => c
                        .errors
                        .push("profile `custom` needs `custom_profile_file`".into()),
                },
                Some(k) => profiles.push(ProfileSpec::Builtin(k)),
                None => c.err("profiles", format!("unknown profile `{name}`")),
            }
        }
        if profiles.is_empty() {
            c.err("profiles", "no profile given");
        }
    }
    let distance = c.positive("distance_mm").map(|x| x * 1e-3);
    let n_traversals = if c.raw("n_traversals").is_some() {
        c.count("n_traversals")
    } else {
        Some(1)
    };
    let pause = if c.raw("pause_ms").is_some() {
        c.number("pause_ms").map(|x| x * 1e-3)
    } else {
        Some(0.0)
    };
    let plan = match (n_traversals, pause) {
        (Some(n), Some(p)) => match TripPlan::new(n, p) {
            Ok(plan) => Some(plan),
            Err(e) => {
                c.errors.push(e.to_string());
                None
            }
        },
        _ => None,
    };

    let mut trip_time = None;
    let mut stepping = None;
    let mut axis = None;
    if let Some(kind) = kind {
        let (axis_key, _) = kind.axis();
        let other_axis = if kind == ScenarioKind::FddsSweep {
            "axis_trip_time_ms"
        } else {
            "axis_fdds_kHz"
        };
        if c.raw(other_axis).is_some() {
            c.err(other_axis, format!("not valid for kind = {}", kind.name()));
        }
        match c.raw(axis_key).map(str::to_string) {
            None => c.errors.push(format!("missing required key `{axis_key}`")),
            Some(raw) => match parse_axis(axis_key, &raw) {
                Err(e) => c.err(axis_key, e),
                Ok(v) if v.is_empty() => c.err(axis_key, "axis is empty"),
                Ok(v) => {
                    if v.windows(2).any(|w| w[1] <= w[0]) {
                        c.err(axis_key, "axis values must be strictly increasing");
                    } else if v[0] <= 0.0 {
                        c.err(axis_key, "axis values must be positive");
                    } else {
                        axis = Some(v);
                    }
                }
            },
        }
        if kind == ScenarioKind::FddsSweep {
            match c.raw("trip_time_ms") {
                None => c.errors.push("fdds_sweep needs `trip_time_ms`".into()),
                Some(_) => trip_time = c.positive("trip_time_ms").map(|x| x * 1e-3),
            }
            for k in ["n_steps", "fdds_kHz"] {
                if c.raw(k).is_some() {
                    c.err(k, "not used by fdds_sweep (the axis sets the update rate)");
                }
            }
        } else {
            if c.raw("trip_time_ms").is_some() {
                c.err(
                    "trip_time_ms",
                    "not used when the trip time is the sweep axis",
                );
            }
            match (c.raw("n_steps").is_some(), c.raw("fdds_kHz").is_some()) {
                (true, false) => stepping = c.count("n_steps").map(FixedStepping::Steps),
                (false, true) => {
                    stepping = c.positive("fdds_kHz").map(|f| FixedStepping::Rate(f * 1e3))
                }
                (true, true) => c
                    .errors
                    .push("give either `n_steps` or `fdds_kHz`, not both".into()),
                (false, false) => c
                    .errors
                    .push(format!("{} needs `n_steps` or `fdds_kHz`", kind.name())),
            }
        }
    }

    let mut outputs = Vec::new();
    let out_raw = c
        .raw("outputs")
        .unwrap_or("retention, temperature, ground_population")
        .to_string();
    for name in out_raw.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match Output::parse(name) {
            Some(o) if !outputs.contains(&o) => outputs.push(o),
            Some(_) => {}
            None => c.err("outputs", format!("unknown output `{name}`")),
        }
    }
    outputs.sort();
    let grid_points = if c.raw("grid_points").is_some() {
        c.count("grid_points")
    } else {
        Some(SpatialGrid::DEFAULT_POINTS)
    };
    let table_samples = if c.raw("table_samples").is_some() {
        c.count("table_samples")
    } else {
        Some(DEFAULT_SAMPLES)
    };
    let table_tolerance = if c.raw("table_tolerance").is_some() {
        c.positive("table_tolerance")
    } else {
        Some(DEFAULT_TOLERANCE)
    };

    // physical checks that need the spectrum
    let params = match (wavelength, mass, depth) {
        (Some(w), Some(m), Some(d)) => {
            match PhysicalParams::new(w, m, d * 1e-6 * crate::constants::K_B) {
                Ok(p) => Some(p),
                Err(e) => {
                    c.errors.push(e.to_string());
                    None
                }
            }
        }
        _ => None,
    };
    if let (Some(p), Some(n), Some(gp)) = (params, n_eff, grid_points) {
        match SpatialGrid::for_params(&p, SpatialGrid::DEFAULT_WIDTH_FACTOR, gp)
            .and_then(|g| solve_bound_spectrum(&p, &g))
        {
            Ok(s) => {
                if n < 2 || n > s.n_bound() {
                    c.err(
                        "n_eff",
                        format!(
                            "must lie in 2..={} (bound states at this depth)",
                            s.n_bound()
                        ),
                    );
                }
            }
            Err(e) => c.err("grid_points", e),
        }
    }

    if !c.errors.is_empty() {
        return Err(Error::Config(c.errors));
    }

    let kind = kind.expect("checked");
    let mut scenario = Scenario {
        kind,
        params: params.expect("checked"),
        grid_points: grid_points.expect("checked"),
        simulation: SimulationConfig {
            n_eff: n_eff.expect("checked"),
            gamma0: gamma.expect("checked"),
            initial: initial.expect("checked"),
            record_trajectory: false,
        },
        profiles,
        distance: distance.expect("checked"),
        plan: plan.expect("checked"),
        trip_time,
        stepping,
        axis: axis.expect("checked"),
        outputs,
        table_samples: table_samples.expect("checked"),
        table_tolerance: table_tolerance.expect("checked"),
        warnings: Vec::new(),
        echo: Vec::new(),
    };
    scenario.echo = echo(&scenario);
    scenario.warnings = speed_warnings(&scenario);
    Ok(scenario)
}

fn echo(s: &Scenario) -> Vec<(String, String)> {
    let mut e: Vec<(String, String)> = Vec::new();
    let mut push = |k: &str, v: String| e.push((k.to_string(), v));
    push("kind", s.kind.name().into());
    push("wavelength_nm", format!("{}", s.params.wavelength() * 1e9));
    push(
        "atomic_mass_amu",
        format!("{}", s.params.atomic_mass() / ATOMIC_MASS_UNIT),
    );
    push("trap_depth_uK", format!("{}", s.params.trap_depth_uk()));
    push("n_eff", s.simulation.n_eff.to_string());
    push(
        "gamma0_over_2pi_kHz",
        format!(
            "{}",
            s.simulation.gamma0 / (2.0 * std::f64::consts::PI) / 1e3
        ),
    );
    match s.simulation.initial {
        InitialState::Ground => push("initial_state", "ground".into()),
        InitialState::Thermal(t) => {
            push("initial_state", "thermal".into());
            push("temperature_uK", format!("{}", t * 1e6));
        }
    }
    push(
        "profiles",
        s.profiles
            .iter()
            .map(|p| p.label())
            .collect::<Vec<_>>()
            .join(", "),
    );
    push("distance_mm", format!("{}", s.distance * 1e3));
    push("n_traversals", s.plan.n_traversals.to_string());
    push("pause_ms", format!("{}", s.plan.pause * 1e3));
    if let Some(t) = s.trip_time {
        push("trip_time_ms", format!("{}", t * 1e3));
    }
    match s.stepping {
        Some(FixedStepping::Steps(n)) => push("n_steps", n.to_string()),
        Some(FixedStepping::Rate(f)) => push("fdds_kHz", format!("{}", f / 1e3)),
        None => {}
    }
    let (axis_key, _) = s.kind.axis();
    push(
        axis_key,
        s.axis
            .iter()
            .map(|x| format!("{x}"))
            .collect::<Vec<_>>()
            .join(", "),
    );
    let outs: Vec<&str> = s
        .outputs
        .iter()
        .map(|o| match o {
            Output::Retention => "retention",
            Output::Temperature => "temperature",
            Output::GroundPopulation => "ground_population",
            Output::Populations => "populations",
        })
        .collect();
    push("outputs", outs.join(", "));
    push("grid_points", s.grid_points.to_string());
    push("table_samples", s.table_samples.to_string());
    push("table_tolerance", format!("{:e}", s.table_tolerance));
    e
}

/// One warning per axis point whose schedule would exceed `a_max`.
fn speed_warnings(s: &Scenario) -> Vec<String> {
    let a_max = s.params.max_acceleration();
    let (_, unit) = s.kind.axis();
    let mut out = Vec::new();
    for spec in &s.profiles {
        let ProfileSpec::Builtin(kind) = spec else {
            continue;
        };
        if let Ok(t_min) = min_transport_time(*kind, s.distance, a_max) {
            for &x in &s.axis {
                let over = match s.kind {
                    ScenarioKind::FddsSweep => s.trip_time.is_some_and(|t| t < t_min),
                    _ => x * 1e-3 < t_min,
                };
                let steps_over = s
                    .schedule_at(spec, x)
                    .map(|sch| sch.max_abs_acceleration() > a_max)
                    .unwrap_or(false);
                if over || steps_over {
                    out.push(format!(
                        "{}: {unit} = {x} exceeds a_max; retention recorded as 0",
                        kind.name()
                    ));
                }
            }
        }
    }
    out
}
