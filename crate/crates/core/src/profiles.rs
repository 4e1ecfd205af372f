//! Conveyor velocity waveforms and their digitization into boost schedules.
//!
//! A DDS updates the lattice detuning at discrete ticks, so the lattice
//! velocity is a staircase. Each tick is a velocity boost `δv_i` of the
//! lattice frame, followed by a dwell `δt` at constant velocity.

use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProfileKind {
    Triangle,
    Sine,
    Custom,
}

impl ProfileKind {
    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Triangle => "triangle",
            ProfileKind::Sine => "sine",
            ProfileKind::Custom => "custom",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "triangle" => Some(ProfileKind::Triangle),
            "sine" => Some(ProfileKind::Sine),
            "custom" => Some(ProfileKind::Custom),
            _ => None,
        }
    }
}

impl std::fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One-way velocity waveform `v(t)` on `[0, Δt]`.
#[derive(Clone, Debug, PartialEq)]
pub struct VelocityProfile {
    kind: ProfileKind,
    distance: f64,
    trip_time: f64,
    /// `(t, v)` samples for custom profiles, times starting at 0.
    samples: Vec<(f64, f64)>,
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "{name} must be positive, got {v}"
        )))
    }
}

impl VelocityProfile {
    /// Linear ramp up to `v_max = 2Δx/Δt` at `Δt/2` and back down.
    pub fn triangle(distance: f64, trip_time: f64) -> Result<Self> {
        check_positive("distance", distance)?;
        check_positive("trip time", trip_time)?;
        Ok(Self {
            kind: ProfileKind::Triangle,
            distance,
            trip_time,
            samples: Vec::new(),
        })
    }

    /// `v(t) = v_max sin²(πt/Δt)` with `v_max = 2Δx/Δt`.
    pub fn sine(distance: f64, trip_time: f64) -> Result<Self> {
        check_positive("distance", distance)?;
        check_positive("trip time", trip_time)?;
        Ok(Self {
            kind: ProfileKind::Sine,
            distance,
            trip_time,
            samples: Vec::new(),
        })
    }

    pub fn builtin(kind: ProfileKind, distance: f64, trip_time: f64) -> Result<Self> {
        match kind {
            ProfileKind::Triangle => Self::triangle(distance, trip_time),
            ProfileKind::Sine => Self::sine(distance, trip_time),
            ProfileKind::Custom => Err(Error::Capability(
                "custom profiles are built from samples".into(),
            )),
        }
    }

    /// Piecewise-linear profile through `(t, v)` samples. Times must be
    /// strictly increasing and the first and last velocities zero.
    pub fn custom(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::ProfileFormat("need at least two samples".into()));
        }
        if samples
            .iter()
            .any(|(t, v)| !t.is_finite() || !v.is_finite())
        {
            return Err(Error::ProfileFormat("non-finite sample".into()));
        }
        if samples.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::ProfileFormat(
                "times must be strictly increasing".into(),
            ));
        }
        if samples[0].1 != 0.0 || samples[samples.len() - 1].1 != 0.0 {
            return Err(Error::ProfileFormat(
                "first and last velocity must be 0".into(),
            ));
        }
        let t0 = samples[0].0;
        let samples: Vec<(f64, f64)> = samples.into_iter().map(|(t, v)| (t - t0, v)).collect();
        let trip_time = samples[samples.len() - 1].0;
        let distance = samples
            .windows(2)
            .map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0))
            .sum();
        Ok(Self {
            kind: ProfileKind::Custom,
            distance,
            trip_time,
            samples,
        })
    }

    /// Parse a two-column text profile: time (s), velocity (m/s).
    ///
    /// Columns may be separated by whitespace or commas; `#` starts a comment.
    pub fn parse_custom(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .collect();
            if cols.len() != 2 {
                return Err(Error::ProfileFormat(format!(
                    "line {}: expected 2 columns, got {}",
                    lineno + 1,
                    cols.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::ProfileFormat(format!("line {}: {e}", lineno + 1)))
            };
            samples.push((parse(cols[0])?, parse(cols[1])?));
        }
        Self::custom(samples)
    }

    pub fn load_custom(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse_custom(&std::fs::read_to_string(path)?)
    }

    pub fn kind(&self) -> ProfileKind {
        self.kind
    }

    pub fn distance(&self) -> f64 {
        self.distance
    }

    pub fn trip_time(&self) -> f64 {
        self.trip_time
    }

    pub fn v_max(&self) -> f64 {
        match self.kind {
            ProfileKind::Triangle | ProfileKind::Sine => 2.0 * self.distance / self.trip_time,
            ProfileKind::Custom => self.samples.iter().map(|s| s.1.abs()).fold(0.0, f64::max),
        }
    }

    /// Largest |dv/dt| of the continuous waveform.
    pub fn peak_acceleration(&self) -> f64 {
        let (dx, dt) = (self.distance, self.trip_time);
        match self.kind {
            ProfileKind::Triangle => 4.0 * dx / (dt * dt),
            ProfileKind::Sine => 2.0 * PI * dx / (dt * dt),
            ProfileKind::Custom => self
                .samples
                .windows(2)
                .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
                .fold(0.0, f64::max),
        }
    }

    pub fn velocity(&self, t: f64) -> f64 {
        let dt = self.trip_time;
        if !(0.0..=dt).contains(&t) {
            return 0.0;
        }
        let v_max = self.v_max();
        match self.kind {
            ProfileKind::Triangle => v_max * (1.0 - (2.0 * t / dt - 1.0).abs()),
            ProfileKind::Sine => {
                let s = (PI * t / dt).sin();
                v_max * s * s
            }
            ProfileKind::Custom => {
                let k = self
                    .samples
                    .partition_point(|s| s.0 <= t)
                    .clamp(1, self.samples.len() - 1);
                let (t0, v0) = self.samples[k - 1];
                let (t1, v1) = self.samples[k];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// dv/dt; at a kink the right-hand derivative.
    pub fn acceleration(&self, t: f64) -> f64 {
        let dt = self.trip_time;
        if !(0.0..dt).contains(&t) {
            return 0.0;
        }
        match self.kind {
            ProfileKind::Triangle => {
                let a = self.peak_acceleration();
                if t < dt / 2.0 {
                    a
                } else {
                    -a
                }
            }
            ProfileKind::Sine => self.peak_acceleration() * (2.0 * PI * t / dt).sin(),
            ProfileKind::Custom => {
                let k = self
                    .samples
                    .partition_point(|s| s.0 <= t)
                    .clamp(1, self.samples.len() - 1);
                let (t0, v0) = self.samples[k - 1];
                let (t1, v1) = self.samples[k];
                (v1 - v0) / (t1 - t0)
            }
        }
    }

    /// Times at which the acceleration jumps (including the endpoints,
    /// where it jumps from or to zero).
    pub fn acceleration_discontinuities(&self) -> Vec<f64> {
        match self.kind {
            ProfileKind::Triangle => vec![0.0, self.trip_time / 2.0, self.trip_time],
            ProfileKind::Sine => Vec::new(),
            ProfileKind::Custom => {
                let slopes: Vec<f64> = std::iter::once(0.0)
                    .chain(
                        self.samples
                            .windows(2)
                            .map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)),
                    )
                    .chain(std::iter::once(0.0))
                    .collect();
                self.samples
                    .iter()
                    .zip(slopes.windows(2))
                    .filter(|(_, s)| {
                        (s[1] - s[0]).abs() > 1e-12 * (s[0].abs() + s[1].abs()).max(1e-300)
                    })
                    .map(|(p, _)| p.0)
                    .collect()
            }
        }
    }
}

/// Shortest one-way trip over `distance` whose peak acceleration stays
/// within `a_max`.
pub fn min_transport_time(kind: ProfileKind, distance: f64, a_max: f64) -> Result<f64> {
    check_positive("distance", distance)?;
    check_positive("a_max", a_max)?;
    match kind {
        ProfileKind::Sine => Ok((2.0 * PI * distance / a_max).sqrt()),
        ProfileKind::Triangle => Ok((4.0 * distance / a_max).sqrt()),
        ProfileKind::Custom => Err(Error::Capability(
            "minimum transport time has no closed form for custom profiles".into(),
        )),
    }
}

/// AOM detuning `Δf = 2v/λ` that moves the lattice at velocity `v`.
pub fn aom_frequency_difference(velocity: f64, wavelength: f64) -> f64 {
    2.0 * velocity / wavelength
}

/// Back-and-forth transport: traversals alternate direction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TripPlan {
    pub n_traversals: usize,
    /// Dwell at rest between traversals (s).
    pub pause: f64,
}

impl TripPlan {
    pub fn new(n_traversals: usize, pause: f64) -> Result<Self> {
        if n_traversals == 0 {
            return Err(Error::Parameter(
                "a trip plan needs at least one traversal".into(),
            ));
        }
        if !(pause >= 0.0 && pause.is_finite()) {
            return Err(Error::Parameter(format!(
                "pause must be non-negative, got {pause}"
            )));
        }
        Ok(Self {
            n_traversals,
            pause,
        })
    }

    pub fn one_way() -> Self {
        Self {
            n_traversals: 1,
            pause: 0.0,
        }
    }

    /// `round_trips` there-and-back journeys with no pause.
    pub fn round_trips(round_trips: usize) -> Result<Self> {
        Self::new(2 * round_trips, 0.0)
    }

    pub fn direction(&self, traversal: usize) -> f64 {
        if traversal % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Stepping {
    /// DDS update rate `f_DDS` (Hz).
    UpdateRate(f64),
    /// Fixed number of frequency updates per one-way traversal.
    StepsPerTraversal(usize),
}

pub const MIN_STEPS_PER_TRAVERSAL: usize = 4;

/// Digitized motion: dwell `δt` and the ordered velocity increments.
#[derive(Clone, Debug, PartialEq)]
pub struct BoostSchedule {
    dt: f64,
    boosts: Vec<f64>,
    steps_per_traversal: usize,
}

impl BoostSchedule {
    pub fn new(dt: f64, boosts: Vec<f64>) -> Result<Self> {
        check_positive("time step", dt)?;
        let n = boosts.len();
        Ok(Self {
            dt,
            boosts,
            steps_per_traversal: n,
        })
    }

    pub fn empty(dt: f64) -> Result<Self> {
        Self::new(dt, Vec::new())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// The update rate actually realised, `1/δt`.
    pub fn effective_update_rate(&self) -> f64 {
        1.0 / self.dt
    }

    pub fn steps_per_traversal(&self) -> usize {
        self.steps_per_traversal
    }

    pub fn boosts(&self) -> &[f64] {
        &self.boosts
    }

    pub fn len(&self) -> usize {
        self.boosts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boosts.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.boosts.len() as f64
    }

    /// Effective accelerations `a_i = δv_i / δt`.
    pub fn accelerations(&self) -> Vec<f64> {
        self.boosts.iter().map(|dv| dv / self.dt).collect()
    }

    /// Lattice velocity after each boost.
    pub fn cumulative_velocities(&self) -> Vec<f64> {
        self.boosts
            .iter()
            .scan(0.0, |v, dv| {
                *v += dv;
                Some(*v)
            })
            .collect()
    }

    /// Lattice displacement, each post-boost velocity held for `δt`.
    pub fn net_displacement(&self) -> f64 {
        self.dt * self.cumulative_velocities().iter().sum::<f64>()
    }

    pub fn max_abs_boost(&self) -> f64 {
        self.boosts.iter().map(|b| b.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_acceleration(&self) -> f64 {
        self.max_abs_boost() / self.dt
    }

    /// Largest `|δv|` among the steps before the first one beyond `a_max`;
    /// later steps never run.
    pub fn max_reachable_boost(&self, a_max: f64) -> f64 {
        let limit = a_max * self.dt;
        self.boosts
            .iter()
            .map(|b| b.abs())
            .take_while(|&b| b <= limit)
            .fold(0.0, f64::max)
    }
}

/// Sample `profile` at the DDS ticks of every traversal in `plan`.
///
/// Velocities are taken at the right end of each interval, so the first
/// boost is `v(δt) - v(0)`. With an update rate that does not divide the
/// trip time, the step count is rounded down and `δt` stretched so each
/// traversal still lasts exactly `Δt`.
pub fn discretize(
    profile: &VelocityProfile,
    plan: &TripPlan,
    stepping: Stepping,
) -> Result<BoostSchedule> {
    let trip = profile.trip_time();
    let n = match stepping {
        Stepping::UpdateRate(f) => {
            check_positive("update rate", f)?;
            (f * trip + 1e-9).floor() as usize
        }
        Stepping::StepsPerTraversal(n) => n,
    };
    if n < MIN_STEPS_PER_TRAVERSAL {
        return Err(Error::Parameter(format!(
            "{n} steps per traversal; at least {MIN_STEPS_PER_TRAVERSAL} are required"
        )));
    }
    let dt = trip / n as f64;
    let levels: Vec<f64> = (0..=n)
        .map(|i| {
            if i == n {
                0.0
            } else {
                profile.velocity(i as f64 * dt)
            }
        })
        .collect();
    let pause_steps = (plan.pause / dt).round() as usize;
    let mut boosts = Vec::with_capacity(plan.n_traversals * (n + pause_steps));
    for k in 0..plan.n_traversals {
        if k > 0 {
            boosts.extend(std::iter::repeat_n(0.0, pause_steps));
        }
        let sign = plan.direction(k);
        boosts.extend(levels.windows(2).map(|w| sign * (w[1] - w[0])));
    }
    Ok(BoostSchedule {
        dt,
        boosts,
        steps_per_traversal: n,
    })
}
