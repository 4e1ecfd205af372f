//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria listed in `EXPECTED_FAILURES` are reported but do not fail the
//! target; any other failure, or a panic, does.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use proptest::test_runner::{TestError, TestRunner};

use conveyor::constants::K_B;
use conveyor::evolution::{evolve, InitialState, OperatorTables, SimulationConfig};
use conveyor::gamma0::{estimate_gamma0, Amplitude, TransverseParams};
use conveyor::oracle::{propagate_grid, OracleInitial, OracleSettings};
use conveyor::profiles::{
    discretize, min_transport_time, ProfileKind, Stepping, TripPlan, VelocityProfile,
};
use conveyor::sweep::{preset, run_scenario, validate_config, RunOptions, Series, SweepResult};
use conveyor::{solve_bound_spectrum, trap_constants, PhysicalParams, SpatialGrid};

const EXPECTED_FAILURES: &[usize] = &[5, 7, 8];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(x: f64, target: f64, rel: f64) -> bool {
    (x / target - 1.0).abs() <= rel
}

fn run_preset(name: &str) -> SweepResult {
    let scenario = validate_config(preset(name).unwrap()).unwrap();
    run_scenario(
        &scenario,
        &RunOptions {
            no_timing: true,
            ..RunOptions::default()
        },
    )
    .unwrap()
}

fn params() -> PhysicalParams {
    PhysicalParams::reference()
}

fn criterion_1() -> Outcome {
    let c = trap_constants(&params());
    let ok_f = within(c.f_trap, 207e3, 0.02);
    let ok_a = within(c.a_max, 1.43e5, 0.01);
    outcome(
        ok_f && ok_a,
        format!(
            "f_trap = {:.2} kHz, a_max = {:.4e} m/s^2",
            c.f_trap / 1e3,
            c.a_max
        ),
    )
}

fn criterion_2() -> Outcome {
    let t = min_transport_time(ProfileKind::Sine, 0.2e-3, params().max_acceleration()).unwrap();
    outcome(
        within(t, 0.094e-3, 0.02),
        format!("sine dt_min = {:.4} ms", t * 1e3),
    )
}

fn criterion_3() -> Outcome {
    let p = params();
    let s = solve_bound_spectrum(&p, &SpatialGrid::default_for(&p)).unwrap();
    let uk = s.ground_spacing() / K_B * 1e6;
    outcome(within(uk, 10.0, 0.15), format!("E2 - E1 = {uk:.3} uK"))
}

fn criterion_4() -> Outcome {
    let t = TransverseParams::new(2.0 * PI * 1.6e3, 40e-6).unwrap();
    let g = estimate_gamma0(&params(), t, Amplitude::FullDifference).unwrap();
    let ratio = g.gamma0 / (2.0 * PI * 1.6e3);
    outcome(
        (0.5..=2.0).contains(&ratio),
        format!(
            "gamma0/2pi = {:.3} kHz (ratio {ratio:.2})",
            g.gamma0 / (2.0 * PI) / 1e3
        ),
    )
}

fn points_in(
    series: &Series,
    lo: f64,
    hi: f64,
) -> impl Iterator<Item = &conveyor::sweep::PointResult> {
    series
        .points
        .iter()
        .filter(move |p| p.axis_value >= lo && p.axis_value <= hi)
}

fn criterion_5(r: &SweepResult, f_trap_khz: f64) -> Outcome {
    let s = r.series("sine").unwrap();
    let dip = points_in(s, 120.0, f_trap_khz)
        .map(|p| p.retention)
        .fold(f64::INFINITY, f64::min);
    let at_trap = points_in(s, 202.0, 212.0)
        .map(|p| p.retention)
        .fold(f64::NEG_INFINITY, f64::max);
    let a = at_trap - dip >= 0.3;
    let high = points_in(s, 1.5 * f_trap_khz, f64::INFINITY)
        .map(|p| p.retention)
        .fold(f64::INFINITY, f64::min);
    let b = high > 0.9;
    let twice = points_in(s, 0.95 * 2.0 * f_trap_khz, 1.05 * 2.0 * f_trap_khz)
        .map(|p| p.retention)
        .fold(f64::INFINITY, f64::min);
    let c = twice > 0.9;
    outcome(
        a && b && c,
        format!(
            "(a) dip min {dip:.3} vs {at_trap:.3} near f_trap, contrast {:.3} [{}]; (b) min above 1.5 f_trap {high:.3} [{}]; (c) min near 2 f_trap {twice:.3} [{}]",
            at_trap - dip,
            if a { "ok" } else { "fail" },
            if b { "ok" } else { "fail" },
            if c { "ok" } else { "fail" }
        ),
    )
}

fn criterion_6(r: &SweepResult, f_trap_khz: f64) -> Outcome {
    let s = r.series("sine").unwrap();
    let dip = points_in(s, 120.0, f_trap_khz)
        .min_by(|a, b| a.retention.total_cmp(&b.retention))
        .unwrap()
        .axis_value;
    let hot = points_in(s, dip, 1.1 * f_trap_khz)
        .filter(|p| p.axis_value > dip)
        .map(|p| p.t_eff_uk)
        .filter(|t| t.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let cold = points_in(s, 120.0, dip)
        .filter(|p| p.axis_value < dip)
        .map(|p| p.t_eff_uk)
        .filter(|t| t.is_finite())
        .fold(f64::INFINITY, f64::min);
    outcome(
        hot > 40.0 && cold < 40.0,
        format!(
            "dip at {dip:.0} kHz; max T_eff above it {hot:.1} uK, min T_eff below it {cold:.1} uK"
        ),
    )
}

/// First trip time at which retention reaches `level`, interpolated in log Δt.
fn first_crossing(series: &Series, level: f64) -> Option<f64> {
    let p = &series.points;
    let i = p.iter().position(|x| x.retention >= level)?;
    if i == 0 {
        return Some(p[0].axis_value);
    }
    let (a, b) = (&p[i - 1], &p[i]);
    let f = (level - a.retention) / (b.retention - a.retention);
    Some((a.axis_value.ln() + f * (b.axis_value.ln() - a.axis_value.ln())).exp())
}

fn criterion_7() -> Outcome {
    let r = run_preset("fig3b");
    let sine = first_crossing(r.series("sine").unwrap(), 0.9);
    let tri = first_crossing(r.series("triangle").unwrap(), 0.9);
    match (sine, tri) {
        (Some(s), Some(t)) => outcome(
            s / t <= 0.85,
            format!(
                "90% retention at {s:.3} ms (sine) and {t:.3} ms (triangle), ratio {:.3}",
                s / t
            ),
        ),
        _ => outcome(
            false,
            format!("a curve never reaches 90%: sine {sine:?}, triangle {tri:?}"),
        ),
    }
}

fn local_maxima(y: &[f64]) -> usize {
    y.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count()
}

fn criterion_8() -> Outcome {
    let r = run_preset("fig5");
    let dt_min =
        min_transport_time(ProfileKind::Sine, 0.2e-3, params().max_acceleration()).unwrap() * 1e3;
    let sine = r.series("sine").unwrap();
    let tri = r.series("triangle").unwrap();

    let worst_sine = points_in(sine, 1.5 * dt_min, 1.0)
        .min_by(|a, b| a.ground_pop.total_cmp(&b.ground_pop))
        .unwrap();
    let a = worst_sine.ground_pop >= 0.95;

    let tri_ground: Vec<f64> = tri
        .points
        .iter()
        .filter(|p| p.retention > 0.0)
        .map(|p| p.ground_pop)
        .collect();
    let maxima = local_maxima(&tri_ground);
    let b = maxima >= 2;

    let tri_hot = tri
        .points
        .iter()
        .filter(|p| p.axis_value < 0.3)
        .map(|p| p.t_eff_uk)
        .filter(|t| t.is_finite())
        .fold(0.0, f64::max);
    let sine_hot = points_in(sine, 1.5 * dt_min, 0.3)
        .filter(|p| p.axis_value < 0.3)
        .map(|p| p.t_eff_uk)
        .filter(|t| t.is_finite())
        .fold(0.0, f64::max);
    let c = tri_hot >= 50.0 && sine_hot < 5.0;
    outcome(
        a && b && c,
        format!(
            "sine min ground pop {:.3} at {:.3} ms [{}]; triangle local maxima {maxima} [{}]; T_eff below 0.3 ms: triangle max {tri_hot:.1} uK, sine max {sine_hot:.2} uK [{}]",
            worst_sine.ground_pop,
            worst_sine.axis_value,
            if a { "ok" } else { "fail" },
            if b { "ok" } else { "fail" },
            if c { "ok" } else { "fail" }
        ),
    )
}

fn criterion_9() -> Outcome {
    let p = params();
    let s = solve_bound_spectrum(&p, &SpatialGrid::default_for(&p)).unwrap();
    let n = s.n_bound();
    let dt_min = min_transport_time(ProfileKind::Sine, 0.2e-3, p.max_acceleration()).unwrap();
    let cfg = SimulationConfig {
        n_eff: n,
        gamma0: 0.0,
        initial: InitialState::Ground,
        record_trajectory: false,
    };
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for m in [3.0, 5.0, 10.0] {
        let profile = VelocityProfile::sine(0.2e-3, m * dt_min).unwrap();
        let sched = discretize(
            &profile,
            &TripPlan::one_way(),
            Stepping::StepsPerTraversal(200),
        )
        .unwrap();
        let tables = OperatorTables::for_schedules(&s, n, [&sched]).unwrap();
        let e = evolve(&cfg, &s, &sched, &tables).unwrap();
        let o = propagate_grid(
            &p,
            OracleInitial::Eigenstate(0),
            &sched,
            OracleSettings::default(),
        )
        .unwrap();
        let d = (e.retention - o.retention)
            .abs()
            .max((e.ground_population - o.ground_population()).abs());
        worst = worst.max(d);
        parts.push(format!(
            "{m}x: ground {:.4}/{:.4}",
            e.ground_population,
            o.ground_population()
        ));
    }
    outcome(
        worst <= 0.02,
        format!("{}; worst difference {worst:.2e}", parts.join(", ")),
    )
}

fn criterion_10() -> Outcome {
    use common::*;
    let mut failures = Vec::new();
    fn check<T: std::fmt::Debug>(
        failures: &mut Vec<String>,
        name: &str,
        r: Result<(), TestError<T>>,
    ) {
        match r {
            Ok(()) => {}
            Err(TestError::Abort(why)) => failures.push(format!("{name}: aborted, {why}")),
            Err(TestError::Fail(why, input)) => {
                let input: String = format!("{input:?}").chars().take(200).collect();
                failures.push(format!("{name}: {why} for {input}"));
            }
        }
    }
    let mut runner = TestRunner::new(config(24));
    check(
        &mut failures,
        "evolution",
        runner.run(
            &(density_strategy(N_EFF), 0.0f64..4e4, schedule_strategy()),
            |(rho, g, (dt, b))| evolution_invariants(rho, g, dt, &b),
        ),
    );
    check(
        &mut failures,
        "dephasing PSD",
        runner.run(
            &(proptest::collection::vec(0.0f64..1e5, 2..40), 0.0f64..1e-4),
            |(r, dt)| dephasing_matrix_is_psd(&r, dt),
        ),
    );
    check(
        &mut failures,
        "boost adjoint",
        runner.run(&(-0.5f64..0.5), boost_adjoint_symmetry),
    );
    check(
        &mut failures,
        "interpolation",
        runner.run(
            &(-MAX_DV..MAX_DV, -ACCEL_FRACTION..ACCEL_FRACTION),
            |(dv, a)| interpolation_error(dv, a),
        ),
    );
    let mut runner = TestRunner::new(config(8));
    check(
        &mut failures,
        "identities and orthonormality",
        runner.run(&(120.0f64..420.0, 0.1f64..1.0), |(d, f)| {
            identities_at_zero(d, f)
        }),
    );
    if failures.is_empty() {
        outcome(
            true,
            "trace, Hermiticity, PSD, M_d, identities, interpolation, adjoint, orthonormality",
        )
    } else {
        outcome(false, failures.join("; "))
    }
}

fn main() -> ExitCode {
    let f_trap_khz = trap_constants(&params()).f_trap / 1e3;
    let mut unexpected = Vec::new();
    let mut report = |n: usize, seconds: f64, o: Outcome| {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:2}: {verdict} ({seconds:.1} s) {}", o.detail);
        if !o.pass && !EXPECTED_FAILURES.contains(&n) {
            unexpected.push(n);
        }
    };
    let timed = |f: &dyn Fn() -> Outcome| {
        let t = Instant::now();
        let o = f();
        (t.elapsed().as_secs_f64(), o)
    };
    for (n, f) in [
        (1, criterion_1 as fn() -> Outcome),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
    ] {
        let (t, o) = timed(&f);
        report(n, t, o);
    }
    let t = Instant::now();
    let fig3a = run_preset("fig3a");
    let shared = t.elapsed().as_secs_f64();
    report(5, shared, criterion_5(&fig3a, f_trap_khz));
    report(6, 0.0, criterion_6(&fig3a, f_trap_khz));
    for (n, f) in [
        (7, criterion_7 as fn() -> Outcome),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
    ] {
        let (t, o) = timed(&f);
        report(n, t, o);
    }
    if unexpected.is_empty() {
        println!("acceptance: no failures outside the expected set {EXPECTED_FAILURES:?}");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: unexpected failures {unexpected:?}");
        ExitCode::FAILURE
    }
}
