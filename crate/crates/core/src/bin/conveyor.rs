use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use conveyor::constants::{ATOMIC_MASS_UNIT, DEFAULT_WAVELENGTH, K_B, RB87_MASS_AMU};
use conveyor::gamma0::{estimate_gamma0, Amplitude, TransverseParams};
use conveyor::sweep::output::{wants_populations, write_oracle_report};
use conveyor::sweep::runner::ORACLE_POINTS;
use conveyor::sweep::{
    oracle_cross_check, preset, run_scenario, validate_config, write_csv, write_populations,
    RunOptions, Scenario,
};
use conveyor::{solve_bound_spectrum, trap_constants, Error, PhysicalParams, SpatialGrid};

#[derive(Parser)]
#[command(
    name = "conveyor",
    version,
    about = "Heating and retention of atoms transported in a moving optical lattice"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Bound states, trap frequency and acceleration limit of one well.
    Spectrum(SpectrumArgs),
    /// Run a scenario file or preset and write CSV.
    Sweep(SweepArgs),
    /// Dephasing rate estimate from transverse motion.
    #[command(name = "estimate-gamma0")]
    EstimateGamma0(Gamma0Args),
    /// Compare the operator engine with the grid oracle on sampled points.
    #[command(name = "oracle-check")]
    OracleCheck(ScenarioArgs),
}

#[derive(Args)]
struct Physics {
    #[arg(long, default_value_t = 254.0)]
    trap_depth_uk: f64,
    #[arg(long, default_value_t = DEFAULT_WAVELENGTH * 1e9)]
    wavelength_nm: f64,
    #[arg(long, default_value_t = RB87_MASS_AMU)]
    mass_amu: f64,
}

impl Physics {
    fn params(&self) -> conveyor::Result<PhysicalParams> {
        PhysicalParams::new(
            self.wavelength_nm * 1e-9,
            self.mass_amu * ATOMIC_MASS_UNIT,
            self.trap_depth_uk * 1e-6 * K_B,
        )
    }
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    physics: Physics,
    #[arg(long, default_value_t = SpatialGrid::DEFAULT_POINTS)]
    grid_points: usize,
    /// Write the level table as CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_parser = ["fig3a", "fig3b", "fig5", "fig6"])]
    preset: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Directory for cached operator tables.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cross-check sampled points against the grid oracle.
    #[arg(long)]
    oracle: bool,
    /// Write wall_ms as 0 for reproducible files.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct Gamma0Args {
    #[command(flatten)]
    physics: Physics,
    #[arg(long, default_value_t = 40.0)]
    temperature_uk: f64,
    /// Transverse trap frequency ω_r/2π.
    #[arg(long, default_value_t = 1.6)]
    transverse_khz: f64,
    /// Use half the frequency excursion as the oscillation amplitude.
    #[arg(long)]
    half_amplitude: bool,
}

fn load_scenario(args: &ScenarioArgs) -> conveyor::Result<Scenario> {
    let text = match (&args.config, &args.preset) {
        (Some(path), _) => fs::read_to_string(path)
            .map_err(|e| Error::Config(vec![format!("cannot read {}: {e}", path.display())]))?,
        (None, Some(name)) => preset(name)?.to_string(),
        (None, None) => unreachable!("clap requires one"),
    };
    validate_config(&text)
}

fn options(args: &ScenarioArgs, no_timing: bool) -> RunOptions {
    RunOptions {
        workers: args.workers,
        cache_dir: args.cache_dir.clone(),
        no_timing,
    }
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(fs::File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn spectrum(args: SpectrumArgs) -> conveyor::Result<ExitCode> {
    let p = args.physics.params()?;
    let grid = SpatialGrid::for_params(&p, SpatialGrid::DEFAULT_WIDTH_FACTOR, args.grid_points)?;
    let s = solve_bound_spectrum(&p, &grid)?;
    let c = trap_constants(&p);
    eprintln!("bound states      {}", s.n_bound());
    eprintln!("f_trap            {:.3} kHz", c.f_trap / 1e3);
    eprintln!("a_max             {:.5e} m/s^2", c.a_max);
    eprintln!("E2 - E1           {:.4} uK", s.ground_spacing() / K_B * 1e6);
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "level,energy_uK,above_bottom_uK")?;
    for (i, e) in s.energies().iter().enumerate() {
        writeln!(
            out,
            "{},{:.6},{:.6}",
            i + 1,
            e / K_B * 1e6,
            (e + p.trap_depth()) / K_B * 1e6
        )?;
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn sweep(args: SweepArgs) -> conveyor::Result<ExitCode> {
    let scenario = load_scenario(&args.scenario)?;
    for w in &scenario.warnings {
        eprintln!("warning: {w}");
    }
    let opts = options(&args.scenario, args.no_timing);
    let mut result = run_scenario(&scenario, &opts)?;
    let mut code = ExitCode::SUCCESS;
    if args.oracle {
        let report = oracle_cross_check(&scenario, &opts, ORACLE_POINTS)?;
        write_oracle_report(&report, io::stderr().lock())?;
        if !report.passed() {
            code = ExitCode::from(3);
        }
        result.oracle = Some(report);
    }
    let mut out = output(args.out.as_deref())?;
    write_csv(&result, &mut out)?;
    out.flush()?;
    if wants_populations(&result) {
        match &args.out {
            Some(path) => {
                let companion = path.with_extension("populations.csv");
                write_populations(&result, BufWriter::new(fs::File::create(&companion)?))?;
                eprintln!("populations written to {}", companion.display());
            }
            None => eprintln!("warning: populations output needs --out; skipped"),
        }
    }
    Ok(code)
}

fn estimate(args: Gamma0Args) -> conveyor::Result<ExitCode> {
    let p = args.physics.params()?;
    let t = TransverseParams::new(
        2.0 * std::f64::consts::PI * args.transverse_khz * 1e3,
        args.temperature_uk * 1e-6,
    )?;
    let amplitude = if args.half_amplitude {
        Amplitude::HalfDifference
    } else {
        Amplitude::FullDifference
    };
    let g = estimate_gamma0(&p, t, amplitude)?;
    let e = &g.excursion;
    let two_pi = 2.0 * std::f64::consts::PI;
    println!("U_min             {:.3} uK", e.u_min / K_B * 1e6);
    println!("U_max             {:.3} uK", e.u_max / K_B * 1e6);
    println!("omega_min/2pi     {:.3} kHz", e.omega_min / two_pi / 1e3);
    println!("omega_max/2pi     {:.3} kHz", e.omega_max / two_pi / 1e3);
    println!("delta_omega0/2pi  {:.3} kHz", e.delta_omega0 / two_pi / 1e3);
    println!("amplitude/2pi     {:.3} kHz", g.amplitude / two_pi / 1e3);
    println!("tau               {:.3} us", g.tau * 1e6);
    println!("gamma0/2pi        {:.3} kHz", g.gamma0 / two_pi / 1e3);
    Ok(ExitCode::SUCCESS)
}

fn oracle_check(args: ScenarioArgs) -> conveyor::Result<ExitCode> {
    let scenario = load_scenario(&args)?;
    let report = oracle_cross_check(&scenario, &options(&args, true), ORACLE_POINTS)?;
    write_oracle_report(&report, io::stdout().lock())?;
    Ok(if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Spectrum(a) => spectrum(a),
        Command::Sweep(a) => sweep(a),
        Command::EstimateGamma0(a) => estimate(a),
        Command::OracleCheck(a) => oracle_check(a),
    };
    match result {
        Ok(code) => code,
        Err(e @ Error::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
