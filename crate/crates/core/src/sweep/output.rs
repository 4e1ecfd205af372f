//! CSV writer. Profiles become gnuplot data blocks separated by two blank
//! lines, so `plot 'out.csv' index 0` selects the first one.

use std::io::Write;

use super::config::Output;
use super::runner::{OracleReport, PointStatus, SweepResult};
use crate::error::Result;

/// Bumped whenever the column layout changes.
pub const CSV_FORMAT_VERSION: u32 = 1;
pub const COLUMNS: [&str; 5] = [
    "axis_value",
    "retention",
    "t_eff_uK",
    "ground_pop",
    "wall_ms",
];

fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.9e}")
    }
}

pub fn write_csv<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    let s = &result.scenario;
    writeln!(
        out,
        "# conveyor {} sweep, csv format {CSV_FORMAT_VERSION}",
        env!("CARGO_PKG_VERSION")
    )?;
    writeln!(out, "# config_sha256 = {}", s.config_hash())?;
    writeln!(out, "# axis = {}", s.kind.axis().1)?;
    writeln!(out, "# bound_states = {}", result.n_bound)?;
    for (k, v) in &s.echo {
        writeln!(out, "# config: {k} = {v}")?;
    }
    for t in &result.tables {
        writeln!(
            out,
            "# table: {} half_range = {:.6e}, samples = {}, worst probe error = {:.3e}",
            t.kind.name(),
            t.half_range,
            t.n_samples,
            t.worst_probe_error
        )?;
    }
    for w in &s.warnings {
        writeln!(out, "# warning: {w}")?;
    }
    for (i, series) in result.series.iter().enumerate() {
        if i > 0 {
            writeln!(out)?;
            writeln!(out)?;
        }
        writeln!(out, "# profile = {}", series.profile)?;
        writeln!(out, "{}", COLUMNS.join(","))?;
        for p in &series.points {
            writeln!(
                out,
                "{},{},{},{},{:.3}",
                num(p.axis_value),
                num(p.retention),
                num(p.t_eff_uk),
                num(p.ground_pop),
                p.wall_ms
            )?;
            if let PointStatus::Failed(msg) = &p.status {
                writeln!(out, "# error: {msg}")?;
            }
        }
    }
    if let Some(report) = &result.oracle {
        writeln!(out)?;
        writeln!(out)?;
        write_oracle_report(report, &mut out)?;
    }
    Ok(())
}

/// Companion table of final level populations, one row per point.
pub fn write_populations<W: Write>(result: &SweepResult, mut out: W) -> Result<()> {
    let n = result.scenario.simulation.n_eff;
    write!(out, "profile,axis_value")?;
    for i in 1..=n {
        write!(out, ",p{i}")?;
    }
    writeln!(out)?;
    for series in &result.series {
        for p in &series.points {
            write!(out, "{},{}", series.profile, num(p.axis_value))?;
            for i in 0..n {
                write!(
                    out,
                    ",{}",
                    num(p.populations.get(i).copied().unwrap_or(f64::NAN))
                )?;
            }
            writeln!(out)?;
        }
    }
    Ok(())
}

pub fn wants_populations(result: &SweepResult) -> bool {
    result.scenario.outputs.contains(&Output::Populations)
}

pub fn write_oracle_report<W: Write>(report: &OracleReport, mut out: W) -> Result<()> {
    writeln!(
        out,
        "# oracle cross-check (no dephasing, all bound states, ground state, first traversal), tolerance {}",
        report.tolerance
    )?;
    writeln!(out, "# profile,axis_value,engine_retention,oracle_retention,engine_ground,oracle_ground,max_diff,ok")?;
    for c in &report.comparisons {
        writeln!(
            out,
            "# {},{},{:.6},{:.6},{:.6},{:.6},{:.2e},{}",
            c.profile,
            num(c.axis_value),
            c.engine_retention,
            c.oracle_retention,
            c.engine_ground,
            c.oracle_ground,
            c.max_difference(),
            c.max_difference() <= report.tolerance
        )?;
    }
    writeln!(
        out,
        "# oracle verdict: {}",
        if report.passed() { "agree" } else { "DISAGREE" }
    )?;
    Ok(())
}
