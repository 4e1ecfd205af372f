//! Declarative scenarios, parallel sweeps and CSV output.

pub mod config;
pub mod output;
pub mod runner;

pub use config::{validate_config, Output, ProfileSpec, Scenario, ScenarioKind};
pub use output::{write_csv, write_populations};
pub use runner::{
    oracle_cross_check, run_scenario, OracleReport, PointResult, PointStatus, RunOptions, Series,
    SweepResult,
};

use crate::error::{Error, Result};

/// Shipped scenario files for the figure families.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig3a", include_str!("../../presets/fig3a.conf")),
    ("fig3b", include_str!("../../presets/fig3b.conf")),
    ("fig5", include_str!("../../presets/fig5.conf")),
    ("fig6", include_str!("../../presets/fig6.conf")),
];

pub fn preset(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            Error::Config(vec![format!(
                "unknown preset `{name}` (have {})",
                names.join(", ")
            )])
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::InitialState;

    #[test]
    fn presets_validate() {
        for (name, text) in PRESETS {
            let s = validate_config(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert_eq!(s.simulation.n_eff, 28);
            assert!((s.params.trap_depth_uk() - 254.0).abs() < 1e-9);
        }
        let s = validate_config(preset("fig3a").unwrap()).unwrap();
        assert_eq!(s.axis.len(), 151);
        assert!(
            matches!(s.simulation.initial, InitialState::Thermal(t) if (t - 40e-6).abs() < 1e-15)
        );
        assert!((s.simulation.gamma0 / (2.0 * std::f64::consts::PI) - 1670.0).abs() < 1e-6);
        assert!(preset("fig4").is_err());
    }
}
