//! Figure presets for `atsim reproduce`. Values are in MHz and us, as a user
//! would write them in a config file.

use atsim_core::experiments::DurationRule;
use atsim_core::fitting::FitModel;
use atsim_core::DecoherenceParams;

use crate::config::{DriveConfig, DynamicsConfig, Resonance, RunConfig, ScanConfig, SweepConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Figure {
    /// ATS doublet with a 1.8 us pulse and Ωp = Ωc/2.
    #[value(name = "fig2b")]
    Fig2b,
    /// Splitting against coupling amplitude at Ωc/Ωp = 14.
    #[value(name = "fig2c")]
    Fig2c,
    /// Splitting against coupling detuning.
    #[value(name = "fig2d")]
    Fig2d,
    /// Coherent interference trace with a damped cos⁴ fit.
    #[value(name = "fig3e")]
    Fig3e,
    /// Optimal-duration doublet at t = 40π/Ωc.
    #[value(name = "fig4")]
    Fig4,
    /// Decohered interference trace.
    #[value(name = "figS5")]
    FigS5,
}

const TRACE_OMEGA_C: f64 = 4.73;

fn drive(omega_c: f64, ratio: f64) -> DriveConfig {
    DriveConfig { omega_c, ratio: Some(ratio), ..DriveConfig::default() }
}

/// The subcommand a figure runs and its configuration.
pub fn preset(fig: Figure) -> (&'static str, RunConfig) {
    match fig {
        Figure::Fig2b => (
            "spectrum",
            RunConfig {
                drive: Some(drive(1.0 / 1.8, 2.0)),
                duration: Some(1.8),
                scan: Some(ScanConfig::default()),
                ..RunConfig::default()
            },
        ),
        Figure::Fig2c => (
            "sweep-amplitude",
            RunConfig {
                sweep: Some(SweepConfig {
                    values: (2..=8).map(f64::from).collect(),
                    ratio: Some(14.0),
                    rule: Some(DurationRule::Optimal),
                    ..SweepConfig::default()
                }),
                ..RunConfig::default()
            },
        ),
        Figure::Fig2d => (
            "sweep-detuning",
            RunConfig {
                drive: Some(drive(TRACE_OMEGA_C, 14.0)),
                sweep: Some(SweepConfig {
                    values: (-5..=5).map(|k| TRACE_OMEGA_C * f64::from(k) / 10.0).collect(),
                    rule: Some(DurationRule::Optimal),
                    ..SweepConfig::default()
                }),
                ..RunConfig::default()
            },
        ),
        Figure::Fig3e => (
            "dynamics",
            RunConfig {
                drive: Some(DriveConfig { probe_resonance: Some(Resonance::Plus), ..drive(TRACE_OMEGA_C, 14.0) }),
                dynamics: Some(DynamicsConfig { n_max: Some(79), fit: Some(FitModel::DampedCos4) }),
                ..RunConfig::default()
            },
        ),
        Figure::Fig4 => (
            "spectrum",
            RunConfig {
                drive: Some(drive(TRACE_OMEGA_C, 14.0)),
                // 40π/Ωc with Ωc = 2π·4.73 rad/us.
                duration: Some(20.0 / TRACE_OMEGA_C),
                scan: Some(ScanConfig::default()),
                ..RunConfig::default()
            },
        ),
        Figure::FigS5 => (
            "dynamics",
            RunConfig {
                drive: Some(DriveConfig { probe_resonance: Some(Resonance::Plus), ..drive(5.0, 14.0) }),
                decoherence: Some(DecoherenceParams::dephasing([0.0784, 0.0784, 0.1568])),
                dynamics: Some(DynamicsConfig { n_max: Some(300), fit: Some(FitModel::DampedCos4) }),
                ..RunConfig::default()
            },
        ),
    }
}
