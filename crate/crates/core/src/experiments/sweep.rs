//! Splitting versus coupling amplitude and coupling detuning.

use std::f64::consts::{SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::DecoherenceParams;
use crate::model::{ats_splitting, DriveParams};

use super::scan::{detuning_grid, doublet, find_dips, spectrum_scan, Dip};

/// How the drive duration is chosen at each sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DurationRule {
    /// A fixed duration (us).
    Fixed(f64),
    /// t = 2nπ/Ωc.
    CouplingPeriods(u32),
    /// t = 2nπ/Ω_eff with n the integer nearest sqrt(2) Ω_eff/Ωp, so that
    /// Ωp t ≈ 2 sqrt(2) π. Equal to t = 2nπ/Ωc for a resonant coupling field.
    Optimal,
}

impl DurationRule {
    pub fn duration(&self, d: &DriveParams) -> Result<f64> {
        match *self {
            DurationRule::Fixed(t) if t >= 0.0 && t.is_finite() => Ok(t),
            DurationRule::Fixed(t) => Err(Error::param("duration", format!("must be finite and >= 0, got {t}"))),
            DurationRule::CouplingPeriods(n) => {
                if d.omega_c <= 0.0 {
                    return Err(Error::param("omega_c", "coupling periods need omega_c > 0"));
                }
                Ok(TAU * n as f64 / d.omega_c)
            }
            DurationRule::Optimal => {
                let eff = d.effective_rabi();
                if eff <= 0.0 || d.omega_p <= 0.0 {
                    return Err(Error::param("omega_p", "optimal duration needs omega_p > 0 and omega_eff > 0"));
                }
                let n = (SQRT_2 * eff / d.omega_p).round().max(1.0);
                Ok(TAU * n / eff)
            }
        }
    }
}

/// Probe amplitude policy for amplitude sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbeAmplitude {
    /// Ωp = Ωc / ratio.
    Ratio(f64),
    /// Fixed Ωp (rad/us).
    Fixed(f64),
}

/// Probe grid relative to each sweep point: `half_span` times Ω_eff around
/// the doublet center Δc/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub half_span: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { half_span: 1.5, points: 301 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub omega_c: f64,
    pub omega_p: f64,
    pub delta_c: f64,
    pub duration: f64,
    pub dips: Vec<Dip>,
    /// Outer dip pair (lower, upper), absent when a side has no dip.
    pub doublet: Option<(Dip, Dip)>,
    /// Measured separation of the doublet.
    pub splitting: Option<f64>,
    /// Closed-form splitting for comparison.
    pub predicted: f64,
}

fn sweep_point(d: DriveParams, rule: DurationRule, dec: Option<&DecoherenceParams>, grid: GridSpec) -> Result<SweepPoint> {
    let t = rule.duration(&d)?;
    let center = d.delta_c / 2.0;
    let axis = detuning_grid(center, grid.half_span * d.effective_rabi(), grid.points);
    let scan = spectrum_scan(&d, &axis, t, dec)?;
    let dips = find_dips(&scan);
    let pair = doublet(&dips, center);
    if pair.is_none() {
        log::warn!(
            "sweep point omega_c = {}, delta_c = {}: fewer than two dips",
            d.omega_c,
            d.delta_c
        );
    }
    Ok(SweepPoint {
        omega_c: d.omega_c,
        omega_p: d.omega_p,
        delta_c: d.delta_c,
        duration: t,
        splitting: pair.map(|(lo, hi)| hi.position - lo.position),
        doublet: pair,
        dips,
        predicted: ats_splitting(&d)?,
    })
}

/// Splitting as a function of the coupling amplitude, with a resonant
/// coupling field.
pub fn amplitude_sweep(
    omega_c_grid: &[f64],
    probe: ProbeAmplitude,
    rule: DurationRule,
    dec: Option<&DecoherenceParams>,
    grid: GridSpec,
) -> Result<Vec<SweepPoint>> {
    omega_c_grid
        .iter()
        .map(|&oc| {
            if !(oc > 0.0 && oc.is_finite()) {
                return Err(Error::param("omega_c", format!("sweep values must be > 0, got {oc}")));
            }
            let op = match probe {
                ProbeAmplitude::Ratio(r) if r > 0.0 => oc / r,
                ProbeAmplitude::Ratio(r) => return Err(Error::param("ratio", format!("must be > 0, got {r}"))),
                ProbeAmplitude::Fixed(op) => op,
            };
            sweep_point(DriveParams::new(oc, op, 0.0, 0.0), rule, dec, grid)
        })
        .collect()
}

/// Dip positions and depths as a function of the coupling detuning.
pub fn detuning_sweep(
    delta_c_grid: &[f64],
    base: &DriveParams,
    rule: DurationRule,
    dec: Option<&DecoherenceParams>,
    grid: GridSpec,
) -> Result<Vec<SweepPoint>> {
    delta_c_grid
        .iter()
        .map(|&dc| {
            if !dc.is_finite() {
                return Err(Error::param("delta_c", "sweep values must be finite"));
            }
            sweep_point(base.with_delta_c(dc), rule, dec, grid)
        })
        .collect()
}
