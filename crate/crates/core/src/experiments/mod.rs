//! Pulse experiments: readout, the analytic interference law, optimal pulse
//! durations, schedules, spectral scans, sweeps and time traces.

mod dynamics;
mod scan;
mod schedule;
mod sweep;

use std::f64::consts::{PI, SQRT_2, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{DensityMatrix, StateVector3};

pub use dynamics::{dynamics_trace, geometric_phase_overlap, rabi_trace, resonant_drive, TimeTrace};
pub use scan::{
    default_grid, detuning_grid, find_dips, find_dips_xy, spectrum_scan, spectrum_scan_with, Dip, PlNoise,
    ScanMetadata, ScanOptions, ScanResult,
};
pub use schedule::{run_schedule, Measurement, PrePulse, PulseSchedule, Readout, Transition};
pub use sweep::{amplitude_sweep, detuning_sweep, DurationRule, GridSpec, ProbeAmplitude, SweepPoint};

/// Anything whose bare-basis density matrix can be read out.
pub trait Measurable {
    fn bare_density(&self) -> DensityMatrix;
}

impl Measurable for StateVector3 {
    fn bare_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(&self.to_bare())
    }
}

impl Measurable for DensityMatrix {
    fn bare_density(&self) -> DensityMatrix {
        self.to_bare()
    }
}

/// <0|ρ|0> of a normalized state. Dressed states are converted first.
pub fn population_p0<S: Measurable>(state: &S) -> Result<f64> {
    let rho = state.bare_density();
    let trace_error = (rho.trace() - C64::new(1.0, 0.0)).norm();
    if trace_error > 1e-9 {
        return Err(Error::param("state", format!("state is not normalized (|tr - 1| = {trace_error:e})")));
    }
    Ok(rho.population(0))
}

/// Normalized photoluminescence 1 - C + C p0.
pub fn pl_from_p0(p0: f64, contrast: f64) -> f64 {
    1.0 - contrast + contrast * p0
}

/// |0> population from the two-path interference law
/// P = |cos(sqrt(2) Ωp t / 4) + e^{i Ωc t}|^2 / 4, valid with the probe on the
/// shifted |+> resonance and Ωc >> Ωp.
pub fn analytic_interference(omega_p: f64, omega_c: f64, t: f64) -> f64 {
    let z = C64::new((SQRT_2 * omega_p * t / 4.0).cos(), 0.0) + C64::from_polar(1.0, omega_c * t);
    0.25 * z.norm_sqr()
}

/// The two families of durations that null the |0> population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// Ωp t = 2 sqrt(2) (2k - 1) π, Ωc t = 2nπ.
    A,
    /// Ωp t = 2 sqrt(2) (2k) π, Ωc t = (2n - 1) π.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalDuration {
    pub t: f64,
    pub family: Family,
    pub n: u32,
    pub k: u32,
    /// |cos(sqrt(2) Ωp t / 4) - target| at the chosen t.
    pub residual: f64,
}

/// Durations on the coupling grid that come closest to the nulling
/// conditions, one per (family, k), with n up to `max_index`. Sorted by t.
pub fn optimal_durations(omega_c: f64, omega_p: f64, max_index: u32) -> Result<Vec<OptimalDuration>> {
    if !(omega_c > 0.0 && omega_c.is_finite()) {
        return Err(Error::param("omega_c", "must be finite and > 0"));
    }
    if !(omega_p > 0.0 && omega_p.is_finite()) {
        return Err(Error::param("omega_p", "must be finite and > 0"));
    }
    let mut out = Vec::new();
    for family in [Family::A, Family::B] {
        let (target, grid_t): (f64, fn(u32, f64) -> f64) = match family {
            Family::A => (-1.0, |n, oc| TAU * n as f64 / oc),
            Family::B => (1.0, |n, oc| PI * (2 * n - 1) as f64 / oc),
        };
        let residual = |t: f64| ((SQRT_2 * omega_p * t / 4.0).cos() - target).abs();
        for k in 1.. {
            let m = match family {
                Family::A => 2 * k - 1,
                Family::B => 2 * k,
            };
            let ideal = 2.0 * SQRT_2 * m as f64 * PI / omega_p;
            // Continuous n that lands exactly on the ideal duration.
            let n_real = match family {
                Family::A => ideal * omega_c / TAU,
                Family::B => (ideal * omega_c / PI + 1.0) / 2.0,
            };
            let lo = n_real.floor().max(1.0) as u32;
            if lo > max_index {
                break;
            }
            let best = [lo, lo + 1]
                .into_iter()
                .filter(|&n| n >= 1 && n <= max_index)
                .map(|n| (n, residual(grid_t(n, omega_c))))
                .min_by(|a, b| a.1.total_cmp(&b.1));
            if let Some((n, r)) = best {
                out.push(OptimalDuration {
                    t: grid_t(n, omega_c),
                    family,
                    n,
                    k,
                    residual: r,
                });
            }
        }
    }
    out.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(out)
}
