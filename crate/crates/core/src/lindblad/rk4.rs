//! Fixed-step classical Runge-Kutta integration of the master equation.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::linalg::{c, spectral_norm, ComplexMatrix3, DensityMatrix};
use crate::model::{rotating_frame_hamiltonian, DriveParams};

use super::MasterEquation;

/// Upper bound on dt * |H|.
pub const MAX_STEP_NORM: f64 = 0.1;
/// Smallest step accepted after shrinking, in us.
pub const MIN_DT: f64 = 1e-7;

/// Fifty steps per period of the fastest frequency in the drive, further
/// capped so that dt * |H| stays within [`MAX_STEP_NORM`].
pub fn default_dt(d: &DriveParams) -> f64 {
    let base = TAU / d.fastest_rate() / 50.0;
    match spectral_norm(&rotating_frame_hamiltonian(d)) {
        Ok(norm) if norm > 0.0 => base.min(MAX_STEP_NORM / norm),
        _ => base,
    }
}

fn checked_dt(eq: &MasterEquation, dt: f64) -> Result<f64> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", format!("step must be finite and > 0, got {dt}")));
    }
    let norm = eq.generator_norm();
    let mut dt = dt;
    if dt * norm > MAX_STEP_NORM {
        let shrunk = MAX_STEP_NORM / norm;
        log::warn!("RK4 step {dt:e} us violates dt*|H| <= {MAX_STEP_NORM}; shrinking to {shrunk:e} us");
        dt = shrunk;
    }
    if dt < MIN_DT {
        return Err(Error::StepTooSmall { dt, generator_norm: norm });
    }
    Ok(dt)
}

fn step(eq: &MasterEquation, rho: &ComplexMatrix3, h: f64) -> ComplexMatrix3 {
    let half = c(h / 2.0);
    let k1 = eq.rhs(rho);
    let k2 = eq.rhs(&(rho + k1 * half));
    let k3 = eq.rhs(&(rho + k2 * half));
    let k4 = eq.rhs(&(rho + k3 * c(h)));
    rho + (k1 + (k2 + k3) * c(2.0) + k4) * c(h / 6.0)
}

/// Advances by exactly `duration` with equal steps no longer than `dt`.
fn advance(eq: &MasterEquation, mut rho: ComplexMatrix3, duration: f64, dt: f64) -> ComplexMatrix3 {
    if duration <= 0.0 {
        return rho;
    }
    let n = (duration / dt - 1e-9).ceil().max(1.0) as usize;
    let h = duration / n as f64;
    for _ in 0..n {
        rho = step(eq, &rho, h);
    }
    rho
}

/// ρ(t_final) from ρ0. `dt` is the largest step taken; it is shrunk (with a
/// warning) when dt * |H| would exceed [`MAX_STEP_NORM`].
pub fn evolve_rk4(rho0: &DensityMatrix, eq: &MasterEquation, t_final: f64, dt: f64) -> Result<DensityMatrix> {
    Ok(evolve_rk4_sampled(rho0, eq, &[t_final], dt)?.remove(0))
}

/// ρ at each of the nondecreasing `times`, from a single trajectory started
/// at t = 0.
pub fn evolve_rk4_sampled(
    rho0: &DensityMatrix,
    eq: &MasterEquation,
    times: &[f64],
    dt: f64,
) -> Result<Vec<DensityMatrix>> {
    let mut prev = 0.0;
    for &t in times {
        if !(t >= prev && t.is_finite()) {
            return Err(Error::param(
                "times",
                format!("sample times must be finite, >= 0 and nondecreasing, got {t} after {prev}"),
            ));
        }
        prev = t;
    }
    let dt = checked_dt(eq, dt)?;
    let mut out = Vec::with_capacity(times.len());
    let mut rho = rho0.rho;
    let mut now = 0.0;
    for &t in times {
        rho = advance(eq, rho, t - now, dt);
        now = t;
        out.push(DensityMatrix { rho, basis: rho0.basis });
    }
    Ok(out)
}
