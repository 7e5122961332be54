//! Time traces: interference dynamics on the coupling grid and dressed-state
//! Rabi flopping.

use std::f64::consts::{SQRT_2, TAU};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{default_dt, evolve_rk4_sampled, DecoherenceParams, MasterEquation};
use crate::linalg::{c, eig_hermitian, propagator, propagator_from_eig, Basis, ComplexMatrix3, DensityMatrix};
use crate::model::{dressed_hamiltonian, probe_resonance, rotating_frame_hamiltonian, Branch, DriveParams};

use super::pl_from_p0;
use super::schedule::PrePulse;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeTrace {
    /// Sample times (us).
    pub times: Vec<f64>,
    pub p0: Vec<f64>,
    pub pl: Vec<f64>,
    /// How the sample times were chosen.
    pub constraint: String,
}

/// Resonant coupling with the probe on the shifted resonance of `branch`.
pub fn resonant_drive(omega_c: f64, omega_p: f64, branch: Branch) -> Result<DriveParams> {
    Ok(DriveParams::new(omega_c, omega_p, 0.0, probe_resonance(omega_c, omega_p, branch)?))
}

fn trace_at(
    drive: &DriveParams,
    times: &[f64],
    dec: Option<&DecoherenceParams>,
    pre_pulses: &[PrePulse],
    constraint: String,
) -> Result<TimeTrace> {
    drive.validate()?;
    let mut rho0 = DensityMatrix::ground().rho;
    for p in pre_pulses {
        let u = p.unitary();
        rho0 = u * rho0 * u.adjoint();
    }
    let h = rotating_frame_hamiltonian(drive);
    let states: Vec<ComplexMatrix3> = match dec {
        Some(dec) if !dec.is_coherent() => {
            let eq = MasterEquation::new(h, dec)?;
            let start = DensityMatrix { rho: rho0, basis: Basis::Bare };
            evolve_rk4_sampled(&start, &eq, times, default_dt(drive))?
                .into_iter()
                .map(|r| r.rho)
                .collect()
        }
        _ => {
            if times.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
                return Err(Error::param("times", "sample times must be finite and >= 0"));
            }
            let eig = eig_hermitian(&h)?;
            times
                .iter()
                .map(|&t| {
                    let u = propagator_from_eig(&eig, t);
                    u * rho0 * u.adjoint()
                })
                .collect()
        }
    };
    let contrast = dec.map(|d| d.contrast).unwrap_or(DecoherenceParams::DEFAULT_CONTRAST);
    let p0: Vec<f64> = states.iter().map(|r| r[(0, 0)].re).collect();
    Ok(TimeTrace {
        times: times.to_vec(),
        pl: p0.iter().map(|&p| pl_from_p0(p, contrast)).collect(),
        p0,
        constraint,
    })
}

/// |0> population at t = 2nπ/Ωc for n = 0..=n_max, starting from |0>.
/// Without dissipation every sample uses the exact propagator; with it one
/// RK4 trajectory is sampled.
pub fn dynamics_trace(base: &DriveParams, n_max: usize, dec: Option<&DecoherenceParams>) -> Result<TimeTrace> {
    if base.delta_c != 0.0 {
        return Err(Error::param("delta_c", "interference traces need a resonant coupling field"));
    }
    if base.omega_c <= 0.0 {
        return Err(Error::param("omega_c", "must be > 0"));
    }
    let times: Vec<f64> = (0..=n_max).map(|n| TAU * n as f64 / base.omega_c).collect();
    trace_at(base, &times, dec, &[], "t = 2n*pi/omega_c".into())
}

/// Probe-only Rabi flopping after a π/2 coupling pulse: the |+> state is
/// driven on |0> <-> |2> at zero detuning and p0 = cos²(Ωp t / 2) / 2.
pub fn rabi_trace(omega_p: f64, times: &[f64], dec: Option<&DecoherenceParams>) -> Result<TimeTrace> {
    let drive = DriveParams::new(0.0, omega_p, 0.0, 0.0);
    trace_at(
        &drive,
        times,
        dec,
        &[PrePulse::coupling_half_pi()],
        "probe Rabi from |+>".into(),
    )
}

/// <+| exp(-i (H_d - Ωc/2) t) |+> after one full cycle of the effective
/// |+> <-> |2> transition, t = 2π / (sqrt(2) Ωp / 2). The dynamical phase of
/// |+> is removed, leaving the cyclic phase, close to -1 for Ωc >> Ωp.
pub fn geometric_phase_overlap(omega_c: f64, omega_p: f64) -> Result<C64> {
    if omega_p <= 0.0 {
        return Err(Error::param("omega_p", "must be > 0"));
    }
    let drive = resonant_drive(omega_c, omega_p, Branch::Plus)?;
    let h = dressed_hamiltonian(&drive)? - ComplexMatrix3::identity() * c(omega_c / 2.0);
    let t = TAU / (SQRT_2 * omega_p / 2.0);
    Ok(propagator(&h, t)?[(0, 0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::analytic_interference;

    #[test]
    fn coherent_trace_follows_interference_law() {
        let oc = TAU * 4.73;
        let op = oc / 14.0;
        let drive = resonant_drive(oc, op, Branch::Plus).unwrap();
        let trace = dynamics_trace(&drive, 79, None).unwrap();
        assert_eq!(trace.times.len(), 80);
        assert!((trace.p0[0] - 1.0).abs() < 1e-14);
        for (t, p) in trace.times.iter().zip(&trace.p0) {
            assert!((p - analytic_interference(op, oc, *t)).abs() <= 0.05);
        }
    }

    #[test]
    fn rabi_trace_closed_form() {
        let op = TAU * 0.338;
        let times: Vec<f64> = (0..40).map(|k| 0.1 * k as f64).collect();
        let trace = rabi_trace(op, &times, None).unwrap();
        for (t, p) in times.iter().zip(&trace.p0) {
            assert!((p - 0.5 * (op * t / 2.0).cos().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn decohered_and_coherent_paths_agree_without_rates() {
        let oc = TAU * 5.0;
        let drive = resonant_drive(oc, oc / 14.0, Branch::Minus).unwrap();
        let a = dynamics_trace(&drive, 20, None).unwrap();
        let b = dynamics_trace(&drive, 20, Some(&DecoherenceParams::default())).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn decohered_trace_tends_to_mixed() {
        let oc = TAU * 5.0;
        let drive = resonant_drive(oc, oc / 14.0, Branch::Plus).unwrap();
        let trace = dynamics_trace(&drive, 600, Some(&DecoherenceParams::long_pulse_reference())).unwrap();
        let last = *trace.pl.last().unwrap();
        assert!((last - pl_from_p0(1.0 / 3.0, 0.22)).abs() < 5e-3, "{last}");
    }

    #[test]
    fn cyclic_evolution_flips_sign() {
        let oc = TAU * 4.73;
        let z = geometric_phase_overlap(oc, oc / 14.0).unwrap();
        assert!((z + 1.0).norm() < 0.05, "{z}");
    }

    #[test]
    fn trace_validation() {
        let d = DriveParams::new(3.0, 1.0, 0.5, 0.0);
        assert!(dynamics_trace(&d, 3, None).is_err());
        assert!(rabi_trace(1.0, &[-1.0], None).is_err());
    }
}
