//! Pulse schedules: state preparation, ideal pre-pulses, the main drive and a
//! projective readout.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::{default_dt, evolve_rk4, DecoherenceParams, MasterEquation};
use crate::linalg::{propagator, resonant_dressing_matrix, Basis, ComplexMatrix3, DensityMatrix};
use crate::model::{rotating_frame_hamiltonian, DriveParams};

use super::pl_from_p0;

/// Which two-level transition a pre-pulse addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transition {
    /// |0> <-> |1>
    Coupling,
    /// |0> <-> |2>
    Probe,
}

impl Transition {
    fn levels(self) -> (usize, usize) {
        match self {
            Transition::Coupling => (0, 1),
            Transition::Probe => (0, 2),
        }
    }
}

/// Instantaneous rotation exp(-i θ/2 (cos φ σx + sin φ σy)) on one
/// transition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrePulse {
    pub transition: Transition,
    /// Rotation angle θ (rad).
    pub angle: f64,
    /// Axis azimuth φ (rad); 0 is x, π/2 is y.
    #[serde(default)]
    pub phase: f64,
}

impl PrePulse {
    /// The y-axis π/2 coupling pulse that takes |0> to |+>.
    pub fn coupling_half_pi() -> Self {
        Self {
            transition: Transition::Coupling,
            angle: std::f64::consts::FRAC_PI_2,
            phase: std::f64::consts::FRAC_PI_2,
        }
    }

    pub fn unitary(&self) -> ComplexMatrix3 {
        let (a, b) = self.transition.levels();
        let (s, c) = (self.angle / 2.0).sin_cos();
        let i = C64::new(0.0, 1.0);
        let mut u = ComplexMatrix3::identity();
        u[(a, a)] = C64::new(c, 0.0);
        u[(b, b)] = C64::new(c, 0.0);
        u[(a, b)] = -i * C64::from_polar(s, -self.phase);
        u[(b, a)] = -i * C64::from_polar(s, self.phase);
        u
    }
}

/// Projector measured at the end of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Readout {
    /// |k><k| in the bare basis.
    Bare(usize),
    /// |k><k| in the resonant dressed basis (|+>, |->, |2>).
    Dressed(usize),
}

impl Default for Readout {
    fn default() -> Self {
        Readout::Bare(0)
    }
}

impl Readout {
    fn measure(self, rho: &DensityMatrix) -> Result<f64> {
        let bare = rho.to_bare();
        match self {
            Readout::Bare(k) if k < 3 => Ok(bare.population(k)),
            Readout::Dressed(k) if k < 3 => {
                let w = resonant_dressing_matrix();
                Ok((w * bare.rho * w)[(k, k)].re)
            }
            _ => Err(Error::param("readout", "level index must be 0, 1 or 2")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSchedule {
    pub init: DensityMatrix,
    pub pre_pulses: Vec<PrePulse>,
    pub drive: DriveParams,
    /// Main drive duration (us).
    pub duration: f64,
    pub readout: Readout,
    /// RK4 step override (us); the drive-derived default otherwise.
    pub dt: Option<f64>,
}

impl PulseSchedule {
    pub fn new(drive: DriveParams, duration: f64) -> Self {
        Self {
            init: DensityMatrix::ground(),
            pre_pulses: Vec::new(),
            drive,
            duration,
            readout: Readout::default(),
            dt: None,
        }
    }

    pub fn with_pre_pulse(mut self, p: PrePulse) -> Self {
        self.pre_pulses.push(p);
        self
    }

    pub fn with_readout(mut self, readout: Readout) -> Self {
        self.readout = readout;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.drive.validate()?;
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(Error::param("duration", format!("must be finite and >= 0, got {}", self.duration)));
        }
        if self.pre_pulses.iter().any(|p| !p.angle.is_finite() || !p.phase.is_finite()) {
            return Err(Error::param("pre_pulses", "angles must be finite"));
        }
        Ok(())
    }

    /// Initial state after the pre-pulses, in the bare basis.
    pub fn prepared(&self) -> DensityMatrix {
        let mut rho = self.init.to_bare().rho;
        for p in &self.pre_pulses {
            let u = p.unitary();
            rho = u * rho * u.adjoint();
        }
        DensityMatrix { rho, basis: Basis::Bare }
    }
}

/// Outcome of one schedule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    /// Probability of the readout projector.
    pub p0: f64,
    pub pl: f64,
    pub state: DensityMatrix,
}

/// Prepares, drives and reads out. Without dissipation the drive is applied
/// through the exact propagator, otherwise the master equation is integrated
/// with RK4.
pub fn run_schedule(s: &PulseSchedule, dec: Option<&DecoherenceParams>) -> Result<Measurement> {
    s.validate()?;
    let h = rotating_frame_hamiltonian(&s.drive);
    let rho0 = s.prepared();
    let state = match dec {
        Some(dec) if !dec.is_coherent() => {
            let eq = MasterEquation::new(h, dec)?;
            let dt = s.dt.unwrap_or_else(|| default_dt(&s.drive));
            evolve_rk4(&rho0, &eq, s.duration, dt)?
        }
        _ => {
            let u = propagator(&h, s.duration)?;
            DensityMatrix { rho: u * rho0.rho * u.adjoint(), basis: Basis::Bare }
        }
    };
    let p0 = s.readout.measure(&state)?;
    let contrast = dec.map(|d| d.contrast).unwrap_or(DecoherenceParams::DEFAULT_CONTRAST);
    Ok(Measurement { p0, pl: pl_from_p0(p0, contrast), state })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::StateVector3;
    use crate::model::{probe_resonance, Branch};
    use std::f64::consts::{PI, SQRT_2, TAU};

    #[test]
    fn empty_schedule_reads_one() {
        let m = run_schedule(&PulseSchedule::new(DriveParams::new(3.0, 1.0, 0.0, 0.0), 0.0), None).unwrap();
        assert!((m.p0 - 1.0).abs() < 1e-15);
        assert!((m.pl - 1.0).abs() < 1e-15);
    }

    #[test]
    fn half_pi_coupling_pulse_prepares_plus() {
        let s = PulseSchedule::new(DriveParams::new(0.0, 0.0, 0.0, 0.0), 0.0)
            .with_pre_pulse(PrePulse::coupling_half_pi());
        let prepared = s.prepared();
        let want = DensityMatrix::from_pure(&StateVector3::plus()).to_bare();
        assert!((prepared.rho - want.rho).norm() < 1e-15);
        let m = run_schedule(&s.with_readout(Readout::Dressed(0)), None).unwrap();
        assert!((m.p0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pre_pulse_is_unitary_and_flips() {
        let p = PrePulse { transition: Transition::Probe, angle: PI, phase: 0.3 };
        let u = p.unitary();
        assert!((u.adjoint() * u - ComplexMatrix3::identity()).norm() < 1e-15);
        assert!((u[(2, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dressed_rabi_flop_at_effective_frequency() {
        // |+> driven on its shifted probe resonance flops into |2> at
        // sqrt(2) Ωp / 2.
        let oc = TAU * 4.73;
        let op = oc / 14.0;
        let drive = DriveParams::new(oc, op, 0.0, probe_resonance(oc, op, Branch::Plus).unwrap());
        let omega = SQRT_2 * op / 2.0;
        for t in [0.3, 1.1, 2.5] {
            let s = PulseSchedule::new(drive, t)
                .with_pre_pulse(PrePulse::coupling_half_pi())
                .with_readout(Readout::Dressed(0));
            let m = run_schedule(&s, None).unwrap();
            let want = (omega * t / 2.0).cos().powi(2);
            assert!((m.p0 - want).abs() < 0.02, "t={t}: {} vs {want}", m.p0);
        }
    }

    #[test]
    fn long_pulse_washes_out() {
        let oc = TAU / 1.8;
        let dec = DecoherenceParams::long_pulse_reference();
        for dp in [-0.6 * oc, 0.0, 0.45 * oc] {
            let s = PulseSchedule::new(DriveParams::new(oc, oc / 2.0, 0.0, dp), 52.2);
            let m = run_schedule(&s, Some(&dec)).unwrap();
            // The mixed state gives 0.8533; the slowest mode is not fully gone.
            assert!((m.pl - 0.8533).abs() <= 0.02, "dp={dp}: pl={}", m.pl);
        }
    }

    #[test]
    fn rejects_bad_schedules() {
        let s = PulseSchedule::new(DriveParams::new(1.0, 1.0, 0.0, 0.0), -1.0);
        assert!(run_schedule(&s, None).is_err());
        let s = PulseSchedule::new(DriveParams::new(1.0, 1.0, 0.0, 0.0), 1.0).with_readout(Readout::Bare(3));
        assert!(run_schedule(&s, None).is_err());
    }
}
