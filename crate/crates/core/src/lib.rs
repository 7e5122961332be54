//! Simulation engine for a coherently driven V-type three-level system.
//!
//! The crate covers the full chain behind pulse-controlled Autler-Townes
//! spectroscopy on a dephasing-dominated spin:
//!
//! - [`linalg`]: 3x3 complex Hermitian eigensolver, propagators, basis changes.
//! - [`model`]: rotating-frame, dressed and effective Hamiltonians plus closed
//!   forms for the splitting and eigenenergies.
//! - [`lindblad`]: master-equation right-hand sides, RK4 integration and the
//!   steady-state solver.
//! - [`experiments`]: pulse schedules, fluorescence readout, spectral scans,
//!   sweeps, interference traces and optimal-duration search.
//! - [`fitting`]: Levenberg-Marquardt fits of the decay/oscillation models.
//!
//! Units: angular frequencies in rad/us, times in us, rates in 1/us. See
//! [`units`].

pub mod error;
pub mod experiments;
pub mod fitting;
pub mod lindblad;
pub mod linalg;
pub mod model;
pub mod units;

pub use error::{Error, Result};
pub use experiments::{
    analytic_interference, find_dips, optimal_durations, pl_from_p0, population_p0, run_schedule,
    spectrum_scan, Dip, DurationRule, PrePulse, PulseSchedule, ScanResult, TimeTrace,
};
pub use fitting::{fit, FitModel, FitOptions, FitResult};
pub use lindblad::{DecoherenceParams, LindbladOp, MasterEquation, RealState8};
pub use linalg::{Basis, ComplexMatrix3, DensityMatrix, EigenSystem, StateVector3};
pub use model::{Branch, DressedBasis, DriveParams, GroundStateParams};
pub use num_complex::Complex64;
