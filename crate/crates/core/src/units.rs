//! Unit conventions.
//!
//! Internally every angular frequency (Rabi frequency, detuning, Hamiltonian
//! entry) is in rad/us and every time in us. Ordinary frequencies quoted in
//! MHz are multiplied by 2*pi on the way in. Decay rates are plain 1/us and are
//! never scaled.

use std::f64::consts::TAU;

/// Ordinary frequency in MHz to angular frequency in rad/us.
pub fn mhz_to_angular(f_mhz: f64) -> f64 {
    TAU * f_mhz
}

/// Angular frequency in rad/us to ordinary frequency in MHz.
pub fn angular_to_mhz(omega: f64) -> f64 {
    omega / TAU
}
