//! Shared inputs for the criterion benches under `benches/`.

use std::f64::consts::TAU;

use atsim_core::fitting::{generate, FitModel};
use atsim_core::{DecoherenceParams, DriveParams};

/// Ωc = 2π·4.73 rad/us at Ωc/Ωp = 14, probe on resonance.
pub fn trace_drive() -> DriveParams {
    let oc = TAU * 4.73;
    DriveParams::new(oc, oc / 14.0, 0.0, 0.0)
}

pub fn dephasing() -> DecoherenceParams {
    DecoherenceParams::dephasing([0.0784, 0.0784, 0.1568])
}

/// Noiseless damped cos⁴ trace: 80 points over 35 us.
pub fn cos4_trace() -> (Vec<f64>, Vec<(f64, f64)>) {
    let truth = vec![0.211, 17.5, 1.5, 7.85, 0.790, TAU * 0.123];
    let times: Vec<f64> = (0..80).map(|i| 35.0 * i as f64 / 79.0).collect();
    let data = generate(FitModel::DampedCos4, &truth, &times);
    (truth, data)
}
