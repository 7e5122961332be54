//! The master equation for a resonant coupling field written as eight coupled
//! real ODEs.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{Basis, ComplexMatrix3, DensityMatrix};
use crate::model::DriveParams;

use super::DecoherenceParams;

/// y1 = ρ00, y2 = ρ11, y3 + i y4 = ρ01, y5 + i y6 = ρ02, y7 + i y8 = ρ12.
/// ρ22 = 1 - y1 - y2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealState8(pub [f64; 8]);

impl RealState8 {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let r = &rho.rho;
        Self([
            r[(0, 0)].re,
            r[(1, 1)].re,
            r[(0, 1)].re,
            r[(0, 1)].im,
            r[(0, 2)].re,
            r[(0, 2)].im,
            r[(1, 2)].re,
            r[(1, 2)].im,
        ])
    }

    pub fn to_density(&self) -> DensityMatrix {
        let y = &self.0;
        let r01 = C64::new(y[2], y[3]);
        let r02 = C64::new(y[4], y[5]);
        let r12 = C64::new(y[6], y[7]);
        let rho = ComplexMatrix3::new(
            C64::new(y[0], 0.0), r01, r02,
            r01.conj(), C64::new(y[1], 0.0), r12,
            r02.conj(), r12.conj(), C64::new(1.0 - y[0] - y[1], 0.0),
        );
        DensityMatrix { rho, basis: Basis::Bare }
    }

    pub fn validate(&self) -> Result<()> {
        let [y1, y2, ..] = self.0;
        if !(0.0..=1.0).contains(&y1) || !(0.0..=1.0).contains(&y2) || y1 + y2 > 1.0 + 1e-9 {
            return Err(Error::param(
                "y",
                format!("populations must satisfy 0 <= y1, y2 and y1 + y2 <= 1, got ({y1}, {y2})"),
            ));
        }
        Ok(())
    }
}

/// Time derivative of the real state. Requires a resonant coupling field, zero
/// drive phases and no longitudinal relaxation; the γ's damp (ρ01, ρ02, ρ12)
/// directly.
pub fn real_ode_rhs(y: &RealState8, d: &DriveParams, dec: &DecoherenceParams) -> Result<RealState8> {
    if d.delta_c != 0.0 {
        return Err(Error::param("delta_c", "the real form is written for a resonant coupling field"));
    }
    if d.phi_c != 0.0 || d.phi_p != 0.0 {
        return Err(Error::param("phi", "the real form assumes zero drive phases"));
    }
    if dec.has_relaxation() {
        return Err(Error::param("relaxation", "the real form omits longitudinal relaxation"));
    }
    let [y1, y2, y3, y4, y5, y6, y7, y8] = y.0;
    let [g1, g2, g3] = dec.gamma;
    let (cc, p, dp) = (d.omega_c / 2.0, d.omega_p / 2.0, d.delta_p);
    Ok(RealState8([
        -d.omega_c * y4 - d.omega_p * y6,
        d.omega_c * y4,
        -p * y8 - g1 * y3,
        -cc * (y2 - y1) - p * y7 - g1 * y4,
        cc * y8 - dp * y6 - g2 * y5,
        -cc * y7 - p * (1.0 - 2.0 * y1 - y2) + dp * y5 - g2 * y6,
        cc * y6 + p * y4 - dp * y8 - g3 * y7,
        -cc * y5 + p * y3 + dp * y7 - g3 * y8,
    ]))
}
