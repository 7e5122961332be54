//! Open-system dynamics under the Lindblad master equation
//!
//! dρ/dt = -i[H, ρ] + Σ_k (A_k ρ A_k† - {A_k† A_k, ρ}/2).
//!
//! Dephasing is parameterized by the three coherence decay rates
//! (γ1, γ2, γ3) acting on (ρ01, ρ02, ρ12). When they decompose into
//! nonnegative per-level rates the dissipator is built from projector
//! operators; otherwise the coherences are damped directly.

mod real;
mod rk4;
mod steady;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, check_hermitian, spectral_norm, ComplexMatrix3, DensityMatrix};

pub use real::{real_ode_rhs, RealState8};
pub use rk4::{default_dt, evolve_rk4, evolve_rk4_sampled, MAX_STEP_NORM, MIN_DT};
pub use steady::{steady_state, RealGenerator};

/// Coherence index pairs in the order the rates (γ1, γ2, γ3) refer to.
pub const COHERENCES: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Dephasing,
    Relaxation,
}

/// A jump operator, in units of (1/us)^(1/2).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LindbladOp {
    pub matrix: ComplexMatrix3,
    pub kind: OpKind,
}

impl LindbladOp {
    /// sqrt(2 γ)|a><a|.
    pub fn dephasing(level: usize, rate: f64) -> Result<Self> {
        check_level(level)?;
        check_rate("dephasing rate", rate)?;
        let mut m = ComplexMatrix3::zeros();
        m[(level, level)] = c((2.0 * rate).sqrt());
        Ok(Self { matrix: m, kind: OpKind::Dephasing })
    }

    /// sqrt(Γ)|to><from|.
    pub fn relaxation(from: usize, to: usize, rate: f64) -> Result<Self> {
        check_level(from)?;
        check_level(to)?;
        if from == to {
            return Err(Error::param("relaxation", "source and target level must differ"));
        }
        check_rate("relaxation rate", rate)?;
        let mut m = ComplexMatrix3::zeros();
        m[(to, from)] = c(rate.sqrt());
        Ok(Self { matrix: m, kind: OpKind::Relaxation })
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    /// A ρ A† - {A†A, ρ}/2.
    pub fn dissipate(&self, rho: &ComplexMatrix3) -> ComplexMatrix3 {
        let a = &self.matrix;
        let ada = a.adjoint() * a;
        a * rho * a.adjoint() - (ada * rho + rho * ada) * c(0.5)
    }
}

fn check_level(level: usize) -> Result<()> {
    if level > 2 {
        return Err(Error::param("level", format!("level index must be 0, 1 or 2, got {level}")));
    }
    Ok(())
}

fn check_rate(what: &str, rate: f64) -> Result<()> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(Error::param("rate", format!("{what} must be finite and >= 0, got {rate}")));
    }
    Ok(())
}

/// One dephasing operator per (level, rate) entry.
pub fn make_dephasing(levels_rates: &[(usize, f64)]) -> Result<Vec<LindbladOp>> {
    levels_rates
        .iter()
        .map(|&(level, rate)| LindbladOp::dephasing(level, rate))
        .collect()
}

/// Per-level rates (γ_a, γ_b, γ_c) with γ1 = γ_a + γ_b, γ2 = γ_a + γ_c,
/// γ3 = γ_b + γ_c, or `None` if any would be negative.
pub fn per_level_rates(gamma: [f64; 3]) -> Option<[f64; 3]> {
    let [g1, g2, g3] = gamma;
    let levels = [
        0.5 * (g1 + g2 - g3),
        0.5 * (g1 + g3 - g2),
        0.5 * (g2 + g3 - g1),
    ];
    // Round-off can leave -1e-17 on exactly feasible triples.
    let tol = 1e-14 * gamma.iter().copied().fold(0.0, f64::max);
    if levels.iter().any(|&r| r < -tol) {
        return None;
    }
    Some(levels.map(|r| r.max(0.0)))
}

/// Decay rates and readout contrast.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoherenceParams {
    /// Coherence decay rates on (ρ01, ρ02, ρ12), 1/us.
    pub gamma: [f64; 3],
    /// relaxation[i][j]: population transfer rate i -> j, 1/us.
    #[serde(default)]
    pub relaxation: Option<[[f64; 3]; 3]>,
    /// Fluorescence contrast between m_s = 0 and m_s = +-1.
    #[serde(default = "DecoherenceParams::default_contrast")]
    pub contrast: f64,
}

impl Default for DecoherenceParams {
    fn default() -> Self {
        Self {
            gamma: [0.0; 3],
            relaxation: None,
            contrast: Self::DEFAULT_CONTRAST,
        }
    }
}

impl DecoherenceParams {
    pub const DEFAULT_CONTRAST: f64 = 0.22;

    fn default_contrast() -> f64 {
        Self::DEFAULT_CONTRAST
    }

    pub fn dephasing(gamma: [f64; 3]) -> Self {
        Self { gamma, ..Self::default() }
    }

    /// γ1 = γ2 = 0.0784 1/us, γ3 = 2γ2.
    pub fn long_pulse_reference() -> Self {
        Self::dephasing([0.0784, 0.0784, 0.1568])
    }

    pub fn validate(&self) -> Result<()> {
        for g in self.gamma {
            check_rate("dephasing rate", g)?;
        }
        if let Some(table) = &self.relaxation {
            for (i, row) in table.iter().enumerate() {
                for (j, &r) in row.iter().enumerate() {
                    check_rate("relaxation rate", r)?;
                    if i == j && r != 0.0 {
                        return Err(Error::param("relaxation", "diagonal entries must be zero"));
                    }
                }
            }
        }
        if !(0.0..=1.0).contains(&self.contrast) {
            return Err(Error::param("contrast", format!("must lie in [0, 1], got {}", self.contrast)));
        }
        Ok(())
    }

    pub fn has_relaxation(&self) -> bool {
        self.relaxation
            .map(|t| t.iter().flatten().any(|&r| r != 0.0))
            .unwrap_or(false)
    }

    pub fn is_coherent(&self) -> bool {
        self.gamma.iter().all(|&g| g == 0.0) && !self.has_relaxation()
    }
}

/// Hamiltonian plus dissipator, ready for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterEquation {
    pub h: ComplexMatrix3,
    pub ops: Vec<LindbladOp>,
    /// Extra direct decay on (ρ01, ρ02, ρ12), used for rate triples with no
    /// nonnegative per-level decomposition.
    pub coherence_damping: [f64; 3],
}

impl MasterEquation {
    pub fn new(h: ComplexMatrix3, dec: &DecoherenceParams) -> Result<Self> {
        check_hermitian(&h)?;
        dec.validate()?;
        let (mut ops, coherence_damping) = match per_level_rates(dec.gamma) {
            Some(levels) => {
                let entries: Vec<(usize, f64)> = levels
                    .iter()
                    .enumerate()
                    .filter(|(_, &r)| r > 0.0)
                    .map(|(k, &r)| (k, r))
                    .collect();
                (make_dephasing(&entries)?, [0.0; 3])
            }
            None => {
                log::warn!(
                    "dephasing rates {:?} have no nonnegative per-level decomposition; damping coherences directly",
                    dec.gamma
                );
                (Vec::new(), dec.gamma)
            }
        };
        if let Some(table) = &dec.relaxation {
            for (i, row) in table.iter().enumerate() {
                for (j, &r) in row.iter().enumerate() {
                    if i != j && r > 0.0 {
                        ops.push(LindbladOp::relaxation(i, j, r)?);
                    }
                }
            }
        }
        Ok(Self { h, ops, coherence_damping })
    }

    pub fn unitary(h: ComplexMatrix3) -> Result<Self> {
        Self::with_ops(h, Vec::new())
    }

    pub fn with_ops(h: ComplexMatrix3, ops: Vec<LindbladOp>) -> Result<Self> {
        check_hermitian(&h)?;
        Ok(Self { h, ops, coherence_damping: [0.0; 3] })
    }

    pub fn is_dissipative(&self) -> bool {
        self.ops.iter().any(|op| !op.is_zero()) || self.coherence_damping.iter().any(|&g| g > 0.0)
    }

    /// Spectral norm of H, the quantity the RK4 step bound refers to.
    pub fn generator_norm(&self) -> f64 {
        spectral_norm(&self.h).unwrap_or_else(|_| self.h.norm())
    }

    /// dρ/dt.
    pub fn rhs(&self, rho: &ComplexMatrix3) -> ComplexMatrix3 {
        let i = C64::new(0.0, 1.0);
        let mut out = (self.h * rho - rho * self.h) * -i;
        for op in &self.ops {
            out += op.dissipate(rho);
        }
        for (&(a, b), &g) in COHERENCES.iter().zip(&self.coherence_damping) {
            if g != 0.0 {
                out[(a, b)] -= rho[(a, b)] * g;
                out[(b, a)] -= rho[(b, a)] * g;
            }
        }
        out
    }
}

/// dρ/dt for explicit H and jump operators.
pub fn lindblad_rhs(rho: &DensityMatrix, h: &ComplexMatrix3, ops: &[LindbladOp]) -> Result<ComplexMatrix3> {
    let eq = MasterEquation::with_ops(*h, ops.to_vec())?;
    Ok(eq.rhs(&rho.rho))
}

#[cfg(test)]
pub(crate) fn diag3(a: f64, b: f64, d: f64) -> ComplexMatrix3 {
    ComplexMatrix3::from_diagonal(&nalgebra::Vector3::new(c(a), c(b), c(d)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_asymmetry, Basis};

    fn hermitian_sample() -> ComplexMatrix3 {
        let mut m = ComplexMatrix3::new(
            c(0.5), C64::new(0.1, 0.2), C64::new(-0.05, 0.03),
            C64::new(0.1, -0.2), c(0.3), C64::new(0.02, -0.07),
            C64::new(-0.05, -0.03), C64::new(0.02, 0.07), c(0.2),
        );
        m /= m.trace();
        m
    }

    #[test]
    fn zero_rates_give_zero_dissipator() {
        let ops = make_dephasing(&[(0, 0.0), (1, 0.0), (2, 0.0)]).unwrap();
        let rho = hermitian_sample();
        for op in &ops {
            assert_eq!(op.dissipate(&rho), ComplexMatrix3::zeros());
        }
    }

    #[test]
    fn rejects_negative_rates_and_bad_levels() {
        assert!(make_dephasing(&[(0, -1e-3)]).is_err());
        assert!(make_dephasing(&[(3, 1.0)]).is_err());
        assert!(LindbladOp::relaxation(1, 1, 1.0).is_err());
        assert!(DecoherenceParams::dephasing([0.1, -0.1, 0.0]).validate().is_err());
        let bad = DecoherenceParams { contrast: 1.5, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn projector_ops_damp_coherences_at_pair_sums() {
        // Expand D(A) for the three projectors entry by entry: a coherence
        // ρ_ij loses γ_i + γ_j, populations are untouched.
        let levels = [0.03, 0.05, 0.11];
        let ops = make_dephasing(&[(0, levels[0]), (1, levels[1]), (2, levels[2])]).unwrap();
        let rho = hermitian_sample();
        let mut d = ComplexMatrix3::zeros();
        for op in &ops {
            d += op.dissipate(&rho);
        }
        for i in 0..3 {
            assert!(d[(i, i)].norm() < 1e-16);
            for j in 0..3 {
                if i != j {
                    let want = -rho[(i, j)] * (levels[i] + levels[j]);
                    assert!((d[(i, j)] - want).norm() < 1e-16);
                }
            }
        }
    }

    #[test]
    fn per_level_decomposition() {
        let g = [0.0784, 0.0784, 0.1568];
        let levels = per_level_rates(g).unwrap();
        assert_eq!(levels[0], 0.0);
        assert!((levels[1] - 0.0784).abs() < 1e-16);
        assert!((levels[2] - 0.0784).abs() < 1e-16);
        assert!(per_level_rates([1.0, 0.1, 0.1]).is_none());
        assert_eq!(per_level_rates([0.0; 3]), Some([0.0; 3]));
    }

    #[test]
    fn infeasible_triple_damps_directly() {
        let dec = DecoherenceParams::dephasing([1.0, 0.1, 0.1]);
        let eq = MasterEquation::new(ComplexMatrix3::zeros(), &dec).unwrap();
        assert!(eq.ops.is_empty());
        assert_eq!(eq.coherence_damping, [1.0, 0.1, 0.1]);
        let rho = hermitian_sample();
        let d = eq.rhs(&rho);
        for (&(a, b), g) in COHERENCES.iter().zip(dec.gamma) {
            assert!((d[(a, b)] + rho[(a, b)] * g).norm() < 1e-16);
            assert!((d[(b, a)] + rho[(b, a)] * g).norm() < 1e-16);
        }
    }

    #[test]
    fn zero_hamiltonian_no_ops_is_static() {
        let rho = DensityMatrix { rho: hermitian_sample(), basis: Basis::Bare };
        let d = lindblad_rhs(&rho, &ComplexMatrix3::zeros(), &[]).unwrap();
        assert_eq!(d, ComplexMatrix3::zeros());
    }

    #[test]
    fn maximally_mixed_is_stationary_under_dephasing() {
        let d = crate::model::DriveParams::new(7.0, 2.0, 0.0, 1.3);
        let h = crate::model::rotating_frame_hamiltonian(&d);
        let eq = MasterEquation::new(h, &DecoherenceParams::long_pulse_reference()).unwrap();
        let out = eq.rhs(&DensityMatrix::maximally_mixed(Basis::Bare).rho);
        assert!(out.norm() < 1e-15);
    }

    #[test]
    fn rhs_is_traceless_and_hermitian() {
        let d = crate::model::DriveParams::new(7.0, 2.0, -0.4, 1.3).with_phases(0.3, 1.0);
        let h = crate::model::rotating_frame_hamiltonian(&d);
        let mut dec = DecoherenceParams::dephasing([0.2, 0.3, 0.4]);
        let mut table = [[0.0; 3]; 3];
        table[1][0] = 0.05;
        table[2][0] = 0.02;
        dec.relaxation = Some(table);
        let eq = MasterEquation::new(h, &dec).unwrap();
        assert_eq!(eq.ops.len(), 5);
        let out = eq.rhs(&hermitian_sample());
        assert!(out.trace().norm() < 1e-12);
        assert!(max_asymmetry(&out) < 1e-12);
    }

    #[test]
    fn relaxation_moves_population() {
        let op = LindbladOp::relaxation(1, 0, 0.5).unwrap();
        let rho = diag3(0.0, 1.0, 0.0);
        let d = op.dissipate(&rho);
        assert!((d[(0, 0)].re - 0.5).abs() < 1e-15);
        assert!((d[(1, 1)].re + 0.5).abs() < 1e-15);
    }
}
