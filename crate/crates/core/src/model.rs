//! Hamiltonians of the driven V system and their closed-form spectral
//! quantities.
//!
//! Basis order is fixed to (|0>, |1>, |2>) = (m_s = 0, m_s = -1, m_s = +1).
//! The coupling field drives |0> <-> |1>, the probe drives |0> <-> |2>.
//! Dressed-frame matrices use (|+>, |->, |2>).

use std::f64::consts::SQRT_2;

use nalgebra::Vector3;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, conjugate_basis, Basis, ComplexMatrix3, StateVector3};
use crate::units::mhz_to_angular;

/// Ground-state spin parameters. Frequencies in GHz, field in tesla.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundStateParams {
    /// Zero-field splitting D (GHz).
    pub d: f64,
    /// Electron gyromagnetic ratio (GHz/T).
    pub gamma_e: f64,
    /// Axial field (T).
    pub b_z: f64,
}

impl GroundStateParams {
    pub const NV_ZERO_FIELD_SPLITTING_GHZ: f64 = 2.87;
    pub const NV_GYROMAGNETIC_GHZ_PER_T: f64 = 28.03;

    pub fn nv(b_z: f64) -> Self {
        Self {
            d: Self::NV_ZERO_FIELD_SPLITTING_GHZ,
            gamma_e: Self::NV_GYROMAGNETIC_GHZ_PER_T,
            b_z,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0 && self.d.is_finite()) {
            return Err(Error::param("d", format!("zero-field splitting must be > 0, got {}", self.d)));
        }
        if !(self.b_z >= 0.0 && self.b_z.is_finite()) {
            return Err(Error::param("b_z", format!("axial field must be >= 0, got {}", self.b_z)));
        }
        if !self.gamma_e.is_finite() {
            return Err(Error::param("gamma_e", "must be finite"));
        }
        Ok(())
    }
}

/// Transition frequencies (omega_01, omega_02) in GHz from D S_z^2 with the
/// Zeeman term placing m_s = -1 below m_s = +1 for B_z > 0.
pub fn transition_frequencies(p: &GroundStateParams) -> Result<(f64, f64)> {
    p.validate()?;
    // S_z = diag(0, -1, +1) in the (|0>, |1>, |2>) order.
    let s_z = [0.0, -1.0, 1.0];
    let level = |k: usize| p.d * s_z[k] * s_z[k] + p.gamma_e * p.b_z * s_z[k];
    Ok((level(1) - level(0), level(2) - level(0)))
}

/// Coupling and probe drive parameters. Angular frequencies in rad/us, phases
/// in rad.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveParams {
    pub omega_c: f64,
    pub omega_p: f64,
    pub delta_c: f64,
    pub delta_p: f64,
    #[serde(default)]
    pub phi_c: f64,
    #[serde(default)]
    pub phi_p: f64,
}

impl DriveParams {
    pub fn new(omega_c: f64, omega_p: f64, delta_c: f64, delta_p: f64) -> Self {
        Self {
            omega_c,
            omega_p,
            delta_c,
            delta_p,
            phi_c: 0.0,
            phi_p: 0.0,
        }
    }

    /// All four frequencies given as ordinary frequencies in MHz.
    pub fn from_mhz(omega_c: f64, omega_p: f64, delta_c: f64, delta_p: f64) -> Self {
        Self::new(
            mhz_to_angular(omega_c),
            mhz_to_angular(omega_p),
            mhz_to_angular(delta_c),
            mhz_to_angular(delta_p),
        )
    }

    pub fn with_phases(mut self, phi_c: f64, phi_p: f64) -> Self {
        self.phi_c = phi_c;
        self.phi_p = phi_p;
        self
    }

    pub fn with_delta_p(mut self, delta_p: f64) -> Self {
        self.delta_p = delta_p;
        self
    }

    pub fn with_delta_c(mut self, delta_c: f64) -> Self {
        self.delta_c = delta_c;
        self
    }

    pub fn without_phases(self) -> Self {
        self.with_phases(0.0, 0.0)
    }

    /// sqrt(delta_c^2 + omega_c^2).
    pub fn effective_rabi(&self) -> f64 {
        self.delta_c.hypot(self.omega_c)
    }

    /// Largest angular frequency in the problem, floored at 1 rad/us.
    pub fn fastest_rate(&self) -> f64 {
        [self.omega_c, self.omega_p, self.delta_p.abs(), self.delta_c.abs(), 1.0]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("omega_c", self.omega_c),
            ("omega_p", self.omega_p),
            ("delta_c", self.delta_c),
            ("delta_p", self.delta_p),
            ("phi_c", self.phi_c),
            ("phi_p", self.phi_p),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::param(name, "must be finite"));
            }
        }
        if self.omega_c < 0.0 {
            return Err(Error::param("omega_c", format!("must be >= 0, got {}", self.omega_c)));
        }
        if self.omega_p < 0.0 {
            return Err(Error::param("omega_p", format!("must be >= 0, got {}", self.omega_p)));
        }
        Ok(())
    }

    fn require_resonant_coupling(&self) -> Result<()> {
        if self.delta_c != 0.0 {
            return Err(Error::param(
                "delta_c",
                format!("the dressed frame needs a resonant coupling field, got delta_c = {}", self.delta_c),
            ));
        }
        Ok(())
    }
}

/// Which dressed state the probe is tuned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// |+> <-> |2>, delta_p near +omega_c/2.
    Plus,
    /// |-> <-> |2>, delta_p near -omega_c/2.
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// Rotating-frame Hamiltonian including the initial drive phases.
pub fn rotating_frame_hamiltonian(d: &DriveParams) -> ComplexMatrix3 {
    let hc = C64::from_polar(d.omega_c / 2.0, d.phi_c);
    let hp = C64::from_polar(d.omega_p / 2.0, d.phi_p);
    ComplexMatrix3::new(
        c(0.0), hc, hp,
        hc.conj(), c(d.delta_c), c(0.0),
        hp.conj(), c(0.0), c(d.delta_p),
    )
}

/// diag(1, e^{-i phi_c}, e^{-i phi_p}); conjugating the phased Hamiltonian by
/// this gauge removes the drive phases.
pub fn phase_gauge(d: &DriveParams) -> ComplexMatrix3 {
    ComplexMatrix3::from_diagonal(&Vector3::new(
        c(1.0),
        C64::from_polar(1.0, -d.phi_c),
        C64::from_polar(1.0, -d.phi_p),
    ))
}

/// Hamiltonian in the resonant dressed basis (|+>, |->, |2>). Drive phases are
/// a gauge and are dropped.
pub fn dressed_hamiltonian(d: &DriveParams) -> Result<ComplexMatrix3> {
    d.require_resonant_coupling()?;
    let half = d.omega_c / 2.0;
    let g = SQRT_2 * d.omega_p / 4.0;
    Ok(ComplexMatrix3::new(
        c(half), c(0.0), c(g),
        c(0.0), c(-half), c(g),
        c(g), c(g), c(d.delta_p),
    ))
}

/// Second-order effective Hamiltonian near one probe resonance.
///
/// The off-resonant dressed state is decoupled from |2> and its coupling folded
/// into a level shift of |2>: +omega_p^2/(8 omega_c) for [`Branch::Plus`] and
/// the mirror image for [`Branch::Minus`].
pub fn effective_two_level(d: &DriveParams, branch: Branch) -> Result<ComplexMatrix3> {
    d.require_resonant_coupling()?;
    if d.omega_c <= 0.0 {
        return Err(Error::param(
            "omega_c",
            "perturbative elimination needs omega_c > 0",
        ));
    }
    if d.omega_p > 0.0 && d.omega_c / d.omega_p < 5.0 {
        log::warn!(
            "omega_c/omega_p = {:.3} < 5: second-order elimination is unreliable",
            d.omega_c / d.omega_p
        );
    }
    let half = d.omega_c / 2.0;
    let g = SQRT_2 * d.omega_p / 4.0;
    let shift = d.omega_p * d.omega_p / (8.0 * d.omega_c);
    let mut h = ComplexMatrix3::zeros();
    h[(0, 0)] = c(half);
    h[(1, 1)] = c(-half);
    match branch {
        Branch::Plus => {
            h[(0, 2)] = c(g);
            h[(2, 0)] = c(g);
            h[(2, 2)] = c(d.delta_p + shift);
        }
        Branch::Minus => {
            h[(1, 2)] = c(g);
            h[(2, 1)] = c(g);
            h[(2, 2)] = c(d.delta_p - shift);
        }
    }
    Ok(h)
}

/// Probe detuning that makes |2> resonant with the chosen dressed state after
/// the second-order shift: +-(omega_c/2 - omega_p^2/(8 omega_c)).
pub fn probe_resonance(omega_c: f64, omega_p: f64, branch: Branch) -> Result<f64> {
    if omega_c <= 0.0 {
        return Err(Error::param("omega_c", "resonance position needs omega_c > 0"));
    }
    Ok(branch.sign() * (omega_c / 2.0 - omega_p * omega_p / (8.0 * omega_c)))
}

/// Dressed eigenbasis of the (possibly detuned) coupling block, in bare
/// components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressedBasis {
    pub plus: StateVector3,
    pub minus: StateVector3,
    pub two: StateVector3,
}

impl DressedBasis {
    /// Eigenvectors of [[0, omega_c/2], [omega_c/2, delta_c]] with eigenvalues
    /// (delta_c +- omega_eff)/2, normalized as
    /// |+> ~ omega_c|0> + (delta_c + omega_eff)|1>,
    /// |-> ~ omega_c|0> + (delta_c - omega_eff)|1>.
    pub fn new(omega_c: f64, delta_c: f64) -> Result<Self> {
        let eff = delta_c.hypot(omega_c);
        if eff == 0.0 || !eff.is_finite() {
            return Err(Error::param(
                "omega_c",
                "dressed basis undefined for omega_c = delta_c = 0",
            ));
        }
        // Compute the well-conditioned vector directly and the other as its
        // orthogonal complement; both keep the closed-form sign convention.
        let (plus, minus) = if delta_c >= 0.0 {
            let n = (2.0 * eff * eff + 2.0 * delta_c * eff).sqrt();
            let p = [omega_c / n, (delta_c + eff) / n];
            (p, [p[1], -p[0]])
        } else {
            let n = (2.0 * eff * eff - 2.0 * delta_c * eff).sqrt();
            let m = [omega_c / n, (delta_c - eff) / n];
            ([-m[1], m[0]], m)
        };
        let vec2 = |a: [f64; 2]| StateVector3 {
            amplitudes: Vector3::new(c(a[0]), c(a[1]), c(0.0)),
            basis: Basis::Bare,
        };
        Ok(Self {
            plus: vec2(plus),
            minus: vec2(minus),
            two: StateVector3::basis_state(2, Basis::Bare),
        })
    }

    /// Columns |+>, |->, |2>.
    pub fn matrix(&self) -> ComplexMatrix3 {
        ComplexMatrix3::from_columns(&[
            self.plus.amplitudes,
            self.minus.amplitudes,
            self.two.amplitudes,
        ])
    }
}

/// Hamiltonian in the detuned dressed basis, by exact conjugation of the
/// phase-free rotating-frame Hamiltonian.
pub fn nonresonant_dressed(d: &DriveParams) -> Result<(ComplexMatrix3, DressedBasis)> {
    let basis = DressedBasis::new(d.omega_c, d.delta_c)?;
    let h0 = rotating_frame_hamiltonian(&d.without_phases());
    let h = conjugate_basis(&h0, &basis.matrix())?;
    Ok(((h + h.adjoint()) / c(2.0), basis))
}

/// Autler-Townes splitting: omega_c - omega_p^2/(4 omega_c) for a resonant
/// coupling field, omega_eff otherwise.
pub fn ats_splitting(d: &DriveParams) -> Result<f64> {
    if d.omega_c <= 0.0 {
        return Err(Error::param("omega_c", "splitting needs omega_c > 0"));
    }
    if d.delta_c == 0.0 {
        Ok(d.omega_c - d.omega_p * d.omega_p / (4.0 * d.omega_c))
    } else {
        Ok(d.effective_rabi())
    }
}

/// (E+, E-) = omega_02 + delta_c/2 +- omega_eff/2.
pub fn eigenenergies_detuned(d: &DriveParams, omega_02: f64) -> (f64, f64) {
    let eff = d.effective_rabi();
    let mid = omega_02 + d.delta_c / 2.0;
    (mid + eff / 2.0, mid - eff / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eig_hermitian, propagator};
    use std::f64::consts::TAU;

    fn spectrum(h: &ComplexMatrix3) -> [f64; 3] {
        eig_hermitian(h).unwrap().values
    }

    fn assert_spectra_close(a: [f64; 3], b: [f64; 3], tol: f64) {
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn zero_field_degenerate_at_d() {
        let (w1, w2) = transition_frequencies(&GroundStateParams::nv(0.0)).unwrap();
        assert_eq!((w1, w2), (2.87, 2.87));
    }

    #[test]
    fn nv_at_51_mt() {
        let (w1, w2) = transition_frequencies(&GroundStateParams::nv(0.051)).unwrap();
        // D -+ gamma_e B_z = 2.87 -+ 1.42953
        assert!((w1 - 1.44047).abs() < 1e-9);
        assert!((w2 - 4.29953).abs() < 1e-9);
        // Measured 1.43398 / 4.30738 GHz.
        assert!((w1 / 1.43398 - 1.0).abs() < 5e-3);
        assert!((w2 / 4.30738 - 1.0).abs() < 5e-3);
    }

    #[test]
    fn level_crossing() {
        let p = GroundStateParams { d: 1.0, gamma_e: 1.0, b_z: 1.0 };
        assert_eq!(transition_frequencies(&p).unwrap().0, 0.0);
        assert!(transition_frequencies(&GroundStateParams { d: -1.0, ..p }).is_err());
        assert!(transition_frequencies(&GroundStateParams { b_z: -0.1, ..p }).is_err());
    }

    #[test]
    fn rotating_frame_without_drive_is_diagonal() {
        let h = rotating_frame_hamiltonian(&DriveParams::new(0.0, 0.0, 1.5, -2.5));
        let want = ComplexMatrix3::from_diagonal(&Vector3::new(c(0.0), c(1.5), c(-2.5)));
        assert_eq!(h, want);
    }

    #[test]
    fn rotating_frame_is_real_symmetric_at_zero_phase() {
        let oc = TAU * 4.73;
        let h = rotating_frame_hamiltonian(&DriveParams::new(oc, oc / 14.0, 0.0, 0.3));
        assert!(h.iter().all(|z| z.im == 0.0));
        assert_eq!(h, h.transpose());
        assert_eq!(h[(0, 1)].re, oc / 2.0);
        assert_eq!(h[(0, 2)].re, oc / 28.0);
    }

    #[test]
    fn gauge_removes_phases() {
        let d = DriveParams::new(3.0, 1.0, 0.4, -0.7).with_phases(0.9, -2.1);
        let h = conjugate_basis(&rotating_frame_hamiltonian(&d), &phase_gauge(&d)).unwrap();
        let bare = rotating_frame_hamiltonian(&d.without_phases());
        assert!((h - bare).norm() < 1e-15);
    }

    #[test]
    fn drive_phases_do_not_change_populations() {
        let base = DriveParams::new(5.0, 1.3, 0.2, 2.4);
        let psi0 = Vector3::new(c(1.0), c(0.0), c(0.0));
        let reference = propagator(&rotating_frame_hamiltonian(&base), 2.7).unwrap() * psi0;
        let phased = base.with_phases(1.1, -0.4);
        let psi = propagator(&rotating_frame_hamiltonian(&phased), 2.7).unwrap() * psi0;
        for k in 0..3 {
            assert!((psi[k].norm_sqr() - reference[k].norm_sqr()).abs() < 1e-12);
        }
    }

    #[test]
    fn dressed_without_probe_is_split_by_omega_c() {
        let h = dressed_hamiltonian(&DriveParams::new(6.0, 0.0, 0.0, 1.0)).unwrap();
        let want = ComplexMatrix3::from_diagonal(&Vector3::new(c(3.0), c(-3.0), c(1.0)));
        assert_eq!(h, want);
        assert_eq!(
            dressed_hamiltonian(&DriveParams::new(0.0, 0.0, 0.0, 0.0)).unwrap(),
            ComplexMatrix3::zeros()
        );
    }

    #[test]
    fn dressed_spectrum_matches_rotating_frame() {
        let d = DriveParams::new(10.0, 1.0, 0.0, 3.0);
        assert_spectra_close(
            spectrum(&dressed_hamiltonian(&d).unwrap()),
            spectrum(&rotating_frame_hamiltonian(&d)),
            1e-10,
        );
    }

    #[test]
    fn dressed_rejects_detuned_coupling() {
        assert!(dressed_hamiltonian(&DriveParams::new(1.0, 1.0, 0.1, 0.0)).is_err());
    }

    #[test]
    fn effective_two_level_structure() {
        let (oc, op) = (14.0, 1.0);
        let dp = probe_resonance(oc, op, Branch::Plus).unwrap();
        assert_eq!(dp, oc / 2.0 - op * op / (8.0 * oc));
        let h = effective_two_level(&DriveParams::new(oc, op, 0.0, dp), Branch::Plus).unwrap();
        // On resonance the |+> and shifted |2> energies coincide.
        assert!((h[(0, 0)].re - h[(2, 2)].re).abs() < 1e-14);
        assert_eq!(h[(1, 2)], c(0.0));

        let dm = probe_resonance(oc, op, Branch::Minus).unwrap();
        assert_eq!(dm, -oc / 2.0 + op * op / (8.0 * oc));
        let h = effective_two_level(&DriveParams::new(oc, op, 0.0, dm), Branch::Minus).unwrap();
        assert!((h[(1, 1)].re - h[(2, 2)].re).abs() < 1e-14);
        assert_eq!(h[(0, 2)], c(0.0));

        let h = effective_two_level(&DriveParams::new(oc, 0.0, 0.0, 2.0), Branch::Plus).unwrap();
        assert_eq!(h, ComplexMatrix3::from_diagonal(&Vector3::new(c(7.0), c(-7.0), c(2.0))));

        assert!(effective_two_level(&DriveParams::new(0.0, 1.0, 0.0, 0.0), Branch::Plus).is_err());
    }

    #[test]
    fn effective_two_level_tracks_full_dressed_spectrum() {
        let oc = TAU * 4.73;
        let op = oc / 14.0;
        for branch in [Branch::Plus, Branch::Minus] {
            let res = probe_resonance(oc, op, branch).unwrap();
            for offset in [-0.05, 0.0, 0.05] {
                let d = DriveParams::new(oc, op, 0.0, res + offset * oc);
                let full = spectrum(&dressed_hamiltonian(&d).unwrap());
                let eff = spectrum(&effective_two_level(&d, branch).unwrap());
                // The two coupled eigenvalues sit at the upper (Plus) or lower
                // (Minus) end of both spectra.
                let pick = |s: [f64; 3]| match branch {
                    Branch::Plus => [s[1], s[2]],
                    Branch::Minus => [s[0], s[1]],
                };
                for (a, b) in pick(full).iter().zip(pick(eff)) {
                    assert!((a - b).abs() <= 1e-3 * oc, "{branch:?} {offset}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn nonresonant_reduces_to_resonant() {
        let d = DriveParams::new(10.0, 1.0, 0.0, 3.0);
        let (h, basis) = nonresonant_dressed(&d).unwrap();
        assert!((h - dressed_hamiltonian(&d).unwrap()).norm() < 1e-12);
        let plus = StateVector3::plus();
        assert!((basis.plus.amplitudes - plus.amplitudes).norm() < 1e-15);
    }

    #[test]
    fn nonresonant_spectrum_and_coefficients() {
        for (oc, dc) in [(10.0, 3.0), (10.0, -3.0), (2.0, 7.5), (4.0, -0.1)] {
            let (op, dp) = (1.0, 2.0);
            let d = DriveParams::new(oc, op, dc, dp);
            let (h, basis) = nonresonant_dressed(&d).unwrap();
            assert_spectra_close(spectrum(&h), spectrum(&rotating_frame_hamiltonian(&d)), 1e-10);

            let eff = (oc * oc + dc * dc).sqrt();
            assert!((h[(0, 0)].re - (dc + eff) / 2.0).abs() < 1e-10);
            assert!((h[(1, 1)].re - (dc - eff) / 2.0).abs() < 1e-10);
            assert!(h[(0, 1)].norm() < 1e-10);
            let g_plus = oc * op / (2.0 * (2.0 * eff * eff + 2.0 * dc * eff).sqrt());
            let g_minus = oc * op / (2.0 * (2.0 * eff * eff - 2.0 * dc * eff).sqrt());
            assert!((h[(0, 2)].re - g_plus).abs() < 1e-10);
            assert!((h[(1, 2)].re - g_minus).abs() < 1e-10);
            // Exact conjugation keeps the full probe detuning on |2>.
            assert!((h[(2, 2)].re - dp).abs() < 1e-10);

            let v = basis.matrix();
            assert!((v.adjoint() * v - ComplexMatrix3::identity()).norm() < 1e-10);
        }
    }

    #[test]
    fn nonresonant_basis_limits() {
        let b = DressedBasis::new(0.0, 2.0).unwrap();
        assert_eq!(b.plus.amplitudes[1], c(1.0));
        let b = DressedBasis::new(0.0, -2.0).unwrap();
        assert_eq!(b.plus.amplitudes[0], c(1.0));
        assert_eq!(b.minus.amplitudes[1], c(-1.0));
        assert!(DressedBasis::new(0.0, 0.0).is_err());
    }

    #[test]
    fn splitting_closed_forms() {
        let oc = TAU * 4.73;
        let d = DriveParams::new(oc, oc / 14.0, 0.0, 0.0);
        assert!((ats_splitting(&d).unwrap() - oc * (1.0 - 1.0 / 784.0)).abs() < 1e-12);
        assert_eq!(ats_splitting(&DriveParams::new(oc, 0.0, 0.0, 0.0)).unwrap(), oc);
        let d = DriveParams::new(3.0, 0.5, 4.0, 0.0);
        assert!((ats_splitting(&d).unwrap() - 5.0).abs() < 1e-15);
        assert!(ats_splitting(&DriveParams::new(0.0, 1.0, 0.0, 0.0)).is_err());
    }

    #[test]
    fn detuned_eigenenergies() {
        let (ep, em) = eigenenergies_detuned(&DriveParams::new(2.0, 0.1, 0.0, 0.0), 10.0);
        assert_eq!((ep, em), (11.0, 9.0));
        let (ep, em) = eigenenergies_detuned(&DriveParams::new(2.0, 0.1, 2.0, 0.0), 10.0);
        assert!((ep - em - 2.0 * SQRT_2).abs() < 1e-14);
        let d = DriveParams::new(1.7, 0.1, -0.6, 0.0);
        let (ep, em) = eigenenergies_detuned(&d, 3.0);
        assert!((ep - em - d.effective_rabi()).abs() < 1e-15);
    }
}
