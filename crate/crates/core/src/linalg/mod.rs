//! Fixed-size complex linear algebra on the three-level Hilbert space.
//!
//! Everything here is a pure function of small stack-allocated values. The
//! Hermitian eigensolver is a complex Jacobi iteration; it stays accurate
//! through exact and near degeneracies, which the closed-form cubic does not.

mod jacobi;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 3x3 complex matrix: Hamiltonians (rad/us), unitaries, density matrices.
pub type ComplexMatrix3 = Matrix3<C64>;

pub(crate) const HERMITIAN_TOL: f64 = 1e-12;
pub(crate) const UNITARY_TOL: f64 = 1e-10;
pub(crate) const NORM_TOL: f64 = 1e-10;
pub(crate) const DEGENERACY_TOL: f64 = 1e-10;
pub(crate) const PHASE_TOL: f64 = 1e-12;

/// Which basis the components of a state refer to.
///
/// `Bare` is (|0>, |1>, |2>) = (m_s = 0, m_s = -1, m_s = +1). `Dressed` is
/// (|+>, |->, |2>) with |+-> = (|0> +- |1>)/sqrt(2), the eigenbasis of a
/// resonant coupling field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    Bare,
    Dressed,
}

/// Columns are |+>, |->, |2> expressed in the bare basis. Real, symmetric and
/// its own inverse.
pub fn resonant_dressing_matrix() -> ComplexMatrix3 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix3::new(
        c(h), c(h), c(0.0),
        c(h), c(-h), c(0.0),
        c(0.0), c(0.0), c(1.0),
    )
}

#[inline]
pub(crate) fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Largest entrywise |M - M^dagger|.
pub fn max_asymmetry(m: &ComplexMatrix3) -> f64 {
    (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise |U^dagger U - I|.
pub fn unitarity_deviation(u: &ComplexMatrix3) -> f64 {
    (u.adjoint() * u - ComplexMatrix3::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn max_abs(m: &ComplexMatrix3) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Rejects matrices whose asymmetry exceeds 1e-12 (scaled by the largest
/// entry when that exceeds one).
pub fn check_hermitian(m: &ComplexMatrix3) -> Result<()> {
    let asym = max_asymmetry(m);
    if asym.is_nan() || asym >= HERMITIAN_TOL * max_abs(m).max(1.0) {
        return Err(Error::NotHermitian { max_asymmetry: asym });
    }
    Ok(())
}

pub fn check_unitary(u: &ComplexMatrix3) -> Result<()> {
    let dev = unitarity_deviation(u);
    if dev.is_nan() || dev >= UNITARY_TOL {
        return Err(Error::NotUnitary { deviation: dev });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector3 {
    pub amplitudes: Vector3<C64>,
    pub basis: Basis,
}

impl StateVector3 {
    /// Wraps amplitudes that must already be normalized to 1e-10.
    pub fn new(amplitudes: Vector3<C64>, basis: Basis) -> Result<Self> {
        let n2 = amplitudes.norm_squared();
        if !((n2 - 1.0).abs() < NORM_TOL) {
            return Err(Error::param(
                "amplitudes",
                format!("state norm^2 = {n2} is not 1"),
            ));
        }
        Ok(Self { amplitudes, basis })
    }

    /// Normalizes arbitrary nonzero amplitudes.
    pub fn normalized(amplitudes: Vector3<C64>, basis: Basis) -> Result<Self> {
        let n = amplitudes.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::param("amplitudes", "cannot normalize a zero vector"));
        }
        Ok(Self {
            amplitudes: amplitudes / c(n),
            basis,
        })
    }

    pub fn basis_state(level: usize, basis: Basis) -> Self {
        let mut amplitudes = Vector3::zeros();
        amplitudes[level] = c(1.0);
        Self { amplitudes, basis }
    }

    /// Resonant dressed state |+> = (|0> + |1>)/sqrt(2), in the bare basis.
    pub fn plus() -> Self {
        Self::basis_state(0, Basis::Dressed).to_bare()
    }

    pub fn minus() -> Self {
        Self::basis_state(1, Basis::Dressed).to_bare()
    }

    pub fn to_bare(self) -> Self {
        match self.basis {
            Basis::Bare => self,
            Basis::Dressed => Self {
                amplitudes: resonant_dressing_matrix() * self.amplitudes,
                basis: Basis::Bare,
            },
        }
    }

    pub fn to_dressed(self) -> Self {
        match self.basis {
            Basis::Dressed => self,
            Basis::Bare => Self {
                amplitudes: resonant_dressing_matrix() * self.amplitudes,
                basis: Basis::Dressed,
            },
        }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// <self|other>; both must share a basis tag.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch {
                expected: self.basis,
                found: other.basis,
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }
}

/// Per-invariant diagnostics for a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityHealth {
    pub trace_error: f64,
    pub max_asymmetry: f64,
    pub min_eigenvalue: f64,
}

impl DensityHealth {
    pub fn is_physical(&self) -> bool {
        self.trace_error < 1e-9 && self.max_asymmetry < 1e-10 && self.min_eigenvalue >= -1e-7
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    pub rho: ComplexMatrix3,
    pub basis: Basis,
}

impl DensityMatrix {
    pub fn from_pure(psi: &StateVector3) -> Self {
        Self {
            rho: psi.amplitudes * psi.amplitudes.adjoint(),
            basis: psi.basis,
        }
    }

    pub fn maximally_mixed(basis: Basis) -> Self {
        Self {
            rho: ComplexMatrix3::identity() / c(3.0),
            basis,
        }
    }

    pub fn ground() -> Self {
        Self::from_pure(&StateVector3::basis_state(0, Basis::Bare))
    }

    pub fn population(&self, level: usize) -> f64 {
        self.rho[(level, level)].re
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    pub fn to_bare(self) -> Self {
        match self.basis {
            Basis::Bare => self,
            Basis::Dressed => {
                let w = resonant_dressing_matrix();
                Self {
                    rho: w * self.rho * w,
                    basis: Basis::Bare,
                }
            }
        }
    }

    pub fn health(&self) -> DensityHealth {
        let asym = max_asymmetry(&self.rho);
        let hermitian = (self.rho + self.rho.adjoint()) / c(2.0);
        let (vals, _) = jacobi::diagonalize(hermitian);
        DensityHealth {
            trace_error: (self.trace() - c(1.0)).norm(),
            max_asymmetry: asym,
            min_eigenvalue: vals.iter().copied().fold(f64::INFINITY, f64::min),
        }
    }
}

/// Eigenvalues ascending (rad/us); eigenvector k is column k of `vectors`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub values: [f64; 3],
    pub vectors: ComplexMatrix3,
}

impl EigenSystem {
    pub fn vector(&self, k: usize) -> Vector3<C64> {
        self.vectors.column(k).into_owned()
    }

    /// V diag(values) V^dagger.
    pub fn reconstruct(&self) -> ComplexMatrix3 {
        let d = ComplexMatrix3::from_diagonal(&Vector3::new(
            c(self.values[0]),
            c(self.values[1]),
            c(self.values[2]),
        ));
        self.vectors * d * self.vectors.adjoint()
    }

    pub fn spectral_radius(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues come back ascending. Each eigenvector has its first component
/// of modulus above 1e-12 real and non-negative; degenerate clusters are
/// re-orthonormalized and ordered by descending real parts.
pub fn eig_hermitian(h: &ComplexMatrix3) -> Result<EigenSystem> {
    check_hermitian(h)?;
    let sym = (h + h.adjoint()) / c(2.0);
    let (values, vectors) = jacobi::diagonalize(sym);
    let (values, vectors) = jacobi::canonicalize(values, vectors);
    Ok(EigenSystem { values, vectors })
}

/// U = exp(-i H t) = V exp(-i Lambda t) V^dagger.
pub fn propagator(h: &ComplexMatrix3, t: f64) -> Result<ComplexMatrix3> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::param("t", format!("duration must be finite and >= 0, got {t}")));
    }
    let eig = eig_hermitian(h)?;
    Ok(propagator_from_eig(&eig, t))
}

pub(crate) fn propagator_from_eig(eig: &EigenSystem, t: f64) -> ComplexMatrix3 {
    let phases = Vector3::from_iterator(eig.values.iter().map(|&l| C64::from_polar(1.0, -l * t)));
    eig.vectors * ComplexMatrix3::from_diagonal(&phases) * eig.vectors.adjoint()
}

/// V^dagger H V for unitary V.
pub fn conjugate_basis(h: &ComplexMatrix3, v: &ComplexMatrix3) -> Result<ComplexMatrix3> {
    check_unitary(v)?;
    Ok(v.adjoint() * h * v)
}

/// Largest |eigenvalue| of a Hermitian matrix.
pub fn spectral_norm(h: &ComplexMatrix3) -> Result<f64> {
    Ok(eig_hermitian(h)?.spectral_radius())
}
