//! Stationary solutions of the master equation.

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{Basis, ComplexMatrix3, DensityMatrix};

use super::rk4::{evolve_rk4, MAX_STEP_NORM};
use super::MasterEquation;

const CONDITION_LIMIT: f64 = 1e12;
const NULL_TOL: f64 = 1e-10;

/// The master equation as a real linear map on
/// (ρ00, ρ11, ρ22, Re ρ01, Im ρ01, Re ρ02, Im ρ02, Re ρ12, Im ρ12).
#[derive(Debug, Clone, PartialEq)]
pub struct RealGenerator {
    pub matrix: SMatrix<f64, 9, 9>,
}

const OFF: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

pub(crate) fn to_vec9(rho: &ComplexMatrix3) -> SVector<f64, 9> {
    let mut v = SVector::<f64, 9>::zeros();
    for k in 0..3 {
        v[k] = rho[(k, k)].re;
    }
    for (n, &(a, b)) in OFF.iter().enumerate() {
        v[3 + 2 * n] = rho[(a, b)].re;
        v[4 + 2 * n] = rho[(a, b)].im;
    }
    v
}

pub(crate) fn from_vec9(v: &SVector<f64, 9>) -> ComplexMatrix3 {
    let mut rho = ComplexMatrix3::zeros();
    for k in 0..3 {
        rho[(k, k)] = C64::new(v[k], 0.0);
    }
    for (n, &(a, b)) in OFF.iter().enumerate() {
        let z = C64::new(v[3 + 2 * n], v[4 + 2 * n]);
        rho[(a, b)] = z;
        rho[(b, a)] = z.conj();
    }
    rho
}

impl RealGenerator {
    pub fn new(eq: &MasterEquation) -> Self {
        let mut matrix = SMatrix::<f64, 9, 9>::zeros();
        for k in 0..9 {
            let mut e = SVector::<f64, 9>::zeros();
            e[k] = 1.0;
            let col = to_vec9(&eq.rhs(&from_vec9(&e)));
            matrix.set_column(k, &col);
        }
        Self { matrix }
    }

    fn null_threshold(&self, singular: &[f64]) -> f64 {
        NULL_TOL * singular.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE)
    }

    /// Dimension of the stationary subspace.
    pub fn nullity(&self) -> usize {
        let svd = self.matrix.svd(false, false);
        let s: Vec<f64> = svd.singular_values.iter().copied().collect();
        let tol = self.null_threshold(&s);
        s.iter().filter(|&&x| x <= tol).count()
    }

    /// Smallest nonzero decay rate -Re(λ) over the generator's eigenvalues.
    pub fn slowest_rate(&self) -> Option<f64> {
        let eig = self.matrix.complex_eigenvalues();
        let scale = eig.iter().map(|z| z.norm()).fold(0.0, f64::max);
        eig.iter()
            .map(|z| -z.re)
            .filter(|&r| r > NULL_TOL * scale.max(1.0))
            .min_by(|a, b| a.total_cmp(b))
    }
}

/// Solves 0 = L ρ with tr ρ = 1.
///
/// A unique stationary state is found by replacing the ρ22 row of the real
/// generator with the trace constraint. When the stationary subspace is larger
/// than one dimension the limit depends on where the dynamics started: pass
/// `rho0` and the conserved quantities of `rho0` select the state. Badly
/// conditioned systems fall back to long-time integration.
pub fn steady_state(eq: &MasterEquation, rho0: Option<&DensityMatrix>) -> Result<DensityMatrix> {
    if !eq.is_dissipative() {
        return Err(Error::NoDissipation);
    }
    let gen = RealGenerator::new(eq);
    let nullity = gen.nullity();
    let rho = if nullity > 1 {
        let start = rho0.ok_or(Error::RankDeficient { nullity })?;
        project_onto_stationary(&gen, &to_vec9(&start.rho))?
    } else {
        let mut m = gen.matrix;
        for k in 0..9 {
            m[(2, k)] = if k < 3 { 1.0 } else { 0.0 };
        }
        let mut b = SVector::<f64, 9>::zeros();
        b[2] = 1.0;
        let s = m.svd(false, false).singular_values;
        let smax = s.iter().copied().fold(0.0, f64::max);
        let smin = s.iter().copied().fold(f64::INFINITY, f64::min);
        if smin == 0.0 || smax / smin > CONDITION_LIMIT {
            log::warn!(
                "steady-state system has condition number {:e}; integrating to long times instead",
                smax / smin
            );
            return long_time_limit(eq, &gen, rho0);
        }
        let x = m.lu().solve(&b).ok_or(Error::RankDeficient { nullity: 1 })?;
        from_vec9(&x)
    };
    let basis = rho0.map(|r| r.basis).unwrap_or(Basis::Bare);
    Ok(DensityMatrix { rho: (rho + rho.adjoint()) * C64::new(0.5, 0.0), basis })
}

/// ρ_ss = R (Cᵀ R)⁻¹ Cᵀ x0 with R spanning the right and C the left null
/// space.
fn project_onto_stationary(gen: &RealGenerator, x0: &SVector<f64, 9>) -> Result<ComplexMatrix3> {
    let svd = gen.matrix.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let s: Vec<f64> = svd.singular_values.iter().copied().collect();
    let tol = gen.null_threshold(&s);
    let null: Vec<usize> = (0..9).filter(|&k| s[k] <= tol).collect();
    let n = null.len();
    let r = DMatrix::from_fn(9, n, |i, j| vt[(null[j], i)]);
    let cmat = DMatrix::from_fn(9, n, |i, j| u[(i, null[j])]);
    let ctr = cmat.transpose() * &r;
    let rhs = cmat.transpose() * DVector::from_column_slice(x0.as_slice());
    let a = ctr.lu().solve(&rhs).ok_or(Error::RankDeficient { nullity: n })?;
    let x = r * a;
    Ok(from_vec9(&SVector::<f64, 9>::from_column_slice(x.as_slice())))
}

fn long_time_limit(eq: &MasterEquation, gen: &RealGenerator, rho0: Option<&DensityMatrix>) -> Result<DensityMatrix> {
    let rate = gen.slowest_rate().ok_or(Error::NoDissipation)?;
    let t = 50.0 / rate;
    let start = rho0.copied().unwrap_or_else(DensityMatrix::ground);
    let norm = eq.generator_norm().max(1.0);
    evolve_rk4(&start, eq, t, MAX_STEP_NORM / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::DecoherenceParams;
    use crate::model::{rotating_frame_hamiltonian, DriveParams};
    use nalgebra::Vector3;

    fn max_entry(m: &ComplexMatrix3) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn vec9_round_trip() {
        let mut v = SVector::<f64, 9>::zeros();
        for k in 0..9 {
            v[k] = k as f64 * 0.1 - 0.3;
        }
        assert_eq!(to_vec9(&from_vec9(&v)), v);
    }

    #[test]
    fn driven_dephasing_relaxes_to_mixed() {
        let d = DriveParams::new(8.0, 2.0, 0.0, 1.5);
        let eq = MasterEquation::new(
            rotating_frame_hamiltonian(&d),
            &DecoherenceParams::long_pulse_reference(),
        )
        .unwrap();
        let ss = steady_state(&eq, None).unwrap();
        assert!(max_entry(&(ss.rho - ComplexMatrix3::identity() / C64::new(3.0, 0.0))) < 1e-10);
        assert!(max_entry(&eq.rhs(&ss.rho)) < 1e-10);
    }

    #[test]
    fn undriven_probe_needs_initial_state() {
        let d = DriveParams::new(8.0, 0.0, 0.0, 1.5);
        let eq = MasterEquation::new(
            rotating_frame_hamiltonian(&d),
            &DecoherenceParams::long_pulse_reference(),
        )
        .unwrap();
        assert_eq!(steady_state(&eq, None), Err(Error::RankDeficient { nullity: 2 }));
        let ss = steady_state(&eq, Some(&DensityMatrix::ground())).unwrap();
        let want = ComplexMatrix3::from_diagonal(&Vector3::new(
            C64::new(0.5, 0.0),
            C64::new(0.5, 0.0),
            C64::new(0.0, 0.0),
        ));
        assert!(max_entry(&(ss.rho - want)) < 1e-10);
    }

    #[test]
    fn coherent_dynamics_has_no_steady_state() {
        let eq = MasterEquation::unitary(rotating_frame_hamiltonian(&DriveParams::new(1.0, 1.0, 0.0, 0.0))).unwrap();
        assert_eq!(steady_state(&eq, None), Err(Error::NoDissipation));
    }

    #[test]
    fn relaxation_pumps_into_ground() {
        let mut table = [[0.0; 3]; 3];
        table[1][0] = 1.0;
        table[2][0] = 1.0;
        let dec = DecoherenceParams { relaxation: Some(table), ..Default::default() };
        let eq = MasterEquation::new(ComplexMatrix3::zeros(), &dec).unwrap();
        let ss = steady_state(&eq, None).unwrap();
        assert!(max_entry(&(ss.rho - DensityMatrix::ground().rho)) < 1e-12);
    }

    #[test]
    fn slowest_rate_of_pure_dephasing() {
        let eq = MasterEquation::new(
            ComplexMatrix3::zeros(),
            &DecoherenceParams::dephasing([0.3, 0.5, 0.6]),
        )
        .unwrap();
        let rate = RealGenerator::new(&eq).slowest_rate().unwrap();
        assert!((rate - 0.3).abs() < 1e-10);
    }
}
