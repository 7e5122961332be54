//! Cyclic-by-pivot complex Jacobi diagonalization for 3x3 Hermitian matrices.

use std::cmp::Ordering;

use nalgebra::Vector3;
use num_complex::Complex64 as C64;

use super::{ComplexMatrix3, DEGENERACY_TOL, PHASE_TOL};

const MAX_ROTATIONS: usize = 100;
const OFFDIAG_PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Diagonalizes a Hermitian matrix that has already been symmetrized.
/// Returns unsorted eigenvalues and the accumulated rotation (columns are
/// eigenvectors).
pub(super) fn diagonalize(mut a: ComplexMatrix3) -> ([f64; 3], ComplexMatrix3) {
    let mut v = ComplexMatrix3::identity();
    let scale = a.norm();
    if scale == 0.0 {
        return ([0.0; 3], v);
    }

    for _ in 0..MAX_ROTATIONS {
        let (p, q) = OFFDIAG_PAIRS
            .iter()
            .copied()
            .max_by(|&(i, j), &(k, l)| {
                a[(i, j)]
                    .norm()
                    .partial_cmp(&a[(k, l)].norm())
                    .unwrap_or(Ordering::Equal)
            })
            .unwrap();
        let apq = a[(p, q)];
        let r = apq.norm();
        if r <= 1e-18 * scale {
            break;
        }

        // Phase out a_pq, then a real Givens rotation zeroes it.
        let phase = C64::from_polar(1.0, -apq.arg());
        let theta = 0.5 * (2.0 * r).atan2(a[(p, p)].re - a[(q, q)].re);
        let (s, c) = theta.sin_cos();

        let mut j = ComplexMatrix3::identity();
        j[(p, p)] = C64::new(c, 0.0);
        j[(p, q)] = C64::new(-s, 0.0);
        j[(q, p)] = phase * s;
        j[(q, q)] = phase * c;

        a = j.adjoint() * a * j;
        v *= j;

        a[(p, q)] = C64::new(0.0, 0.0);
        a[(q, p)] = C64::new(0.0, 0.0);
        for k in 0..3 {
            a[(k, k)].im = 0.0;
        }
    }

    ([a[(0, 0)].re, a[(1, 1)].re, a[(2, 2)].re], v)
}

/// Rotates `v` so its first non-negligible component is real and non-negative.
pub(super) fn fix_phase(v: &mut Vector3<C64>) {
    if let Some(lead) = v.iter().copied().find(|c| c.norm() > PHASE_TOL) {
        let rot = lead.conj() / lead.norm();
        *v *= rot;
        // Remove the rounding residue on the leading component.
        for c in v.iter_mut() {
            if c.norm() > PHASE_TOL {
                c.im = 0.0;
                break;
            }
        }
    }
}

/// Sorts ascending, re-orthonormalizes degenerate clusters, applies the phase
/// convention and breaks ties inside clusters lexicographically.
pub(super) fn canonicalize(values: [f64; 3], vectors: ComplexMatrix3) -> ([f64; 3], ComplexMatrix3) {
    let mut pairs: Vec<(f64, Vector3<C64>)> = (0..3)
        .map(|k| (values[k], vectors.column(k).into_owned()))
        .collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));

    let mut start = 0;
    while start < 3 {
        let mut end = start + 1;
        while end < 3 && (pairs[end].0 - pairs[end - 1].0).abs() < DEGENERACY_TOL {
            end += 1;
        }
        let cluster = &mut pairs[start..end];
        if cluster.len() > 1 {
            gram_schmidt(cluster);
        }
        for (_, v) in cluster.iter_mut() {
            fix_phase(v);
        }
        if cluster.len() > 1 {
            cluster.sort_by(|x, y| lexicographic_desc(&x.1, &y.1));
        }
        start = end;
    }

    let mut out = ComplexMatrix3::zeros();
    let mut vals = [0.0; 3];
    for (k, (lambda, v)) in pairs.into_iter().enumerate() {
        vals[k] = lambda;
        out.set_column(k, &v);
    }
    (vals, out)
}

fn gram_schmidt(cluster: &mut [(f64, Vector3<C64>)]) {
    for i in 0..cluster.len() {
        let mut v = cluster[i].1;
        for j in 0..i {
            let u = cluster[j].1;
            let proj = u.dotc(&v);
            v -= u * proj;
        }
        let n = v.norm();
        if n > 0.0 {
            v /= C64::new(n, 0.0);
        }
        cluster[i].1 = v;
    }
}

fn lexicographic_desc(x: &Vector3<C64>, y: &Vector3<C64>) -> Ordering {
    for k in 0..3 {
        let (a, b) = (x[k].re, y[k].re);
        if (a - b).abs() > PHASE_TOL {
            return b.partial_cmp(&a).unwrap_or(Ordering::Equal);
        }
    }
    Ordering::Equal
}
