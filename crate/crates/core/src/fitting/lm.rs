//! Bounded Levenberg-Marquardt with a central-difference Jacobian.

use nalgebra::{DMatrix, DVector};

pub(crate) struct LmSettings {
    pub max_iter: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

pub(crate) struct LmOutcome {
    pub params: Vec<f64>,
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Residual sum of squares at the start and after every accepted step.
    pub history: Vec<f64>,
    /// JᵀJ at the returned parameters.
    pub normal: DMatrix<f64>,
}

const LAMBDA0: f64 = 1e-3;
const LAMBDA_MAX: f64 = 1e16;
const REL_TOL: f64 = 1e-10;
const GRAD_TOL: f64 = 1e-8;

fn clamp(p: &mut [f64], s: &LmSettings) {
    for (k, v) in p.iter_mut().enumerate() {
        *v = v.clamp(s.lower[k], s.upper[k]);
    }
}

fn rss(r: &DVector<f64>) -> f64 {
    r.norm_squared()
}

/// Central differences, with the stencil shifted one-sided at active bounds.
pub(crate) fn jacobian<F>(f: &F, p: &[f64], s: &LmSettings, n: usize) -> DMatrix<f64>
where
    F: Fn(&[f64]) -> DVector<f64>,
{
    let mut j = DMatrix::zeros(n, p.len());
    let mut q = p.to_vec();
    for k in 0..p.len() {
        let h = 6e-6 * p[k].abs().max(1e-3);
        let up = (p[k] + h).min(s.upper[k]);
        let down = (p[k] - h).max(s.lower[k]);
        if up <= down {
            continue;
        }
        q[k] = up;
        let fu = f(&q);
        q[k] = down;
        let fd = f(&q);
        q[k] = p[k];
        j.set_column(k, &((fu - fd) / (up - down)));
    }
    j
}

pub(crate) fn minimize<F>(f: F, init: &[f64], s: &LmSettings) -> LmOutcome
where
    F: Fn(&[f64]) -> DVector<f64>,
{
    let mut p = init.to_vec();
    clamp(&mut p, s);
    let mut r = f(&p);
    let n = r.len();
    let mut current = rss(&r);
    let mut history = vec![current];
    let mut lambda = LAMBDA0;
    let mut converged = false;
    let mut iterations = 0;
    let mut jac = jacobian(&f, &p, s, n);

    while iterations < s.max_iter {
        iterations += 1;
        let g = jac.transpose() * &r;
        if g.amax() < GRAD_TOL {
            converged = true;
            break;
        }
        let a = jac.transpose() * &jac;
        let floor = 1e-12 * a.diagonal().amax().max(f64::MIN_POSITIVE);

        let mut accepted = false;
        while lambda <= LAMBDA_MAX {
            let mut m = a.clone();
            for k in 0..p.len() {
                m[(k, k)] += lambda * a[(k, k)].max(floor);
            }
            let step = match m.lu().solve(&(-&g)) {
                Some(step) => step,
                None => {
                    lambda *= 10.0;
                    continue;
                }
            };
            let mut trial: Vec<f64> = p.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            clamp(&mut trial, s);
            let rt = f(&trial);
            let trial_rss = rss(&rt);
            if trial_rss.is_finite() && trial_rss < current {
                let rel = (current - trial_rss) / current.max(f64::MIN_POSITIVE);
                p = trial;
                r = rt;
                current = trial_rss;
                history.push(current);
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel < REL_TOL {
                    converged = true;
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            // No damped step lowers the residual: a minimum to working precision.
            converged = current.is_finite();
            break;
        }
        jac = jacobian(&f, &p, s, n);
        if converged {
            break;
        }
    }

    let normal = jac.transpose() * &jac;
    LmOutcome { params: p, rss: current, converged, iterations, history, normal }
}
