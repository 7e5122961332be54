//! Least-squares fits of the decay and oscillation models used to read
//! frequencies and coherence times off time traces.

mod init;
mod lm;

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use init::default_init;

/// The four empirical models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// a e^{-(t/T)^k} cos⁴(w (t - t_c)) + b, w in rad/us.
    DampedCos4,
    /// a e^{-(t/T2)²} cos(2π ω t) + b, ω in MHz.
    GaussianRamsey,
    /// a e^{-(x/T)²} cos(π (x - x_c) / w) + b.
    DampedRabi,
    /// a e^{-t/T1} + b.
    ExpDecay,
}

impl FitModel {
    pub const ALL: [FitModel; 4] = [
        FitModel::DampedCos4,
        FitModel::GaussianRamsey,
        FitModel::DampedRabi,
        FitModel::ExpDecay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FitModel::DampedCos4 => "damped_cos4",
            FitModel::GaussianRamsey => "gaussian_ramsey",
            FitModel::DampedRabi => "damped_rabi",
            FitModel::ExpDecay => "exp_decay",
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            FitModel::DampedCos4 => &["a", "T", "k", "t_c", "b", "w"],
            FitModel::GaussianRamsey => &["a", "T2", "omega", "b"],
            FitModel::DampedRabi => &["a", "T", "x_c", "w", "b"],
            FitModel::ExpDecay => &["a", "T1", "b"],
        }
    }

    pub fn param_count(self) -> usize {
        self.param_names().len()
    }

    pub fn index_of(self, name: &str) -> Option<usize> {
        self.param_names().iter().position(|&n| n == name)
    }

    /// Model value at t. `p` is in [`FitModel::param_names`] order.
    pub fn eval(self, p: &[f64], t: f64) -> f64 {
        match self {
            FitModel::DampedCos4 => {
                let [a, tau, k, tc, b, w] = [p[0], p[1], p[2], p[3], p[4], p[5]];
                a * (-(t / tau).abs().powf(k)).exp() * (w * (t - tc)).cos().powi(4) + b
            }
            FitModel::GaussianRamsey => {
                let [a, tau, omega, b] = [p[0], p[1], p[2], p[3]];
                a * (-(t / tau).powi(2)).exp() * (TAU * omega * t).cos() + b
            }
            FitModel::DampedRabi => {
                let [a, tau, xc, w, b] = [p[0], p[1], p[2], p[3], p[4]];
                a * (-(t / tau).powi(2)).exp() * (PI * (t - xc) / w).cos() + b
            }
            FitModel::ExpDecay => {
                let [a, tau, b] = [p[0], p[1], p[2]];
                a * (-t / tau).exp() + b
            }
        }
    }

    /// Default box constraints: decay times positive, the stretch exponent in
    /// [0.5, 4].
    pub fn default_bounds(self) -> Vec<(f64, f64)> {
        let free = (f64::NEG_INFINITY, f64::INFINITY);
        let time = (1e-9, f64::INFINITY);
        match self {
            FitModel::DampedCos4 => vec![free, time, (0.5, 4.0), free, free, free],
            FitModel::GaussianRamsey => vec![free, time, free, free],
            FitModel::DampedRabi => vec![free, time, free, free, free],
            FitModel::ExpDecay => vec![free, time, free],
        }
    }

    /// Angular frequency (rad per unit of the abscissa) of the trace's
    /// fundamental oscillation, if the model oscillates. For cos⁴ this is
    /// 2w: the square of a squared cosine repeats every π/w.
    pub fn angular_frequency(self, p: &[f64]) -> Option<f64> {
        match self {
            FitModel::DampedCos4 => Some(2.0 * p[5].abs()),
            FitModel::GaussianRamsey => Some(TAU * p[2].abs()),
            FitModel::DampedRabi => Some(PI / p[3].abs()),
            FitModel::ExpDecay => None,
        }
    }
}

/// Random restarts around the initial guess.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiStart {
    pub starts: usize,
    /// Relative half-width of the uniform perturbation.
    pub spread: f64,
    pub seed: u64,
}

impl Default for MultiStart {
    fn default() -> Self {
        Self { starts: 5, spread: 0.2, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    /// Per-parameter (lower, upper); the model defaults otherwise.
    pub bounds: Option<Vec<(f64, f64)>>,
    pub max_iter: usize,
    pub multi_start: Option<MultiStart>,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { bounds: None, max_iter: 500, multi_start: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub params: Vec<f64>,
    /// Linearized standard errors; infinite along directions the data does
    /// not constrain.
    pub std_errors: Vec<f64>,
    /// Residual sum of squares.
    pub rss: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Residual sum of squares after each accepted step, starting at the
    /// initial guess.
    pub history: Vec<f64>,
}

impl FitResult {
    pub fn param(&self, name: &str) -> Option<f64> {
        self.model.index_of(name).map(|k| self.params[k])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.model.index_of(name).map(|k| self.std_errors[k])
    }

    pub fn named(&self) -> Vec<(&'static str, f64, f64)> {
        self.model
            .param_names()
            .iter()
            .enumerate()
            .map(|(k, &n)| (n, self.params[k], self.std_errors[k]))
            .collect()
    }

    pub fn residual_norm(&self) -> f64 {
        self.rss.sqrt()
    }

    /// Fundamental angular frequency of the fitted curve.
    pub fn angular_frequency(&self) -> Option<f64> {
        self.model.angular_frequency(&self.params)
    }

    /// The same frequency in cycles per unit of the abscissa (MHz for us).
    pub fn ordinary_frequency(&self) -> Option<f64> {
        self.angular_frequency().map(|w| w / TAU)
    }

    pub fn evaluate(&self, t: f64) -> f64 {
        self.model.eval(&self.params, t)
    }
}

fn check_inputs(model: FitModel, data: &[(f64, f64)], init: &[f64], bounds: &[(f64, f64)]) -> Result<()> {
    let p = model.param_count();
    if init.len() != p {
        return Err(Error::param("init", format!("{} expects {p} parameters, got {}", model.name(), init.len())));
    }
    if bounds.len() != p || bounds.iter().any(|(lo, hi)| !(lo <= hi)) {
        return Err(Error::param("bounds", "one (lower, upper) pair with lower <= upper per parameter"));
    }
    if init.iter().any(|v| !v.is_finite()) {
        return Err(Error::param("init", "initial parameters must be finite"));
    }
    if data.len() < p + 2 {
        return Err(Error::InsufficientData { needed: p + 2, got: data.len() });
    }
    if data.iter().any(|(t, y)| !t.is_finite() || !y.is_finite()) {
        return Err(Error::param("data", "samples must be finite"));
    }
    Ok(())
}

/// Eigen-analysis of the column-normalized normal matrix: the name of the
/// parameter that dominates the least constrained direction, if that
/// direction is numerically flat.
fn degenerate_parameter(model: FitModel, normal: &DMatrix<f64>) -> Option<&'static str> {
    let p = normal.nrows();
    let scale: Vec<f64> = (0..p).map(|k| normal[(k, k)].sqrt()).collect();
    if let Some(k) = scale.iter().position(|&s| s == 0.0 || !s.is_finite()) {
        return Some(model.param_names()[k]);
    }
    let scaled = DMatrix::from_fn(p, p, |i, j| normal[(i, j)] / (scale[i] * scale[j]));
    let eig = SymmetricEigen::new(scaled);
    let (kmin, &lmin) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    if lmin > 1e-14 {
        return None;
    }
    let v = eig.eigenvectors.column(kmin);
    let dominant = v.iamax();
    Some(model.param_names()[dominant])
}

fn standard_errors(normal: &DMatrix<f64>, rss: f64, n: usize) -> Vec<f64> {
    let p = normal.nrows();
    let s2 = rss / (n - p) as f64;
    // Invert in the column-normalized coordinates for conditioning.
    let scale: Vec<f64> = (0..p).map(|k| normal[(k, k)].sqrt()).collect();
    if scale.iter().any(|&s| s == 0.0) {
        return (0..p)
            .map(|k| if scale[k] == 0.0 { f64::INFINITY } else { (s2 / normal[(k, k)]).sqrt() })
            .collect();
    }
    let scaled = DMatrix::from_fn(p, p, |i, j| normal[(i, j)] / (scale[i] * scale[j]));
    match scaled.try_inverse() {
        Some(inv) => (0..p).map(|k| (inv[(k, k)].max(0.0) * s2).sqrt() / scale[k]).collect(),
        None => vec![f64::INFINITY; p],
    }
}

/// Fits `model` to (t, y) samples from `init`.
///
/// Fails if fewer than parameter-count + 2 points are given or if the normal
/// matrix at the initial guess is singular, naming the parameter that
/// dominates the flat direction. Running out of iterations is not an error:
/// the best parameters so far come back with `converged = false`.
pub fn fit(model: FitModel, data: &[(f64, f64)], init: &[f64], opts: &FitOptions) -> Result<FitResult> {
    let bounds = opts.bounds.clone().unwrap_or_else(|| model.default_bounds());
    check_inputs(model, data, init, &bounds)?;
    let settings = lm::LmSettings {
        max_iter: opts.max_iter,
        lower: bounds.iter().map(|b| b.0).collect(),
        upper: bounds.iter().map(|b| b.1).collect(),
    };
    let residuals = |p: &[f64]| DVector::from_iterator(data.len(), data.iter().map(|&(t, y)| model.eval(p, t) - y));

    let mut start = init.to_vec();
    for (k, v) in start.iter_mut().enumerate() {
        *v = v.clamp(settings.lower[k], settings.upper[k]);
    }
    let j0 = lm::jacobian(&residuals, &start, &settings, data.len());
    if let Some(name) = degenerate_parameter(model, &(j0.transpose() * &j0)) {
        return Err(Error::SingularNormalMatrix { parameter: name.to_string() });
    }

    let mut starts = vec![start.clone()];
    if let Some(ms) = opts.multi_start {
        let mut rng = ChaCha8Rng::seed_from_u64(ms.seed);
        for _ in 0..ms.starts {
            starts.push(
                start
                    .iter()
                    .map(|&v| v * (1.0 + rng.random_range(-ms.spread..=ms.spread)))
                    .collect(),
            );
        }
    }
    let best = starts
        .par_iter()
        .map(|s| lm::minimize(residuals, s, &settings))
        .min_by(|a, b| a.rss.total_cmp(&b.rss))
        .expect("at least one start");

    Ok(FitResult {
        model,
        std_errors: standard_errors(&best.normal, best.rss, data.len()),
        params: best.params,
        rss: best.rss,
        converged: best.converged,
        iterations: best.iterations,
        history: best.history,
    })
}

/// Noiseless samples of `model` at `times`.
pub fn generate(model: FitModel, params: &[f64], times: &[f64]) -> Vec<(f64, f64)> {
    times.iter().map(|&t| (t, model.eval(params, t))).collect()
}
