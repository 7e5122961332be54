//! Probe-detuning scans and dip extraction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lindblad::DecoherenceParams;
use crate::model::DriveParams;
use crate::units::angular_to_mhz;

use super::schedule::{run_schedule, PrePulse, PulseSchedule};

/// Optional Gaussian noise added to each PL sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlNoise {
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    #[serde(default)]
    pub pre_pulses: Vec<PrePulse>,
    #[serde(default)]
    pub noise: Option<PlNoise>,
    #[serde(default)]
    pub dt: Option<f64>,
}

/// Everything needed to regenerate a scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanMetadata {
    pub drive: DriveParams,
    pub duration: f64,
    pub decoherence: Option<DecoherenceParams>,
    pub options: ScanOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    /// Probe detunings (rad/us).
    pub axis: Vec<f64>,
    /// The same axis in MHz.
    pub axis_mhz: Vec<f64>,
    pub p0: Vec<f64>,
    /// Noiseless values lie in [1 - C, 1].
    pub pl: Vec<f64>,
    pub metadata: ScanMetadata,
}

/// `points` evenly spaced detunings over [center - half_span, center + half_span].
pub fn detuning_grid(center: f64, half_span: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![center; points];
    }
    let step = 2.0 * half_span / (points - 1) as f64;
    (0..points).map(|k| center - half_span + step * k as f64).collect()
}

/// ±1.5 Ωc with 301 points.
pub fn default_grid(omega_c: f64) -> Vec<f64> {
    detuning_grid(0.0, 1.5 * omega_c, 301)
}

pub fn spectrum_scan(base: &DriveParams, grid: &[f64], t: f64, dec: Option<&DecoherenceParams>) -> Result<ScanResult> {
    spectrum_scan_with(base, grid, t, dec, &ScanOptions::default())
}

/// One schedule per probe detuning, evaluated in parallel on the current
/// rayon pool and assembled in grid order.
pub fn spectrum_scan_with(
    base: &DriveParams,
    grid: &[f64],
    t: f64,
    dec: Option<&DecoherenceParams>,
    opts: &ScanOptions,
) -> Result<ScanResult> {
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::param("grid", "probe detunings must be sorted ascending"));
    }
    let results: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&dp| {
            let mut s = PulseSchedule::new(base.with_delta_p(dp), t);
            s.pre_pulses = opts.pre_pulses.clone();
            s.dt = opts.dt;
            run_schedule(&s, dec).map(|m| (m.p0, m.pl))
        })
        .collect::<Result<_>>()?;
    let (p0, mut pl): (Vec<f64>, Vec<f64>) = results.into_iter().unzip();

    if let Some(noise) = opts.noise {
        let normal = Normal::new(0.0, noise.sigma)
            .map_err(|e| Error::param("noise", e.to_string()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        for v in &mut pl {
            *v += normal.sample(&mut rng);
        }
    }

    Ok(ScanResult {
        axis: grid.to_vec(),
        axis_mhz: grid.iter().map(|&x| angular_to_mhz(x)).collect(),
        p0,
        pl,
        metadata: ScanMetadata {
            drive: *base,
            duration: t,
            decoherence: dec.copied(),
            options: opts.clone(),
        },
    })
}

/// A refined local minimum of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dip {
    /// Detuning of the minimum (rad/us).
    pub position: f64,
    /// Interpolated PL at the minimum.
    pub pl: f64,
    /// Interpolated |0> population at the minimum.
    pub p0: f64,
    /// Scan maximum minus the dip PL.
    pub depth: f64,
}

impl ScanResult {
    pub fn dips(&self) -> Vec<Dip> {
        find_dips(self)
    }

    /// Deepest dip on each side of `center`.
    pub fn doublet(&self, center: f64) -> Option<(Dip, Dip)> {
        doublet(&self.dips(), center)
    }
}

pub(crate) fn doublet(dips: &[Dip], center: f64) -> Option<(Dip, Dip)> {
    let deepest = |it: &mut dyn Iterator<Item = &Dip>| it.copied().max_by(|a, b| a.depth.total_cmp(&b.depth));
    let lower = deepest(&mut dips.iter().filter(|d| d.position < center))?;
    let upper = deepest(&mut dips.iter().filter(|d| d.position > center))?;
    Some((lower, upper))
}

pub fn find_dips(scan: &ScanResult) -> Vec<Dip> {
    find_dips_xy(&scan.axis, &scan.pl, Some(&scan.p0))
}

/// Local minima below max - 0.2 (max - min), refined by a three-point
/// parabola. Fewer than five points or no qualifying minima give an empty
/// list. Sorted by position.
pub fn find_dips_xy(x: &[f64], y: &[f64], p0: Option<&[f64]>) -> Vec<Dip> {
    let n = x.len().min(y.len());
    if n < 5 {
        return Vec::new();
    }
    let max = y[..n].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = y[..n].iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = max - 0.2 * (max - min);
    let mut dips = Vec::new();
    for i in 1..n - 1 {
        if !(y[i] < y[i - 1] && y[i] <= y[i + 1] && y[i] < threshold) {
            continue;
        }
        let xs = [x[i - 1], x[i], x[i + 1]];
        let pos = parabola_vertex(xs, [y[i - 1], y[i], y[i + 1]]).unwrap_or(x[i]);
        let pl = lagrange3(xs, [y[i - 1], y[i], y[i + 1]], pos);
        let p0v = match p0 {
            Some(p) => lagrange3(xs, [p[i - 1], p[i], p[i + 1]], pos),
            None => f64::NAN,
        };
        dips.push(Dip { position: pos, pl, p0: p0v, depth: max - pl });
    }
    dips
}

fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<f64> {
    let (d0, d2) = (x[1] - x[0], x[1] - x[2]);
    let num = d0 * d0 * (y[1] - y[2]) - d2 * d2 * (y[1] - y[0]);
    let den = d0 * (y[1] - y[2]) - d2 * (y[1] - y[0]);
    if den == 0.0 {
        return None;
    }
    Some((x[1] - 0.5 * num / den).clamp(x[0], x[2]))
}

fn lagrange3(x: [f64; 3], y: [f64; 3], at: f64) -> f64 {
    (0..3)
        .map(|i| {
            let w: f64 = (0..3)
                .filter(|&j| j != i)
                .map(|j| (at - x[j]) / (x[i] - x[j]))
                .product();
            w * y[i]
        })
        .sum()
}
