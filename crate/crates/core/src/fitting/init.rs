//! Heuristic starting points from the data alone.

use std::f64::consts::{E, PI, TAU};

use crate::error::{Error, Result};

use super::FitModel;

/// Dominant angular frequency and phase of mean-subtracted samples, from a
/// direct discrete Fourier sum (works on nonuniform grids). The phase φ makes
/// the component read cos(ω t - φ).
fn spectral_peak(t: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = t.len();
    let span = t[n - 1] - t[0];
    if span <= 0.0 {
        return None;
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let mut dts: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > 0.0).collect();
    dts.sort_by(|a, b| a.total_cmp(b));
    let dt = *dts.get(dts.len() / 2)?;
    let nyquist = PI / dt;
    let bin = TAU / span;
    let oversample = 8.0;
    let steps = (nyquist / bin * oversample).ceil() as usize;
    let mut best: Option<(f64, f64, f64)> = None;
    for j in 1..=steps {
        let w = j as f64 * bin / oversample;
        let (mut re, mut im) = (0.0, 0.0);
        for (&ti, &yi) in t.iter().zip(y) {
            let (s, c) = (w * ti).sin_cos();
            re += (yi - mean) * c;
            im += (yi - mean) * s;
        }
        let power = re * re + im * im;
        if best.map_or(true, |b| power > b.0) {
            best = Some((power, w, im.atan2(re)));
        }
    }
    best.map(|(_, w, phase)| (w, phase))
}

/// Time from the first sample until the envelope of |y - b| stays below
/// |a|/e, or twice the span if it never does.
fn envelope_decay(t: &[f64], y: &[f64], a: f64, b: f64) -> f64 {
    let n = t.len();
    let mut suffix_max = vec![0.0; n];
    let mut running: f64 = 0.0;
    for k in (0..n).rev() {
        running = running.max((y[k] - b).abs());
        suffix_max[k] = running;
    }
    let level = a.abs() / E;
    let span = t[n - 1] - t[0];
    match (0..n).find(|&k| suffix_max[k] < level) {
        Some(k) if t[k] > t[0] => t[k] - t[0],
        _ => 2.0 * span,
    }
}

/// Starting parameters: b from the mean of the last decile, a from the
/// largest excursion, frequency from the Fourier peak, decay time from the
/// 1/e point of the envelope.
pub fn default_init(model: FitModel, data: &[(f64, f64)]) -> Result<Vec<f64>> {
    if data.len() < 4 {
        return Err(Error::InsufficientData { needed: 4, got: data.len() });
    }
    let mut sorted = data.to_vec();
    sorted.sort_by(|p, q| p.0.total_cmp(&q.0));
    let t: Vec<f64> = sorted.iter().map(|p| p.0).collect();
    let y: Vec<f64> = sorted.iter().map(|p| p.1).collect();
    let n = y.len();
    let max = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = y.iter().copied().fold(f64::INFINITY, f64::min);
    if !(max - min >= 1e-12) {
        return Err(Error::FlatData { range: max - min });
    }

    let tail = (n / 10).max(1);
    let b = y[n - tail..].iter().sum::<f64>() / tail as f64;
    let peak = y
        .iter()
        .copied()
        .max_by(|p, q| (p - b).abs().total_cmp(&(q - b).abs()))
        .unwrap();
    let a = peak - b;
    let decay = envelope_decay(&t, &y, a, b);
    let peak_freq = || spectral_peak(&t, &y).ok_or(Error::FlatData { range: 0.0 });

    Ok(match model {
        FitModel::ExpDecay => vec![a, decay, b],
        FitModel::GaussianRamsey => {
            let (w, _) = peak_freq()?;
            vec![a, decay, w / TAU, b]
        }
        FitModel::DampedRabi => {
            let (w, phase) = peak_freq()?;
            vec![a, decay, phase / w, PI / w, b]
        }
        FitModel::DampedCos4 => {
            let (w, phase) = peak_freq()?;
            // cos⁴ peaks where its fundamental cos(ω t - φ) does; with a < 0
            // the visible maxima are the cos⁴ zeros, half a period away.
            let start = |a: f64, b: f64, decay: f64| {
                let tc = if a < 0.0 { phase / w + PI / w } else { phase / w };
                vec![a, decay, 2.0, tc, b, w / 2.0]
            };
            // cos⁴ is nonnegative, so an undamped record sits on its minimum
            // rather than on the tail mean.
            let candidates = [start(a, b, decay), start(max - min, min, 2.0 * (t[n - 1] - t[0]))];
            let rss = |p: &Vec<f64>| -> f64 { t.iter().zip(&y).map(|(&ti, &yi)| (model.eval(p, ti) - yi).powi(2)).sum() };
            candidates.into_iter().min_by(|p, q| rss(p).total_cmp(&rss(q))).unwrap()
        }
    })
}
