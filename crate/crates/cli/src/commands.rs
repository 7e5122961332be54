//! One function per subcommand: resolved configuration in, report out.

use std::path::Path;

use anyhow::Context;
use atsim_core::experiments::{
    amplitude_sweep, detuning_grid, detuning_sweep, dynamics_trace, optimal_durations, spectrum_scan_with, Family,
    GridSpec, ProbeAmplitude, ScanOptions, SweepPoint,
};
use atsim_core::fitting::{default_init, fit, FitModel, FitOptions, FitResult};
use atsim_core::lindblad::steady_state;
use atsim_core::model::rotating_frame_hamiltonian;
use atsim_core::units::angular_to_mhz;
use atsim_core::{analytic_interference, pl_from_p0, DecoherenceParams, DensityMatrix, Dip, MasterEquation};
use serde_json::{json, Value};

use crate::config::{ConfigError, RunConfig};
use crate::output::{num, Report};

fn missing(section: &str) -> anyhow::Error {
    ConfigError(format!("missing '{section}' section")).into()
}

fn dip_json(d: &Dip) -> Value {
    json!({
        "delta_p_mhz": angular_to_mhz(d.position),
        "p0": d.p0,
        "pl": d.pl,
        "depth": d.depth,
    })
}

fn dip_note(d: &Dip) -> String {
    format!(
        "dip: delta_p_mhz={}, p0={}, pl={}, depth={}",
        num(angular_to_mhz(d.position)),
        num(d.p0),
        num(d.pl),
        num(d.depth)
    )
}

fn fit_json(r: &FitResult) -> Value {
    let params: serde_json::Map<String, Value> = r.named().into_iter().map(|(n, v, _)| (n.to_string(), json!(v))).collect();
    let errors: serde_json::Map<String, Value> = r
        .named()
        .into_iter()
        .map(|(n, _, e)| (n.to_string(), if e.is_finite() { json!(e) } else { Value::Null }))
        .collect();
    json!({
        "model": r.model,
        "params": params,
        "std_errors": errors,
        "rss": r.rss,
        "converged": r.converged,
        "iterations": r.iterations,
        "frequency_mhz": r.ordinary_frequency(),
    })
}

fn fit_notes(r: &FitResult) -> Vec<String> {
    let mut notes: Vec<String> = r
        .named()
        .into_iter()
        .map(|(n, v, e)| format!("fit {}: {n} = {} +/- {}", r.model.name(), num(v), num(e)))
        .collect();
    notes.push(format!("fit {}: rss = {}, converged = {}", r.model.name(), num(r.rss), r.converged));
    notes
}

fn fit_series(model: FitModel, data: &[(f64, f64)], init: Option<&[f64]>, opts: &FitOptions) -> anyhow::Result<FitResult> {
    let init = match init {
        Some(p) => p.to_vec(),
        None => default_init(model, data)?,
    };
    Ok(fit(model, data, &init, opts)?)
}

pub fn spectrum(cfg: RunConfig) -> anyhow::Result<Report> {
    let d = cfg.drive_params()?;
    let t = cfg.require_duration()?;
    let scan_cfg = cfg.scan.clone().ok_or_else(|| missing("scan"))?;
    let center = scan_cfg.center.unwrap_or(0.0);
    let grid = detuning_grid(center, scan_cfg.half_span.unwrap_or(0.0), scan_cfg.points.unwrap_or(301));
    let opts = ScanOptions { pre_pulses: scan_cfg.pre_pulses.clone(), noise: cfg.noise(), dt: scan_cfg.dt };
    let scan = spectrum_scan_with(&d, &grid, t, cfg.decoherence.as_ref(), &opts)?;
    let dips = scan.dips();

    let mut report = Report::new("spectrum", cfg, vec!["delta_p_mhz", "p0", "pl"]);
    for k in 0..scan.axis.len() {
        report.row(&[scan.axis_mhz[k], scan.p0[k], scan.pl[k]]);
    }
    report.notes = dips.iter().map(dip_note).collect();
    let doublet = scan.doublet(center);
    if let Some((lo, hi)) = doublet {
        report.notes.push(format!("splitting_mhz: {}", num(angular_to_mhz(hi.position - lo.position))));
    }
    report.field("axis", json!(scan.axis_mhz));
    report.field("p0", json!(scan.p0));
    report.field("pl", json!(scan.pl));
    report.field("dips", Value::Array(dips.iter().map(dip_json).collect()));
    report.field("splitting_mhz", json!(doublet.map(|(lo, hi)| angular_to_mhz(hi.position - lo.position))));
    Ok(report)
}

pub fn dynamics(cfg: RunConfig) -> anyhow::Result<Report> {
    let d = cfg.drive_params()?;
    let dyn_cfg = cfg.dynamics.clone().ok_or_else(|| missing("dynamics"))?;
    let trace = dynamics_trace(&d, dyn_cfg.n_max.unwrap_or(79), cfg.decoherence.as_ref())?;

    let mut report = Report::new("dynamics", cfg, vec!["t_us", "p0", "pl"]);
    for k in 0..trace.times.len() {
        report.row(&[trace.times[k], trace.p0[k], trace.pl[k]]);
    }
    report.field("axis", json!(trace.times));
    report.field("p0", json!(trace.p0));
    report.field("pl", json!(trace.pl));
    report.field("dips", json!([]));
    if let Some(model) = dyn_cfg.fit {
        let data: Vec<(f64, f64)> = trace.times.iter().copied().zip(trace.pl.iter().copied()).collect();
        let r = fit_series(model, &data, None, &FitOptions::default()).context("fitting the trace")?;
        report.notes = fit_notes(&r);
        report.field("fit", fit_json(&r));
    }
    Ok(report)
}

fn sweep_report(command: &'static str, axis: &'static str, cfg: RunConfig, points: &[SweepPoint], axis_of: fn(&SweepPoint) -> f64) -> Report {
    let mut report = Report::new(
        command,
        cfg,
        vec![axis, "omega_p_mhz", "duration_us", "splitting_mhz", "predicted_mhz", "lower_mhz", "upper_mhz", "lower_depth", "upper_depth"],
    );
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    for p in points {
        let (lo, hi) = (p.doublet.map(|d| d.0), p.doublet.map(|d| d.1));
        report.rows.push(vec![
            num(angular_to_mhz(axis_of(p))),
            num(angular_to_mhz(p.omega_p)),
            num(p.duration),
            opt(p.splitting.map(angular_to_mhz)),
            num(angular_to_mhz(p.predicted)),
            opt(lo.map(|d| angular_to_mhz(d.position))),
            opt(hi.map(|d| angular_to_mhz(d.position))),
            opt(lo.map(|d| d.depth)),
            opt(hi.map(|d| d.depth)),
        ]);
    }
    let rows: Vec<Value> = points
        .iter()
        .map(|p| {
            json!({
                "omega_c_mhz": angular_to_mhz(p.omega_c),
                "omega_p_mhz": angular_to_mhz(p.omega_p),
                "delta_c_mhz": angular_to_mhz(p.delta_c),
                "duration_us": p.duration,
                "splitting_mhz": p.splitting.map(angular_to_mhz),
                "predicted_mhz": angular_to_mhz(p.predicted),
                "dips": p.dips.iter().map(dip_json).collect::<Vec<_>>(),
            })
        })
        .collect();
    report.field("axis", json!(points.iter().map(|p| angular_to_mhz(axis_of(p))).collect::<Vec<_>>()));
    report.field("points", Value::Array(rows));
    report
}

fn grid_spec(cfg: &RunConfig) -> GridSpec {
    let s = cfg.sweep.as_ref();
    let default = GridSpec::default();
    GridSpec {
        half_span: s.and_then(|s| s.half_span).unwrap_or(default.half_span),
        points: s.and_then(|s| s.points).unwrap_or(default.points),
    }
}

pub fn sweep_amplitude(cfg: RunConfig) -> anyhow::Result<Report> {
    let sweep = cfg.sweep.clone().ok_or_else(|| missing("sweep"))?;
    let probe = match (cfg.drive.as_ref().and_then(|d| d.omega_p), sweep.ratio) {
        (Some(op), _) if op > 0.0 => ProbeAmplitude::Fixed(op),
        (_, Some(r)) => ProbeAmplitude::Ratio(r),
        _ => return Err(ConfigError("sweep-amplitude needs sweep.ratio or drive.omega_p".into()).into()),
    };
    let rule = sweep.rule.unwrap_or(atsim_core::DurationRule::Optimal);
    let points = amplitude_sweep(&sweep.values, probe, rule, cfg.decoherence.as_ref(), grid_spec(&cfg))?;
    Ok(sweep_report("sweep-amplitude", "omega_c_mhz", cfg, &points, |p| p.omega_c))
}

pub fn sweep_detuning(cfg: RunConfig) -> anyhow::Result<Report> {
    let sweep = cfg.sweep.clone().ok_or_else(|| missing("sweep"))?;
    let base = cfg.drive_params()?;
    let rule = sweep.rule.unwrap_or(atsim_core::DurationRule::Optimal);
    let points = detuning_sweep(&sweep.values, &base, rule, cfg.decoherence.as_ref(), grid_spec(&cfg))?;
    Ok(sweep_report("sweep-detuning", "delta_c_mhz", cfg, &points, |p| p.delta_c))
}

pub fn steady(cfg: RunConfig) -> anyhow::Result<Report> {
    let d = cfg.drive_params()?;
    let dec: DecoherenceParams = cfg.decoherence.ok_or_else(|| missing("decoherence"))?;
    let eq = MasterEquation::new(rotating_frame_hamiltonian(&d), &dec)?;
    let rho = steady_state(&eq, Some(&DensityMatrix::ground()))?;
    let p0 = rho.population(0);
    let pl = pl_from_p0(p0, dec.contrast);

    let mut report = Report::new("steady-state", cfg, vec!["i", "j", "re", "im"]);
    for i in 0..3 {
        for j in 0..3 {
            let z = rho.rho[(i, j)];
            report.rows.push(vec![i.to_string(), j.to_string(), num(z.re), num(z.im)]);
        }
    }
    report.notes = vec![format!("p0: {}", num(p0)), format!("pl: {}", num(pl))];
    let part = |f: fn(&atsim_core::Complex64) -> f64| -> Vec<Vec<f64>> {
        (0..3).map(|i| (0..3).map(|j| f(&rho.rho[(i, j)])).collect()).collect()
    };
    report.field("rho_re", json!(part(|z| z.re)));
    report.field("rho_im", json!(part(|z| z.im)));
    report.field("p0", json!(p0));
    report.field("pl", json!(pl));
    Ok(report)
}

pub fn optimal(cfg: RunConfig) -> anyhow::Result<Report> {
    let d = cfg.drive_params()?;
    let max_index = cfg.optimal.as_ref().and_then(|o| o.max_index).unwrap_or(40);
    let durations = optimal_durations(d.omega_c, d.omega_p, max_index)?;

    let mut report = Report::new("optimal", cfg, vec!["t_us", "family", "n", "k", "residual", "p0"]);
    let mut rows = Vec::new();
    for o in &durations {
        let family = match o.family {
            Family::A => "A",
            Family::B => "B",
        };
        let p0 = analytic_interference(d.omega_p, d.omega_c, o.t);
        report.rows.push(vec![num(o.t), family.into(), o.n.to_string(), o.k.to_string(), num(o.residual), num(p0)]);
        rows.push(json!({"t_us": o.t, "family": family, "n": o.n, "k": o.k, "residual": o.residual, "p0": p0}));
    }
    report.field("axis", json!(durations.iter().map(|o| o.t).collect::<Vec<_>>()));
    report.field("durations", Value::Array(rows));
    Ok(report)
}

fn read_series(path: &Path, columns: [usize; 2]) -> anyhow::Result<Vec<(f64, f64)>> {
    let config_err = |msg: String| -> anyhow::Error { ConfigError(format!("{}: {msg}", path.display())).into() };
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| config_err(e.to_string()))?;
    let mut out = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(|e| config_err(e.to_string()))?;
        let field = |c: usize| record.get(c).and_then(|s| s.parse::<f64>().ok());
        match (field(columns[0]), field(columns[1])) {
            (Some(x), Some(y)) => out.push((x, y)),
            // A header row.
            _ if k == 0 => continue,
            _ => return Err(config_err(format!("row {}: columns {:?} are not both numeric", k + 1, columns))),
        }
    }
    Ok(out)
}

pub fn fit_data(cfg: RunConfig) -> anyhow::Result<Report> {
    let fc = cfg.fit.clone().ok_or_else(|| missing("fit"))?;
    let data = match (&fc.data, &fc.points) {
        (Some(path), _) => read_series(path, fc.columns.unwrap_or([0, 1]))?,
        (None, Some(points)) => points.iter().map(|p| (p[0], p[1])).collect(),
        (None, None) => return Err(missing("fit.data")),
    };
    let opts = FitOptions { bounds: None, max_iter: fc.max_iter.unwrap_or(500), multi_start: fc.multi_start };
    let r = fit_series(fc.model, &data, fc.init.as_deref(), &opts)?;

    let mut report = Report::new("fit", cfg, vec!["t", "y", "model", "residual"]);
    for &(t, y) in &data {
        let m = r.evaluate(t);
        report.row(&[t, y, m, y - m]);
    }
    report.notes = fit_notes(&r);
    report.field("axis", json!(data.iter().map(|p| p.0).collect::<Vec<_>>()));
    report.field("y", json!(data.iter().map(|p| p.1).collect::<Vec<_>>()));
    report.field("fit", fit_json(&r));
    Ok(report)
}
