//! Run configuration: JSON in ordinary MHz (or rad/us with `"angular": true`),
//! resolved to explicit rad/us values before anything runs.

use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};

use atsim_core::experiments::{DurationRule, PlNoise, PrePulse};
use atsim_core::fitting::{FitModel, MultiStart};
use atsim_core::model::probe_resonance;
use atsim_core::{Branch, DecoherenceParams, DriveParams};
use serde::{Deserialize, Serialize};

use crate::output::FORMAT;

/// A user-facing configuration problem; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(path: &str, reason: impl std::fmt::Display) -> anyhow::Error {
    ConfigError(format!("{path}: {reason}")).into()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Frequencies are already angular (rad/us) rather than MHz.
    #[serde(default)]
    pub angular: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveConfig>,
    /// Drive duration (us).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration: Option<f64>,
    /// Rates in 1/us; never rescaled by 2π.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decoherence: Option<DecoherenceParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dynamics: Option<DynamicsConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimal: Option<OptimalConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Resonance {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveConfig {
    pub omega_c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_p: Option<f64>,
    /// Ωc/Ωp, used when omega_p is absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default)]
    pub delta_c: f64,
    #[serde(default)]
    pub delta_p: f64,
    /// Put the probe on a shifted dressed-state resonance instead of delta_p.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_resonance: Option<Resonance>,
    #[serde(default)]
    pub phi_c: f64,
    #[serde(default)]
    pub phi_p: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub sigma: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    /// Grid center; defaults to Δc/2.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<f64>,
    /// Half width; defaults to 1.5 Ω_eff.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_span: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseConfig>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub pre_pulses: Vec<PrePulse>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsConfig {
    /// Samples at t = 2nπ/Ωc for n = 0..=n_max.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Fit the trace with this model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitModel>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Ωc values for amplitude sweeps, Δc values for detuning sweeps.
    pub values: Vec<f64>,
    /// Ωc/Ωp for amplitude sweeps; ignored when drive.omega_p is set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<DurationRule>,
    /// Probe grid half width in units of Ω_eff.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half_span: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimalConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_index: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub model: FitModel,
    /// Two-column CSV (t, y); `#` lines are comments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    /// Zero-based (x, y) columns of the data file; (0, 1) by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub multi_start: Option<MultiStart>,
}

/// Output files wrap the resolved configuration.
#[derive(Deserialize)]
struct Embedded {
    format: String,
    config: serde_json::Value,
}

/// Reads a JSON config or the configuration embedded in a previous output
/// file (CSV or JSON).
pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| bad(&path.display().to_string(), e))?;
    parse(&text).map_err(|e| bad(&path.display().to_string(), e))
}

pub fn parse(text: &str) -> anyhow::Result<RunConfig> {
    if text.starts_with('#') {
        let line = text
            .lines()
            .find_map(|l| l.strip_prefix("# config: "))
            .ok_or_else(|| ConfigError("no embedded '# config:' line".into()))?;
        return Ok(serde_json::from_str(line)?);
    }
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.get("format").is_some() {
        let embedded: Embedded = serde_json::from_value(value)?;
        if embedded.format != FORMAT {
            return Err(ConfigError(format!("unsupported output format {:?}", embedded.format)).into());
        }
        return Ok(serde_json::from_value(embedded.config)?);
    }
    // Typed parse of the text itself keeps line/column positions in errors.
    Ok(serde_json::from_str(text)?)
}

fn positive(path: &str, v: f64) -> anyhow::Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(path, format!("must be > 0, got {v}")))
    }
}

impl RunConfig {
    fn scale(&self) -> f64 {
        if self.angular {
            1.0
        } else {
            TAU
        }
    }

    /// Converts every frequency to rad/us, fills defaults that depend on the
    /// drive and checks physical preconditions. The result has
    /// `angular: true` and resolves to itself.
    pub fn resolve(&self) -> anyhow::Result<RunConfig> {
        let s = self.scale();
        let mut out = RunConfig { angular: true, seed: self.seed, ..RunConfig::default() };

        let drive = match &self.drive {
            Some(d) => {
                let omega_c = d.omega_c * s;
                let omega_p = match (d.omega_p, d.ratio) {
                    (Some(p), _) => p * s,
                    (None, Some(r)) => omega_c / positive("drive.ratio", r)?,
                    (None, None) => 0.0,
                };
                let delta_c = d.delta_c * s;
                let delta_p = match d.probe_resonance {
                    Some(branch) => {
                        if delta_c != 0.0 {
                            return Err(bad("drive.probe_resonance", "needs delta_c = 0"));
                        }
                        let b = match branch {
                            Resonance::Plus => Branch::Plus,
                            Resonance::Minus => Branch::Minus,
                        };
                        probe_resonance(omega_c, omega_p, b).map_err(|e| bad("drive.probe_resonance", e))?
                    }
                    None => d.delta_p * s,
                };
                let params = DriveParams::new(omega_c, omega_p, delta_c, delta_p).with_phases(d.phi_c, d.phi_p);
                params.validate().map_err(|e| bad("drive", e))?;
                out.drive = Some(DriveConfig {
                    omega_c,
                    omega_p: Some(omega_p),
                    ratio: None,
                    delta_c,
                    delta_p,
                    probe_resonance: None,
                    phi_c: d.phi_c,
                    phi_p: d.phi_p,
                });
                Some(params)
            }
            None => None,
        };

        if let Some(t) = self.duration {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(bad("duration", format!("must be finite and >= 0, got {t}")));
            }
            out.duration = Some(t);
        }

        if let Some(dec) = &self.decoherence {
            dec.validate().map_err(|e| bad("decoherence", e))?;
            out.decoherence = Some(*dec);
        }

        if let Some(scan) = &self.scan {
            let eff = drive.map(|d| d.effective_rabi()).unwrap_or(0.0);
            let center = scan.center.map(|c| c * s).unwrap_or(drive.map(|d| d.delta_c / 2.0).unwrap_or(0.0));
            let half_span = match scan.half_span {
                Some(h) => positive("scan.half_span", h * s)?,
                None => positive("scan.half_span (1.5 omega_eff)", 1.5 * eff)?,
            };
            let points = scan.points.unwrap_or(301);
            if points < 2 {
                return Err(bad("scan.points", "need at least 2"));
            }
            let noise = match &scan.noise {
                Some(n) => {
                    if !(n.sigma >= 0.0 && n.sigma.is_finite()) {
                        return Err(bad("scan.noise.sigma", format!("must be >= 0, got {}", n.sigma)));
                    }
                    Some(NoiseConfig { sigma: n.sigma, seed: Some(self.seed.or(n.seed).unwrap_or(0)) })
                }
                None => None,
            };
            if let Some(dt) = scan.dt {
                positive("scan.dt", dt)?;
            }
            out.scan = Some(ScanConfig {
                center: Some(center),
                half_span: Some(half_span),
                points: Some(points),
                noise,
                pre_pulses: scan.pre_pulses.clone(),
                dt: scan.dt,
            });
        }

        if let Some(dynamics) = &self.dynamics {
            out.dynamics = Some(DynamicsConfig { n_max: Some(dynamics.n_max.unwrap_or(79)), fit: dynamics.fit });
        }

        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(bad("sweep.values", "empty"));
            }
            let ratio = sweep.ratio.map(|r| positive("sweep.ratio", r)).transpose()?;
            out.sweep = Some(SweepConfig {
                values: sweep.values.iter().map(|v| v * s).collect(),
                ratio,
                rule: Some(sweep.rule.unwrap_or(DurationRule::Optimal)),
                half_span: Some(positive("sweep.half_span", sweep.half_span.unwrap_or(1.5))?),
                points: Some(sweep.points.unwrap_or(301)),
            });
        }

        if let Some(optimal) = &self.optimal {
            out.optimal = Some(OptimalConfig { max_index: Some(optimal.max_index.unwrap_or(40)) });
        }

        if let Some(fit) = &self.fit {
            let mut fit = fit.clone();
            if let Some(ms) = fit.multi_start.as_mut() {
                if let Some(seed) = self.seed {
                    ms.seed = seed;
                }
            }
            fit.max_iter = Some(fit.max_iter.unwrap_or(500));
            if fit.data.is_some() {
                fit.columns = Some(fit.columns.unwrap_or([0, 1]));
            } else if fit.points.is_none() {
                return Err(bad("fit", "needs 'data' (a CSV path) or inline 'points'"));
            }
            if let Some(init) = &fit.init {
                if init.len() != fit.model.param_count() {
                    return Err(bad(
                        "fit.init",
                        format!("{} takes {} parameters, got {}", fit.model.name(), fit.model.param_count(), init.len()),
                    ));
                }
            }
            out.fit = Some(fit);
        }
        Ok(out)
    }

    /// Resolved drive parameters.
    pub fn drive_params(&self) -> anyhow::Result<DriveParams> {
        let d = self.drive.as_ref().ok_or_else(|| ConfigError("missing 'drive' section".into()))?;
        Ok(DriveParams::new(d.omega_c, d.omega_p.unwrap_or(0.0), d.delta_c, d.delta_p).with_phases(d.phi_c, d.phi_p))
    }

    pub fn require_duration(&self) -> anyhow::Result<f64> {
        self.duration.ok_or_else(|| ConfigError("missing 'duration' (us)".into()).into())
    }

    pub fn noise(&self) -> Option<PlNoise> {
        let n = self.scan.as_ref()?.noise.as_ref()?;
        Some(PlNoise { sigma: n.sigma, seed: n.seed.unwrap_or(0) })
    }
}
