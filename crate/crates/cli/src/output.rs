//! Result files. Every file carries the format version and the resolved
//! configuration, so it can be fed back through `--config`.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::config::{ConfigError, RunConfig};

pub const FORMAT: &str = "atsim/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

pub struct Report {
    pub command: &'static str,
    pub config: RunConfig,
    pub columns: Vec<&'static str>,
    /// CSV body, already formatted.
    pub rows: Vec<Vec<String>>,
    /// Extra `# ` lines in CSV output (dips, fit parameters).
    pub notes: Vec<String>,
    /// Result fields of the JSON document, after format, command and config.
    pub fields: Map<String, Value>,
}

/// Decimal with 12 significant digits; scientific outside [1e-5, 1e12).
pub fn num(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&exp) {
        let s = format!("{x:.11e}");
        let (mantissa, exponent) = s.split_once('e').unwrap_or((&s, "0"));
        return format!("{}e{exponent}", mantissa.trim_end_matches('0').trim_end_matches('.'));
    }
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{x:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl Report {
    pub fn new(command: &'static str, config: RunConfig, columns: Vec<&'static str>) -> Self {
        Self { command, config, columns, rows: Vec::new(), notes: Vec::new(), fields: Map::new() }
    }

    pub fn row(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|&v| num(v)).collect());
    }

    pub fn field(&mut self, key: &str, value: Value) {
        self.fields.insert(key.to_string(), value);
    }

    pub fn write_csv(&self, out: &mut dyn Write) -> anyhow::Result<()> {
        writeln!(out, "# format: {FORMAT}")?;
        writeln!(out, "# command: {}", self.command)?;
        writeln!(out, "# config: {}", serde_json::to_string(&self.config)?)?;
        for note in &self.notes {
            writeln!(out, "# {note}")?;
        }
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, out: &mut dyn Write) -> anyhow::Result<()> {
        let mut doc = Map::new();
        doc.insert("format".into(), json!(FORMAT));
        doc.insert("command".into(), json!(self.command));
        doc.insert("config".into(), serde_json::to_value(&self.config)?);
        doc.extend(self.fields.clone());
        serde_json::to_writer_pretty(&mut *out, &Value::Object(doc))?;
        writeln!(out)?;
        Ok(())
    }

    /// Writes to `path`, or stdout when absent.
    pub fn emit(&self, format: Format, path: Option<&Path>) -> anyhow::Result<()> {
        let mut buf = Vec::new();
        match format {
            Format::Csv => self.write_csv(&mut buf)?,
            Format::Json => self.write_json(&mut buf)?,
        }
        match path {
            Some(p) => fs::write(p, &buf).map_err(|e| ConfigError(format!("{}: {e}", p.display())))?,
            None => {
                let mut out = io::stdout().lock();
                out.write_all(&buf)?;
                out.flush()?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(num(0.0), "0");
        assert_eq!(num(1.0), "1");
        assert_eq!(num(std::f64::consts::PI), "3.14159265359");
        assert_eq!(num(-0.000123456789012345), "-0.000123456789012");
        assert_eq!(num(29.719755119659774), "29.7197551197");
        assert_eq!(num(1.5e-9), "1.5e-9");
        assert_eq!(num(-1.23456789012345e13), "-1.23456789012e13");
        assert_eq!(num(0.853333333333333), "0.853333333333");
    }

    #[test]
    fn csv_layout() {
        let mut r = Report::new("spectrum", RunConfig::default(), vec!["delta_p_mhz", "p0", "pl"]);
        r.row(&[-1.0, 0.5, 0.89]);
        r.notes.push("dip: x".into());
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# format: atsim/1");
        assert_eq!(lines[1], "# command: spectrum");
        assert_eq!(lines[2], r#"# config: {"angular":false}"#);
        assert_eq!(lines[3], "# dip: x");
        assert_eq!(lines[4], "delta_p_mhz,p0,pl");
        assert_eq!(lines[5], "-1,0.5,0.89");
    }

    #[test]
    fn json_layout() {
        let mut r = Report::new("dynamics", RunConfig::default(), vec![]);
        r.field("axis", json!([0.0, 1.0]));
        let mut buf = Vec::new();
        r.write_json(&mut buf).unwrap();
        let v: Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["format"], FORMAT);
        assert_eq!(v["command"], "dynamics");
        assert_eq!(v["axis"][1], 1.0);
    }
}
