use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use atsim_core::experiments::{default_grid, spectrum_scan};
use atsim_core::DriveParams;

fn atsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atsim")).args(args).env_remove("ATSIM_THREADS").output().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn body(csv: &str) -> Vec<Vec<f64>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn help_lists_subcommands() {
    let o = atsim(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for cmd in ["spectrum", "dynamics", "sweep-amplitude", "sweep-detuning", "steady-state", "optimal", "fit", "reproduce"] {
        assert!(text.contains(cmd), "{cmd} missing from help");
    }
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let o = atsim(&["transmogrify"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    fs::write(&path, "{\n  \"drive\": { \"omega_c\": 1, }\n}\n").unwrap();
    let o = atsim(&["spectrum", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2 column"), "{err}");
}

#[test]
fn unknown_config_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("typo.json");
    fs::write(&path, r#"{"drive": {"omega_c": 1, "omegap": 2}, "duration": 1}"#).unwrap();
    let o = atsim(&["spectrum", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("omegap"));
}

#[test]
fn numerical_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ss.json");
    fs::write(&path, r#"{"drive": {"omega_c": 1, "ratio": 3}, "decoherence": {"gamma": [0, 0, 0]}}"#).unwrap();
    let o = atsim(&["steady-state", "--config", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn fig2b_spectrum_matches_library() {
    let o = atsim(&["spectrum", "--config", fixture("fig2b.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# format: atsim/1"));
    assert_eq!(lines.next(), Some("# command: spectrum"));
    assert!(text.lines().filter(|l| !l.starts_with('#')).next() == Some("delta_p_mhz,p0,pl"));
    assert_eq!(text.lines().filter(|l| l.starts_with("# dip:")).count(), 2);

    let oc = TAU / 1.8;
    let scan = spectrum_scan(&DriveParams::new(oc, oc / 2.0, 0.0, 0.0), &default_grid(oc), 1.8, None).unwrap();
    let rows = body(&text);
    assert_eq!(rows.len(), 301);
    for (k, row) in rows.iter().enumerate() {
        let want = [scan.axis_mhz[k], scan.p0[k], scan.pl[k]];
        for (got, want) in row.iter().zip(want) {
            assert!((got - want).abs() <= 1e-11 * want.abs().max(1e-3), "row {k}: {got} vs {want}");
        }
    }
}

#[test]
fn embedded_config_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("noisy.json");
    fs::write(
        &config,
        r#"{"drive": {"omega_c": 4.73, "ratio": 14}, "duration": 4.2283, "scan": {"points": 61, "noise": {"sigma": 0.01}}}"#,
    )
    .unwrap();
    for format in ["csv", "json"] {
        let first = dir.path().join(format!("first.{format}"));
        let second = dir.path().join(format!("second.{format}"));
        let run = |cfg: &Path, out: &Path| {
            let o = atsim(&["spectrum", "--seed", "11", "--format", format, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        };
        run(&config, &first);
        run(&first, &second);
        assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap(), "{format}");
    }
}

#[test]
fn seed_controls_noise() {
    let cfg = fixture("fig2b.json");
    let noisy = |seed: &str| {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("n.json");
        let text = fs::read_to_string(&cfg).unwrap().replace("\"points\": 301", "\"points\": 31, \"noise\": {\"sigma\": 0.01}");
        fs::write(&path, text).unwrap();
        stdout(&atsim(&["spectrum", "--seed", seed, "--config", path.to_str().unwrap()]))
    };
    assert_eq!(noisy("1"), noisy("1"));
    assert_ne!(body(&noisy("1")), body(&noisy("2")));
}

#[test]
fn thread_count_does_not_change_results() {
    let cfg = fixture("fig2b.json");
    let one = atsim(&["spectrum", "--threads", "1", "--config", cfg.to_str().unwrap()]);
    let four = atsim(&["spectrum", "--threads", "4", "--config", cfg.to_str().unwrap()]);
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn json_output_schema() {
    let o = atsim(&["spectrum", "--format", "json", "--config", fixture("fig2b.json").to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["format"], "atsim/1");
    assert_eq!(v["config"]["angular"], true);
    assert_eq!(v["axis"].as_array().unwrap().len(), 301);
    assert_eq!(v["p0"].as_array().unwrap().len(), 301);
    assert_eq!(v["pl"].as_array().unwrap().len(), 301);
    assert_eq!(v["dips"].as_array().unwrap().len(), 2);
}

#[test]
fn fit_recovers_trace_parameters_from_csv() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("trace.csv");
    let mut text = String::from("t,y\n");
    let truth = [0.211, 17.5, 1.5, 7.85, 0.790, TAU * 0.123];
    for i in 0..80 {
        let t = 35.0 * i as f64 / 79.0;
        text.push_str(&format!("{t},{}\n", atsim_core::FitModel::DampedCos4.eval(&truth, t)));
    }
    fs::write(&data, text).unwrap();
    let config = dir.path().join("fit.json");
    fs::write(
        &config,
        format!(
            r#"{{"fit": {{"model": "damped_cos4", "data": {:?}, "init": [0.25, 15.0, 1.8, 7.7, 0.75, {}]}}}}"#,
            data.to_str().unwrap(),
            TAU * 0.1225
        ),
    )
    .unwrap();
    let o = atsim(&["fit", "--format", "json", "--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let params = &v["fit"]["params"];
    for (name, want) in ["a", "T", "k", "t_c", "b", "w"].iter().zip(truth) {
        let got = params[name].as_f64().unwrap();
        assert!((got / want - 1.0).abs() < 5e-3, "{name}: {got} vs {want}");
    }
}

#[test]
fn every_preset_runs() {
    for fig in ["fig2b", "fig2c", "fig2d", "fig3e", "fig4", "figS5"] {
        let o = atsim(&["reproduce", fig]);
        assert_eq!(o.status.code(), Some(0), "{fig}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).starts_with("# format: atsim/1"));
    }
}
