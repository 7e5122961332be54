mod commands;
mod config;
mod output;
mod presets;

use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use atsim_core::fitting::FitModel;
use clap::{Parser, Subcommand};

use config::{ConfigError, FitConfig, RunConfig};
use output::Format;
use presets::Figure;

/// Autler-Townes spectra, interference dynamics and fits for a driven
/// three-level V system.
///
/// Configs are JSON with frequencies in MHz (set "angular": true for rad/us),
/// durations in us and decay rates in 1/us. Every output embeds its resolved
/// config and can be passed back with --config to rerun it.
#[derive(Debug, Parser)]
#[command(name = "atsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON config, or an earlier atsim output file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output file (default: stdout).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Seed for PL noise and fit restarts.
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Worker threads for scans and sweeps.
    #[arg(long, global = true, env = "ATSIM_THREADS", value_name = "N")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probe-detuning scan (needs drive, duration, scan).
    Spectrum,
    /// |0> population at t = 2nπ/Ωc (needs drive, dynamics).
    Dynamics,
    /// Splitting against coupling amplitude (needs sweep).
    SweepAmplitude,
    /// Splitting against coupling detuning (needs drive, sweep).
    SweepDetuning,
    /// Steady-state density matrix (needs drive, decoherence).
    SteadyState,
    /// Durations that null the |0> population (needs drive).
    Optimal,
    /// Fit a model to two-column data.
    Fit {
        /// damped_cos4, gaussian_ramsey, damped_rabi or exp_decay.
        #[arg(long, value_parser = parse_model)]
        model: Option<FitModel>,
        /// CSV data file; overrides fit.data.
        #[arg(long, value_name = "PATH")]
        data: Option<PathBuf>,
    },
    /// Run a figure preset.
    Reproduce {
        #[arg(value_enum)]
        figure: Figure,
    },
}

fn parse_model(s: &str) -> Result<FitModel, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| {
        "expected one of damped_cos4, gaussian_ramsey, damped_rabi, exp_decay".to_string()
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the thread pool")?;
    }

    let (command, mut cfg) = match &cli.command {
        Command::Reproduce { figure } => {
            if cli.config.is_some() {
                log::warn!("--config is ignored by reproduce");
            }
            presets::preset(*figure)
        }
        other => {
            let cfg = match &cli.config {
                Some(path) => config::load(path)?,
                None => RunConfig::default(),
            };
            let name = match other {
                Command::Spectrum => "spectrum",
                Command::Dynamics => "dynamics",
                Command::SweepAmplitude => "sweep-amplitude",
                Command::SweepDetuning => "sweep-detuning",
                Command::SteadyState => "steady-state",
                Command::Optimal => "optimal",
                Command::Fit { .. } => "fit",
                Command::Reproduce { .. } => unreachable!(),
            };
            (name, cfg)
        }
    };

    if let Command::Fit { model, data } = &cli.command {
        match (&mut cfg.fit, model) {
            (Some(f), _) => {
                if let Some(m) = model {
                    f.model = *m;
                }
                if data.is_some() {
                    f.data = data.clone();
                    f.points = None;
                }
            }
            (None, Some(m)) => {
                cfg.fit = Some(FitConfig {
                    model: *m,
                    data: data.clone(),
                    columns: None,
                    points: None,
                    init: None,
                    max_iter: None,
                    multi_start: None,
                })
            }
            (None, None) => return Err(ConfigError("fit needs --model or a 'fit' config section".into()).into()),
        }
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    // Sections that only carry defaults may be omitted.
    match command {
        "spectrum" => {
            cfg.scan.get_or_insert_with(Default::default);
        }
        "dynamics" => {
            cfg.dynamics.get_or_insert_with(Default::default);
        }
        "optimal" => {
            cfg.optimal.get_or_insert_with(Default::default);
        }
        _ => {}
    }

    let cfg = cfg.resolve()?;
    let report = match command {
        "spectrum" => commands::spectrum(cfg),
        "dynamics" => commands::dynamics(cfg),
        "sweep-amplitude" => commands::sweep_amplitude(cfg),
        "sweep-detuning" => commands::sweep_detuning(cfg),
        "steady-state" => commands::steady(cfg),
        "optimal" => commands::optimal(cfg),
        "fit" => commands::fit_data(cfg),
        _ => unreachable!("unknown command {command}"),
    }?;
    report.emit(cli.format, cli.out.as_deref())
}

/// 2 for configuration and I/O problems, 3 for numerical failures.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() || cause.is::<serde_json::Error>() || cause.is::<io::Error>() || cause.is::<csv::Error>() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<atsim_core::Error>() {
            return match e {
                atsim_core::Error::InvalidParameter { .. } | atsim_core::Error::InsufficientData { .. } => 2,
                _ => 3,
            };
        }
    }
    3
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) if err.chain().any(|c| c.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe)) => {
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
