//! `fluidnet`: evaluate outage sweeps and write them as CSV.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use fluidnet::config::{watts_to_dbm, LoadError, RunConfig};
use fluidnet::sweep::{figure_preset, parse_engines, run_sweep, Engine, SweepParameter, SweepSpec};

#[derive(Debug, Parser)]
#[command(name = "fluidnet", version, about = "Outage sweeps for fluid-antenna cellular downlinks")]
struct Cli {
    /// Flat `key = value` configuration file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Figure sweep: fig3, fig4, fig5, fig6 or fig7.
    #[arg(long, value_name = "NAME", conflicts_with = "sweep")]
    preset: Option<String>,

    /// Custom sweep, e.g. `tx-power=0:60:13` or `bs-density=1e-6:5e-3:12`.
    #[arg(long, value_name = "KEY=START:STOP:STEPS")]
    sweep: Option<String>,

    /// Comma-separated engines: analytic, bounds, monte-carlo.
    #[arg(long, value_name = "LIST")]
    engines: Option<String>,

    /// Monte Carlo trials per grid point.
    #[arg(long, value_name = "N")]
    trials: Option<u64>,

    #[arg(long, value_name = "S")]
    seed: Option<u64>,

    /// CSV output path (stdout when absent). The resolved configuration is
    /// written next to it with a `.resolved.conf` suffix.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Use the printed threshold and conditional-outage forms.
    #[arg(long)]
    compat_printed_forms: bool,

    /// Gamma averaging for single-point analytic output.
    #[arg(long, value_name = "MODE", value_parser = ["common-gamma", "per-port-gamma"])]
    mode: Option<String>,

    /// Worker threads (default: FLUIDNET_WORKERS or all cores).
    #[arg(long, value_name = "N")]
    workers: Option<usize>,
}

fn resolve(cli: &Cli, settings: &[(&str, String)]) -> Result<RunConfig, LoadError> {
    let mut cfg = RunConfig::default();
    for (k, v) in settings {
        cfg.set(k, v)?;
    }
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        cfg.apply_text(&text)?;
    }
    if let Some(n) = cli.trials {
        cfg.set("trials", &n.to_string())?;
    }
    if let Some(s) = cli.seed {
        cfg.set("seed", &s.to_string())?;
    }
    if cli.compat_printed_forms {
        cfg.set("compat_printed_forms", "true")?;
    }
    if let Some(m) = &cli.mode {
        cfg.set("theorem_mode", m)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<bool, String> {
    let preset = cli.preset.as_deref().map(figure_preset).transpose().map_err(|e| e.to_string())?;
    let settings = preset.as_ref().map(|p| p.settings.clone()).unwrap_or_default();
    let cfg = resolve(&cli, &settings).map_err(|e| e.to_string())?;

    let engines = match &cli.engines {
        Some(list) => Some(parse_engines(list).map_err(|e| e.to_string())?),
        None => None,
    };
    let mut spec = match (&preset, &cli.sweep) {
        (Some(p), _) => p.resolve(&cfg),
        (None, Some(arg)) => {
            let default = vec![Engine::Analytic, Engine::MonteCarlo];
            SweepSpec::parse(arg, default).map_err(|e| e.to_string())?
        }
        (None, None) => SweepSpec {
            parameter: SweepParameter::TxPower,
            values: vec![watts_to_dbm(cfg.scenario.network.tx_power)],
            engines: vec![Engine::Analytic, Engine::MonteCarlo],
            output: None,
        },
    };
    if let Some(e) = engines {
        spec.engines = e;
    }
    spec.output = cli.out.clone();

    let resolved = cfg.to_text();
    eprintln!("# resolved configuration\n{resolved}# sweep {} over {} points", spec.parameter, spec.values.len());
    if let Some(out) = &cli.out {
        let mut side = out.clone().into_os_string();
        side.push(".resolved.conf");
        std::fs::write(&side, &resolved).map_err(|e| format!("cannot write {}: {e}", PathBuf::from(side).display()))?;
    }

    let curve = run_sweep(&spec, &cfg, cli.workers).map_err(|e| e.to_string())?;
    if cli.out.is_none() {
        print!("{}", curve.to_csv(true));
    }
    for row in curve.rows.iter().filter(|r| !r.errors.is_empty()) {
        eprintln!("point {} failed: {}", row.value, row.errors.join("; "));
    }
    Ok(!curve.failed())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
