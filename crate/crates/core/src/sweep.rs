//! Parameter sweeps over the analytic, bound and Monte Carlo engines, and
//! their CSV output.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::analytics::{mean_correlation, outage_bounds, outage_probability, TheoremMode};
use crate::channel::min_skipped_ports;
use crate::config::{LoadError, RunConfig};
use crate::model::System;
use crate::montecarlo::estimate_outage;

/// Environment variable read when no worker count is given explicitly.
pub const WORKERS_ENV: &str = "FLUIDNET_WORKERS";

/// Header of outage sweeps.
pub const OUTAGE_HEADER: [&str; 8] = [
    "sweep_value",
    "outage_analytic_common",
    "outage_analytic_perport",
    "outage_lower",
    "outage_upper",
    "outage_mc",
    "mc_stderr",
    "wall_ms",
];

/// Header of target-variance sweeps.
pub const SKIP_HEADER: [&str; 3] = ["sweep_value", "min_skipped_ports", "wall_ms"];

/// Names accepted by [`figure_preset`].
pub const PRESETS: [&str; 5] = ["fig3", "fig4", "fig5", "fig6", "fig7"];

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("unknown preset `{0}`; valid presets: fig3, fig4, fig5, fig6, fig7")]
    UnknownPreset(String),
    #[error("unknown sweep parameter `{0}`; valid: tx-power, num-fas, ports-per-fa, bs-density, target-variance")]
    UnknownParameter(String),
    #[error("unknown engine `{0}`; valid: analytic, bounds, monte-carlo")]
    UnknownEngine(String),
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("{0}")]
    Inapplicable(String),
    #[error(transparent)]
    Config(#[from] LoadError),
    #[error("cannot write {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("cannot start worker pool: {0}")]
    Pool(String),
}

/// Quantity varied along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    /// Transmit power in dBm.
    TxPower,
    NumFas,
    PortsPerFa,
    /// Base-station density, swept on a geometric grid.
    BsDensity,
    /// Target estimation error variance for the minimum skip count.
    TargetVariance,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            Self::TxPower => "tx-power",
            Self::NumFas => "num-fas",
            Self::PortsPerFa => "ports-per-fa",
            Self::BsDensity => "bs-density",
            Self::TargetVariance => "target-variance",
        }
    }

    fn config_key(self) -> Option<&'static str> {
        match self {
            Self::TxPower => Some("tx_power_dbm"),
            Self::NumFas => Some("num_fas"),
            Self::PortsPerFa => Some("ports_per_fa"),
            Self::BsDensity => Some("bs_density"),
            Self::TargetVariance => None,
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, Self::NumFas | Self::PortsPerFa)
    }
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParameter {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, SweepError> {
        match s {
            "tx-power" => Ok(Self::TxPower),
            "num-fas" => Ok(Self::NumFas),
            "ports-per-fa" => Ok(Self::PortsPerFa),
            "bs-density" => Ok(Self::BsDensity),
            "target-variance" => Ok(Self::TargetVariance),
            _ => Err(SweepError::UnknownParameter(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Engine {
    /// Numerical outage in both theorem modes.
    Analytic,
    /// Closed-form lower and upper bounds (interference-limited only).
    Bounds,
    MonteCarlo,
}

impl FromStr for Engine {
    type Err = SweepError;

    fn from_str(s: &str) -> Result<Self, SweepError> {
        match s {
            "analytic" => Ok(Self::Analytic),
            "bounds" => Ok(Self::Bounds),
            "monte-carlo" | "mc" => Ok(Self::MonteCarlo),
            _ => Err(SweepError::UnknownEngine(s.to_string())),
        }
    }
}

/// Parses a comma-separated engine list, dropping duplicates.
pub fn parse_engines(list: &str) -> Result<Vec<Engine>, SweepError> {
    let mut out = Vec::new();
    for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let e: Engine = name.parse()?;
        if !out.contains(&e) {
            out.push(e);
        }
    }
    if out.is_empty() {
        return Err(SweepError::UnknownEngine(list.to_string()));
    }
    Ok(out)
}

/// Builds a grid of `steps` points from `start` to `stop` inclusive.
/// Density grids are geometric, integer parameters are rounded.
pub fn make_grid(param: SweepParameter, start: f64, stop: f64, steps: usize) -> Result<Vec<f64>, SweepError> {
    if steps == 0 {
        return Err(SweepError::Grid("steps must be at least 1".into()));
    }
    if !(start.is_finite() && stop.is_finite()) {
        return Err(SweepError::Grid("grid ends must be finite".into()));
    }
    let geometric = param == SweepParameter::BsDensity;
    if geometric && !(start > 0.0 && stop > 0.0) {
        return Err(SweepError::Grid("density grid ends must be positive".into()));
    }
    let at = |k: usize| {
        if steps == 1 {
            return start;
        }
        let t = k as f64 / (steps - 1) as f64;
        if k == steps - 1 {
            stop
        } else if geometric {
            (start.ln() + t * (stop.ln() - start.ln())).exp()
        } else {
            start + t * (stop - start)
        }
    };
    let mut values: Vec<f64> = (0..steps).map(at).collect();
    if param.is_integer() {
        values.iter_mut().for_each(|v| *v = v.round());
    }
    Ok(values)
}

/// A sweep: one parameter over a grid, evaluated by a set of engines.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
    pub engines: Vec<Engine>,
    pub output: Option<PathBuf>,
}

impl SweepSpec {
    /// Parses `KEY=start:stop:steps`.
    pub fn parse(arg: &str, engines: Vec<Engine>) -> Result<Self, SweepError> {
        let (key, range) = arg
            .split_once('=')
            .ok_or_else(|| SweepError::Grid(format!("expected KEY=start:stop:steps, got `{arg}`")))?;
        let parameter: SweepParameter = key.trim().parse()?;
        let parts: Vec<&str> = range.split(':').map(str::trim).collect();
        let [a, b, n] = parts[..] else {
            return Err(SweepError::Grid(format!("expected start:stop:steps, got `{range}`")));
        };
        let bad = |s: &str| SweepError::Grid(format!("cannot parse `{s}`"));
        let start: f64 = a.parse().map_err(|_| bad(a))?;
        let stop: f64 = b.parse().map_err(|_| bad(b))?;
        let steps: usize = n.parse().map_err(|_| bad(n))?;
        Ok(Self {
            parameter,
            values: make_grid(parameter, start, stop, steps)?,
            engines,
            output: None,
        })
    }

    /// Checks the grid and that every engine applies to this sweep.
    pub fn validate(&self, base: &RunConfig) -> Result<(), SweepError> {
        if self.values.is_empty() {
            return Err(SweepError::Grid("grid is empty".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(SweepError::Grid("grid values must be finite".into()));
        }
        let up = self.values.windows(2).all(|w| w[1] > w[0]);
        let down = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(SweepError::Grid("grid must be strictly monotone".into()));
        }
        if self.engines.is_empty() {
            return Err(SweepError::Inapplicable("no engine requested".into()));
        }
        if self.parameter == SweepParameter::TargetVariance {
            if self.engines != [Engine::Analytic] {
                return Err(SweepError::Inapplicable(
                    "target-variance sweeps only support the analytic engine".into(),
                ));
            }
            if self.values.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
                return Err(SweepError::Grid("target variances must lie in (0, 1)".into()));
            }
        }
        if self.engines.contains(&Engine::Bounds) && !base.scenario.network.interference_limited {
            return Err(SweepError::Inapplicable(
                "the bounds engine requires interference_limited = true".into(),
            ));
        }
        Ok(())
    }
}

/// A named figure sweep plus the settings it applies before user overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct FigurePreset {
    pub name: &'static str,
    pub spec: SweepSpec,
    /// `key = value` pairs applied to the defaults before any config file or
    /// command-line override.
    pub settings: Vec<(&'static str, String)>,
}

impl FigurePreset {
    /// Final sweep for a resolved configuration. The port sweep starts at the
    /// first port count compatible with the configured skip.
    pub fn resolve(&self, cfg: &RunConfig) -> SweepSpec {
        let mut spec = self.spec.clone();
        if self.name == "fig5" {
            let min = cfg.scenario.array.skipped_ports.saturating_add(1).max(2) as f64;
            spec.values.retain(|v| *v >= min);
        }
        spec
    }
}

/// Sweep reproducing one of the figure datasets.
///
/// `fig3` sweeps transmit power over 0 to 60 dBm, `fig4` the number of FAs
/// from 1 to 7, `fig5` ports per FA up to 30, `fig6` the BS density from
/// 1e-6 to 5e-3 per square metre and `fig7` the target error variance with
/// 20 ports per FA.
pub fn figure_preset(name: &str) -> Result<FigurePreset, SweepError> {
    let both = vec![Engine::Analytic, Engine::MonteCarlo];
    let (name, parameter, values, engines, settings) = match name {
        "fig3" => ("fig3", SweepParameter::TxPower, make_grid(SweepParameter::TxPower, 0.0, 60.0, 13)?, both, vec![]),
        "fig4" => ("fig4", SweepParameter::NumFas, make_grid(SweepParameter::NumFas, 1.0, 7.0, 7)?, both, vec![]),
        "fig5" => (
            "fig5",
            SweepParameter::PortsPerFa,
            make_grid(SweepParameter::PortsPerFa, 2.0, 30.0, 29)?,
            both,
            vec![],
        ),
        "fig6" => (
            "fig6",
            SweepParameter::BsDensity,
            make_grid(SweepParameter::BsDensity, 1e-6, 5e-3, 12)?,
            both,
            vec![],
        ),
        "fig7" => (
            "fig7",
            SweepParameter::TargetVariance,
            make_grid(SweepParameter::TargetVariance, 0.1, 0.9, 17)?,
            vec![Engine::Analytic],
            vec![("ports_per_fa", "20".to_string())],
        ),
        other => return Err(SweepError::UnknownPreset(other.to_string())),
    };
    Ok(FigurePreset {
        name,
        spec: SweepSpec {
            parameter,
            values,
            engines,
            output: None,
        },
        settings,
    })
}

/// One evaluated grid point. Engines that were not requested leave their
/// fields `None`; failed engines store `NaN` and an entry in `errors`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepRow {
    pub value: f64,
    pub analytic_common: Option<f64>,
    pub analytic_perport: Option<f64>,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub mc: Option<f64>,
    pub mc_stderr: Option<f64>,
    pub min_skipped_ports: Option<f64>,
    pub wall_ms: f64,
    pub errors: Vec<String>,
}

/// Result of a sweep, rows in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct OutageCurve {
    pub parameter: SweepParameter,
    pub rows: Vec<SweepRow>,
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

impl OutageCurve {
    /// True if any engine failed at any grid point.
    pub fn failed(&self) -> bool {
        self.rows.iter().any(|r| !r.errors.is_empty())
    }

    pub fn header(&self) -> &'static [&'static str] {
        if self.parameter == SweepParameter::TargetVariance {
            &SKIP_HEADER
        } else {
            &OUTAGE_HEADER
        }
    }

    /// CSV text; `with_wall = false` drops the wall-time column.
    pub fn to_csv(&self, with_wall: bool) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = self.header();
        let keep = if with_wall { header.len() } else { header.len() - 1 };
        let write = |w: &mut csv::Writer<Vec<u8>>, rec: Vec<String>| {
            w.write_record(&rec[..keep]).expect("writing to memory cannot fail");
        };
        write(&mut w, header.iter().map(|s| s.to_string()).collect());
        for r in &self.rows {
            let rec = if self.parameter == SweepParameter::TargetVariance {
                vec![r.value.to_string(), cell(r.min_skipped_ports), r.wall_ms.to_string()]
            } else {
                vec![
                    r.value.to_string(),
                    cell(r.analytic_common),
                    cell(r.analytic_perport),
                    cell(r.lower),
                    cell(r.upper),
                    cell(r.mc),
                    cell(r.mc_stderr),
                    r.wall_ms.to_string(),
                ]
            };
            write(&mut w, rec);
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("CSV is ASCII")
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), SweepError> {
        std::fs::write(path, self.to_csv(true)).map_err(|e| SweepError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }
}

/// Worker count: the explicit request, else the environment variable, else
/// every available core.
pub fn worker_count(requested: Option<usize>) -> usize {
    requested
        .filter(|n| *n > 0)
        .or_else(|| {
            std::env::var(WORKERS_ENV)
                .ok()
                .and_then(|v| v.trim().parse().ok())
                .filter(|n: &usize| *n > 0)
        })
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn record(slot: &mut Option<f64>, errors: &mut Vec<String>, engine: &str, r: crate::Result<f64>) {
    match r {
        Ok(v) => *slot = Some(v),
        Err(e) => {
            log::warn!("{engine} failed: {e}");
            errors.push(format!("{engine}: {e}"));
            *slot = Some(f64::NAN);
        }
    }
}

fn evaluate(spec: &SweepSpec, base: &RunConfig, value: f64) -> SweepRow {
    let start = Instant::now();
    let mut row = SweepRow {
        value,
        ..SweepRow::default()
    };
    let mut cfg = *base;
    if let Some(key) = spec.parameter.config_key() {
        if let Err(e) = cfg.set(key, &value.to_string()) {
            row.errors.push(e.to_string());
        }
    }
    let system = if row.errors.is_empty() {
        cfg.validate().map_err(|e| e.to_string()).and_then(|_| System::new(cfg.scenario).map_err(|e| e.to_string()))
    } else {
        Err(row.errors[0].clone())
    };
    let system = match system {
        Ok(s) => Some(s),
        Err(e) => {
            log::warn!("{} = {value}: {e}", spec.parameter);
            if row.errors.is_empty() {
                row.errors.push(e);
            }
            None
        }
    };
    let q = &cfg.quadrature;
    let s = &cfg.scenario;

    for engine in &spec.engines {
        match (engine, &system) {
            (Engine::Analytic, _) if spec.parameter == SweepParameter::TargetVariance => {
                let rho = s.network.length_scale();
                let r = min_skipped_ports(value, rho, 1, &s.array, &s.fluid, &s.frame, &s.network);
                record(&mut row.min_skipped_ports, &mut row.errors, "min-skip", r);
            }
            (Engine::Analytic, Some(sys)) => {
                let r = outage_probability(sys, q, TheoremMode::CommonGamma);
                record(&mut row.analytic_common, &mut row.errors, "analytic-common", r);
                let r = outage_probability(sys, q, TheoremMode::PerPortGamma);
                record(&mut row.analytic_perport, &mut row.errors, "analytic-perport", r);
            }
            (Engine::Bounds, Some(sys)) => match outage_bounds(sys, q, mean_correlation(sys)) {
                Ok(b) => {
                    row.lower = Some(b.lower);
                    row.upper = Some(b.upper);
                }
                Err(e) => {
                    record(&mut row.lower, &mut row.errors, "bounds", Err(e));
                    row.upper = Some(f64::NAN);
                }
            },
            (Engine::MonteCarlo, Some(sys)) => match estimate_outage(sys, &cfg.plan) {
                Ok(est) => {
                    row.mc = Some(est.probability);
                    row.mc_stderr = Some(est.std_error);
                }
                Err(e) => {
                    record(&mut row.mc, &mut row.errors, "monte-carlo", Err(e));
                    row.mc_stderr = Some(f64::NAN);
                }
            },
            (Engine::Analytic, None) => {
                row.analytic_common = Some(f64::NAN);
                row.analytic_perport = Some(f64::NAN);
            }
            (Engine::Bounds, None) => {
                row.lower = Some(f64::NAN);
                row.upper = Some(f64::NAN);
            }
            (Engine::MonteCarlo, None) => {
                row.mc = Some(f64::NAN);
                row.mc_stderr = Some(f64::NAN);
            }
        }
    }
    row.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    row
}

/// Evaluates every grid point on a pool of `worker_count(workers)` threads.
///
/// A failing point does not stop the sweep; its cells become `NaN` and the
/// error is kept in the row. Rows come back in grid order. When
/// `spec.output` is set the CSV is written there.
pub fn run_sweep(spec: &SweepSpec, base: &RunConfig, workers: Option<usize>) -> Result<OutageCurve, SweepError> {
    spec.validate(base)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(workers))
        .build()
        .map_err(|e| SweepError::Pool(e.to_string()))?;
    let rows = pool.install(|| spec.values.par_iter().map(|&v| evaluate(spec, base, v)).collect());
    let curve = OutageCurve {
        parameter: spec.parameter,
        rows,
    };
    if let Some(path) = &spec.output {
        curve.write_csv(path)?;
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shapes() {
        assert_eq!(make_grid(SweepParameter::TxPower, 0.0, 60.0, 4).unwrap(), vec![0.0, 20.0, 40.0, 60.0]);
        let g = make_grid(SweepParameter::BsDensity, 1e-6, 1e-3, 4).unwrap();
        assert!((g[1] - 1e-5).abs() < 1e-18 && (g[2] - 1e-4).abs() < 1e-17);
        assert_eq!(g[3], 1e-3);
        assert_eq!(make_grid(SweepParameter::NumFas, 1.0, 2.0, 3).unwrap(), vec![1.0, 2.0, 2.0]);
        assert!(make_grid(SweepParameter::BsDensity, 0.0, 1.0, 3).is_err());
        assert!(make_grid(SweepParameter::TxPower, 0.0, 1.0, 0).is_err());
    }

    #[test]
    fn parse_and_validate() {
        let base = RunConfig::default();
        let s = SweepSpec::parse("tx-power=0:30:4", vec![Engine::Analytic]).unwrap();
        assert_eq!(s.values, vec![0.0, 10.0, 20.0, 30.0]);
        s.validate(&base).unwrap();
        let dup = SweepSpec::parse("num-fas=1:2:3", vec![Engine::Analytic]).unwrap();
        assert!(matches!(dup.validate(&base), Err(SweepError::Grid(_))));
        assert!(matches!(SweepSpec::parse("power=0:1:2", vec![]), Err(SweepError::UnknownParameter(_))));
        assert!(SweepSpec::parse("tx-power=0:1", vec![]).is_err());
        let b = SweepSpec::parse("tx-power=0:30:2", vec![Engine::Bounds]).unwrap();
        assert!(matches!(b.validate(&base), Err(SweepError::Inapplicable(_))));
        let t = SweepSpec::parse("target-variance=0.2:0.8:3", vec![Engine::MonteCarlo]).unwrap();
        assert!(matches!(t.validate(&base), Err(SweepError::Inapplicable(_))));
    }

    #[test]
    fn engines_list() {
        assert_eq!(
            parse_engines("analytic, monte-carlo,analytic").unwrap(),
            vec![Engine::Analytic, Engine::MonteCarlo]
        );
        assert!(parse_engines("fast").is_err());
        assert!(parse_engines("").is_err());
    }

    #[test]
    fn presets() {
        for name in PRESETS {
            let p = figure_preset(name).unwrap();
            let mut cfg = RunConfig::default();
            for (k, v) in &p.settings {
                cfg.set(k, v).unwrap();
            }
            p.resolve(&cfg).validate(&cfg).unwrap();
        }
        let err = figure_preset("fig9").unwrap_err().to_string();
        assert!(PRESETS.iter().all(|n| err.contains(n)), "{err}");
        let mut cfg = RunConfig::default();
        cfg.scenario.array.skipped_ports = 3;
        let fig5 = figure_preset("fig5").unwrap().resolve(&cfg);
        assert_eq!(fig5.values[0], 4.0);
        assert_eq!(*fig5.values.last().unwrap(), 30.0);
    }

    #[test]
    fn failed_points_are_nan_and_later_points_still_run() {
        let mut base = RunConfig::default();
        base.plan.num_trials = 200;
        let spec = SweepSpec {
            parameter: SweepParameter::PortsPerFa,
            values: vec![1.0, 3.0],
            engines: vec![Engine::MonteCarlo],
            output: None,
        };
        let curve = run_sweep(&spec, &base, Some(1)).unwrap();
        assert!(curve.failed());
        assert!(curve.rows[0].mc.unwrap().is_nan());
        assert!(curve.rows[1].errors.is_empty());
        assert!(curve.rows[1].mc.unwrap().is_finite());
        let csv = curve.to_csv(false);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], OUTAGE_HEADER[..7].join(","));
        assert!(lines[1].starts_with("1,,,,,NaN,NaN"));
    }

    #[test]
    fn skip_sweep_decreases() {
        let p = figure_preset("fig7").unwrap();
        let mut cfg = RunConfig::default();
        for (k, v) in &p.settings {
            cfg.set(k, v).unwrap();
        }
        let curve = run_sweep(&p.resolve(&cfg), &cfg, Some(1)).unwrap();
        assert!(!curve.failed());
        let v: Vec<f64> = curve.rows.iter().map(|r| r.min_skipped_ports.unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] < w[0]));
        assert!(curve.to_csv(true).starts_with("sweep_value,min_skipped_ports,wall_ms\n"));
    }
}
