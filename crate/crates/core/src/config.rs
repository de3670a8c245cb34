//! Flat `key = value` configuration files.
//!
//! Blank lines and text after `#` are ignored. Every key is optional and
//! defaults to the reference scenario (see [`RunConfig::default`]).

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::analytics::TheoremMode;
use crate::field::NetworkConfig;
use crate::geometry::{FaArrayConfig, FluidParams, FrameInputs};
use crate::model::{FormVariant, Scenario, System};
use crate::montecarlo::TrialPlan;
use crate::numerics::QuadratureSpec;

/// Recognised configuration keys, in the order they are written back.
pub const KEYS: &[&str] = &[
    "bs_density",
    "path_loss_exponent",
    "tx_power_dbm",
    "noise_power",
    "channel_variance",
    "interference_limited",
    "num_fas",
    "ports_per_fa",
    "skipped_ports",
    "kappa",
    "wavelength",
    "charge",
    "viscosity",
    "thickness_ratio",
    "voltage",
    "coherence_bandwidth",
    "coherence_time",
    "estimation_fraction",
    "target_rate",
    "compat_printed_forms",
    "theorem_mode",
    "trials",
    "seed",
    "faithful_pilots",
    "outer_radius",
    "same_interferer_fades",
    "realized_error",
    "quad_abs_tol",
    "quad_rel_tol",
    "quad_max_subdivisions",
    "quad_truncation_radius",
];

/// Problems found while loading or validating a configuration.
#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{key}`")]
    UnknownKey { key: String },
    #[error("invalid value `{value}` for key `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("validation failed: {0}")]
    Validation(#[from] crate::Error),
}

/// A complete run description: model scenario, Monte Carlo plan,
/// theorem mode and quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub plan: TrialPlan,
    pub mode: TheoremMode,
    pub quadrature: QuadratureSpec,
}

/// Converts dBm to watts.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts watts to dBm.
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * w.log10() + 30.0
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: Scenario {
                network: NetworkConfig {
                    bs_density: 5e-5,
                    path_loss_exponent: 4.0,
                    tx_power: 1.0,
                    noise_power: 1e-5,
                    channel_variance: 1.0,
                    interference_limited: false,
                },
                array: FaArrayConfig {
                    num_fas: 4,
                    ports_per_fa: 15,
                    skipped_ports: 1,
                    kappa: 0.2,
                    wavelength: 0.06,
                },
                fluid: FluidParams {
                    charge: 0.07,
                    viscosity: 0.002,
                    thickness_ratio: 0.2,
                    voltage: 10.0,
                },
                frame: FrameInputs {
                    coherence_bandwidth: 1e8,
                    coherence_time: 0.05,
                    estimation_fraction: 0.16,
                },
                rate: 1.0,
                variant: FormVariant::Consistent,
            },
            plan: TrialPlan::default(),
            mode: TheoremMode::CommonGamma,
            quadrature: QuadratureSpec::default(),
        }
    }
}

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> LoadError {
    LoadError::InvalidValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.into(),
    }
}

fn real(key: &str, value: &str) -> Result<f64, LoadError> {
    let v: f64 = value.parse().map_err(|_| invalid(key, value, "expected a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(key, value, "expected a finite number"))
    }
}

fn count(key: &str, value: &str) -> Result<usize, LoadError> {
    value
        .parse()
        .map_err(|_| invalid(key, value, "expected a nonnegative integer"))
}

fn flag(key: &str, value: &str) -> Result<bool, LoadError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(invalid(key, value, "expected true or false")),
    }
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), LoadError> {
        let s = &mut self.scenario;
        let value = value.trim();
        if value.is_empty() {
            return Err(invalid(key, value, "missing value"));
        }
        match key {
            "bs_density" => s.network.bs_density = real(key, value)?,
            "path_loss_exponent" => s.network.path_loss_exponent = real(key, value)?,
            "tx_power_dbm" => s.network.tx_power = dbm_to_watts(real(key, value)?),
            "noise_power" => s.network.noise_power = real(key, value)?,
            "channel_variance" => s.network.channel_variance = real(key, value)?,
            "interference_limited" => s.network.interference_limited = flag(key, value)?,
            "num_fas" => s.array.num_fas = count(key, value)?,
            "ports_per_fa" => s.array.ports_per_fa = count(key, value)?,
            "skipped_ports" => s.array.skipped_ports = count(key, value)?,
            "kappa" => s.array.kappa = real(key, value)?,
            "wavelength" => s.array.wavelength = real(key, value)?,
            "charge" => s.fluid.charge = real(key, value)?,
            "viscosity" => s.fluid.viscosity = real(key, value)?,
            "thickness_ratio" => s.fluid.thickness_ratio = real(key, value)?,
            "voltage" => s.fluid.voltage = real(key, value)?,
            "coherence_bandwidth" => s.frame.coherence_bandwidth = real(key, value)?,
            "coherence_time" => s.frame.coherence_time = real(key, value)?,
            "estimation_fraction" => s.frame.estimation_fraction = real(key, value)?,
            "target_rate" => s.rate = real(key, value)?,
            "compat_printed_forms" => {
                s.variant = if flag(key, value)? {
                    FormVariant::Printed
                } else {
                    FormVariant::Consistent
                }
            }
            "theorem_mode" => self.mode = value.parse().map_err(|e: String| invalid(key, value, e))?,
            "trials" => self.plan.num_trials = value.parse().map_err(|_| invalid(key, value, "expected a positive integer"))?,
            "seed" => self.plan.seed = value.parse().map_err(|_| invalid(key, value, "expected an unsigned 64-bit integer"))?,
            "faithful_pilots" => self.plan.faithful_pilots = flag(key, value)?,
            "outer_radius" => {
                self.plan.outer_radius = if value == "auto" { None } else { Some(real(key, value)?) }
            }
            "same_interferer_fades" => self.plan.same_interferer_fades = flag(key, value)?,
            "realized_error" => self.plan.realized_error = flag(key, value)?,
            "quad_abs_tol" => self.quadrature.abs_tol = real(key, value)?,
            "quad_rel_tol" => self.quadrature.rel_tol = real(key, value)?,
            "quad_max_subdivisions" => self.quadrature.max_subdivisions = count(key, value)?,
            "quad_truncation_radius" => self.quadrature.truncation_radius = real(key, value)?,
            _ => {
                return Err(LoadError::UnknownKey {
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Applies every assignment of a configuration text on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<(), LoadError> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(LoadError::Syntax {
                    line: n + 1,
                    text: raw.to_string(),
                });
            };
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    /// Checks every invariant, including frame feasibility.
    pub fn validate(&self) -> Result<(), LoadError> {
        System::new(self.scenario)?;
        self.plan.validate()?;
        self.quadrature.validate()?;
        Ok(())
    }

    /// Canonical `key = value` listing of every setting.
    pub fn to_text(&self) -> String {
        let s = &self.scenario;
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(out, "{k} = {v}");
        };
        put("bs_density", s.network.bs_density.to_string());
        put("path_loss_exponent", s.network.path_loss_exponent.to_string());
        put("tx_power_dbm", watts_to_dbm(s.network.tx_power).to_string());
        put("noise_power", s.network.noise_power.to_string());
        put("channel_variance", s.network.channel_variance.to_string());
        put("interference_limited", s.network.interference_limited.to_string());
        put("num_fas", s.array.num_fas.to_string());
        put("ports_per_fa", s.array.ports_per_fa.to_string());
        put("skipped_ports", s.array.skipped_ports.to_string());
        put("kappa", s.array.kappa.to_string());
        put("wavelength", s.array.wavelength.to_string());
        put("charge", s.fluid.charge.to_string());
        put("viscosity", s.fluid.viscosity.to_string());
        put("thickness_ratio", s.fluid.thickness_ratio.to_string());
        put("voltage", s.fluid.voltage.to_string());
        put("coherence_bandwidth", s.frame.coherence_bandwidth.to_string());
        put("coherence_time", s.frame.coherence_time.to_string());
        put("estimation_fraction", s.frame.estimation_fraction.to_string());
        put("target_rate", s.rate.to_string());
        put("compat_printed_forms", (s.variant == FormVariant::Printed).to_string());
        put("theorem_mode", self.mode.to_string());
        put("trials", self.plan.num_trials.to_string());
        put("seed", self.plan.seed.to_string());
        put("faithful_pilots", self.plan.faithful_pilots.to_string());
        put(
            "outer_radius",
            self.plan.outer_radius.map_or("auto".to_string(), |r| r.to_string()),
        );
        put("same_interferer_fades", self.plan.same_interferer_fades.to_string());
        put("realized_error", self.plan.realized_error.to_string());
        put("quad_abs_tol", self.quadrature.abs_tol.to_string());
        put("quad_rel_tol", self.quadrature.rel_tol.to_string());
        put("quad_max_subdivisions", self.quadrature.max_subdivisions.to_string());
        put("quad_truncation_radius", self.quadrature.truncation_radius.to_string());
        out
    }
}

/// Parses a configuration text on top of the defaults and validates it.
pub fn parse_config(text: &str) -> Result<RunConfig, LoadError> {
    let mut cfg = RunConfig::default();
    cfg.apply_text(text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Loads and validates a configuration file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig, LoadError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| LoadError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    parse_config(&text)
}
