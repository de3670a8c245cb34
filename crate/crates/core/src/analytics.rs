//! Closed-form and quadrature outage expressions.

use std::f64::consts::PI;

use crate::channel::joint_cdf;
use crate::error::{domain, Result};
use crate::field::gamma_interference_model;
use crate::geometry::FrameBudget;
use crate::model::{FormVariant, System};
use crate::numerics::{gamma_log_density_in_log, gamma_sf, try_integrate, QuadratureSpec};

/// Interference below `GAMMA_FLOOR` times the other impairments leaves the
/// conditional outage unchanged to double precision.
const GAMMA_FLOOR: f64 = 1e-12;

/// Target rate and the SINR threshold it implies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateTarget {
    /// Bits per channel use.
    pub rate: f64,
    /// SINR threshold.
    pub threshold: f64,
    /// Share of the block carrying data, `L_t / L_c`.
    pub data_fraction: f64,
}

/// SINR threshold for target rate `rate`: the rate is delivered in the data
/// period only, so the threshold is `2^(rate / data_fraction) - 1`.
pub fn sinr_threshold(rate: f64, budget: &FrameBudget, variant: FormVariant) -> Result<RateTarget> {
    if !(rate >= 0.0 && rate.is_finite()) {
        return Err(domain(format!("target rate must be nonnegative, got {rate}")));
    }
    let data_fraction = budget.data_fraction();
    let exponent = match variant {
        FormVariant::Consistent => rate / data_fraction,
        FormVariant::Printed => rate / (1.0 - data_fraction),
    };
    Ok(RateTarget {
        rate,
        threshold: exponent.exp2() - 1.0,
        data_fraction,
    })
}

/// How the interference law enters the unconditional outage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TheoremMode {
    /// One joint conditional-outage evaluation per antenna with a single
    /// interference draw shared by its ports.
    #[default]
    CommonGamma,
    /// A separate interference average for every estimated port, multiplied
    /// over ports and antennas.
    PerPortGamma,
}

impl std::str::FromStr for TheoremMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "common-gamma" => Ok(Self::CommonGamma),
            "per-port-gamma" => Ok(Self::PerPortGamma),
            other => Err(format!("unknown mode '{other}' (expected common-gamma or per-port-gamma)")),
        }
    }
}

impl std::fmt::Display for TheoremMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::CommonGamma => "common-gamma",
            Self::PerPortGamma => "per-port-gamma",
        })
    }
}

fn broadcast(interference: &[f64], n: usize) -> Result<Vec<f64>> {
    match interference.len() {
        1 => Ok(vec![interference[0]; n]),
        len if len == n => Ok(interference.to_vec()),
        len => Err(domain(format!("expected 1 or {n} interference values, got {len}"))),
    }
    .and_then(|v| {
        if v.iter().all(|x| *x >= 0.0 && x.is_finite()) {
            Ok(v)
        } else {
            Err(domain("interference must be nonnegative and finite"))
        }
    })
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("serving distance must be positive, got {rho}")))
    }
}

/// Per-port outage thresholds on `|g|^2`:
/// `threshold * (r^a I + sigma_e^2 + r^a / snr)`.
pub fn outage_thresholds(sys: &System, rho: f64, interference: &[f64]) -> Result<Vec<f64>> {
    check_rho(rho)?;
    let n = sys.selected_count();
    let interference = broadcast(interference, n)?;
    let net = sys.network();
    let a = net.path_loss_exponent;
    let inv_snr = net.inv_snr();
    let errors = sys.error_variances(rho);
    Ok(sys
        .link_distances(rho)
        .iter()
        .zip(&interference)
        .zip(&errors)
        .map(|((r, i), e)| {
            let ra = r.powf(a);
            sys.target.threshold * (ra * i + e + ra * inv_snr)
        })
        .collect())
}

/// Probability that every estimated port of one antenna falls below its
/// outage threshold, given the serving distance and the interference seen
/// by each port (one value is broadcast to all ports).
pub fn conditional_outage(sys: &System, rho: f64, interference: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    let thetas = outage_thresholds(sys, rho, interference)?;
    let taus: Vec<f64> = match sys.scenario.variant {
        FormVariant::Consistent => thetas.iter().map(|t| t.sqrt()).collect(),
        FormVariant::Printed => thetas,
    };
    joint_cdf(&taus, &sys.profile(rho)?, spec)
}

/// Closed-form approximations bracketing the conditional outage in the
/// interference-limited regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Interference-limited closed-form bounds on the conditional outage when
/// all non-reference ports share the correlation `common_mu`.
///
/// All ports are taken at the common distance `rho` for the estimation
/// error, whose variance becomes `2 pi lambda_b (N / L_t) rho^2 / (a - 2)`,
/// and thermal noise is dropped from the thresholds.
pub fn conditional_outage_bounds(sys: &System, rho: f64, interference: &[f64], common_mu: f64) -> Result<OutageBounds> {
    check_rho(rho)?;
    if !(0.0..=1.0).contains(&common_mu) {
        return Err(domain(format!("common correlation must lie in [0, 1], got {common_mu}")));
    }
    let n = sys.selected_count();
    let interference = broadcast(interference, n)?;
    let net = sys.network();
    let a = net.path_loss_exponent;
    let sigma_sq = net.channel_variance;
    let error = sigma_sq
        * 2.0
        * PI
        * net.bs_density
        * (sys.array().ports_per_fa as f64 / sys.budget.data_uses as f64)
        * rho
        * rho
        / (a - 2.0);
    let mu2 = common_mu * common_mu;
    let s = sigma_sq * (1.0 - mu2) + error;
    let xi: Vec<f64> = sys
        .link_distances(rho)
        .iter()
        .zip(&interference)
        .map(|(r, i)| {
            let theta = sys.target.threshold * (r.powf(a) * i + error);
            match sys.scenario.variant {
                FormVariant::Consistent => theta / s,
                FormVariant::Printed => theta * theta / s,
            }
        })
        .collect();
    let x1 = xi[0];
    let lead = 1.0 - (-x1).exp();
    let upsilon_u = -(-x1 * (1.0 - common_mu).powi(2)).exp_m1() / (1.0 + mu2);
    let upsilon_l = -(-x1 * (1.0 + common_mu).powi(2)).exp_m1() / (1.0 + mu2);
    let others = &xi[1..];
    let sum_exp: f64 = others.iter().map(|x| (-x).exp()).sum();
    let spread: f64 = others
        .iter()
        .map(|x| x.sqrt() * (-x * (2.0 + mu2) / (1.0 + mu2)).exp())
        .sum();
    let spread_coeff = 2.0 * PI * mu2 / (1.0 + mu2).powf(1.5);
    let upper = lead - upsilon_u * sum_exp - spread_coeff * spread;
    let lower = lead - upsilon_l * sum_exp;
    Ok(OutageBounds {
        lower: lower.clamp(0.0, 1.0),
        upper: upper.clamp(0.0, 1.0),
    })
}

/// Average of `f(gamma)` over the Gamma interference law at link distance
/// `r`. Interference below `floor` is treated as zero.
pub(crate) fn average_over_gamma<F>(sys: &System, r: f64, floor: f64, spec: &QuadratureSpec, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let model = gamma_interference_model(r, sys.network())?;
    let (k, theta) = (model.shape, model.scale);
    let at_zero = f(0.0)?;
    let floor = floor.max(f64::MIN_POSITIVE);
    let above = gamma_sf(floor, k, theta)?;
    if above < 1e-3 * spec.abs_tol {
        return Ok(at_zero);
    }
    let ceiling = theta * (k + 12.0 * k.sqrt() + 40.0);
    if ceiling <= floor {
        return Ok(at_zero);
    }
    let body = try_integrate(
        |s: f64| {
            let g = s.exp();
            let w = gamma_log_density_in_log(g, k, theta).exp();
            if w == 0.0 {
                Ok(0.0)
            } else {
                Ok(f(g)? * w)
            }
        },
        floor.ln(),
        ceiling.ln(),
        spec,
    )?;
    let beyond = gamma_sf(ceiling, k, theta)?;
    let tail = if beyond > 0.0 { beyond * f(ceiling)? } else { 0.0 };
    Ok(at_zero * (1.0 - above) + body.value + tail)
}

/// Average of `f(rho)` over the nearest-base-station distance law, computed
/// in `v = pi lambda_b rho^2` (an `Exp(1)` variable) up to
/// `v = truncation_radius^2`.
pub(crate) fn average_over_distance<F>(sys: &System, spec: &QuadratureSpec, mut f: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let scale = sys.network().length_scale();
    let v_max = spec.truncation_radius * spec.truncation_radius;
    let r = try_integrate(|v: f64| Ok(f(v.sqrt() * scale)? * (-v).exp()), 0.0, v_max, spec)?;
    Ok(r.value)
}

// Interference level that is negligible next to the other impairments of
// the reference port.
fn interference_floor(sys: &System, rho: f64) -> f64 {
    let net = sys.network();
    let ra = rho.powf(net.path_loss_exponent);
    GAMMA_FLOOR * (sys.error_variances(rho)[0] / ra + net.inv_snr())
}

fn inner_spec(spec: &QuadratureSpec) -> QuadratureSpec {
    spec.with_tolerances(spec.abs_tol * 0.1, spec.rel_tol * 0.1)
}

/// Unconditional outage probability of one antenna (the quantity raised to
/// the power `M` by [`outage_probability`]).
pub fn antenna_outage(sys: &System, spec: &QuadratureSpec, mode: TheoremMode) -> Result<f64> {
    spec.validate()?;
    if sys.target.threshold == 0.0 {
        return Ok(0.0);
    }
    let inner = inner_spec(spec);
    match mode {
        TheoremMode::CommonGamma => average_over_distance(sys, spec, |rho| {
            let floor = interference_floor(sys, rho);
            average_over_gamma(sys, rho, floor, &inner, |g| conditional_outage(sys, rho, &[g], &inner))
        }),
        TheoremMode::PerPortGamma => {
            let mut product = 1.0;
            for idx in 0..sys.selected_count() {
                let d = sys.displacement[idx];
                product *= average_over_distance(sys, spec, |rho| {
                    let floor = interference_floor(sys, rho);
                    average_over_gamma(sys, rho.hypot(d), floor, &inner, |g| {
                        conditional_outage(sys, rho, &[g], &inner)
                    })
                })?;
            }
            Ok(product)
        }
    }
}

/// Unconditional outage probability over the serving distance and the
/// Gamma interference law, for all `M` antennas.
pub fn outage_probability(sys: &System, spec: &QuadratureSpec, mode: TheoremMode) -> Result<f64> {
    let per_fa = antenna_outage(sys, spec, mode)?;
    Ok(per_fa.powi(sys.array().num_fas as i32).clamp(0.0, 1.0))
}

/// Average correlation of the non-reference estimated ports, used as the
/// common correlation of the bounds (0 when only the reference is estimated).
pub fn mean_correlation(sys: &System) -> f64 {
    let others = &sys.mu[1..];
    if others.is_empty() {
        0.0
    } else {
        others.iter().map(|m| m.abs()).sum::<f64>() / others.len() as f64
    }
}

/// Bounds averaged over the serving distance and the Gamma interference law,
/// raised to the power `M`.
pub fn outage_bounds(sys: &System, spec: &QuadratureSpec, common_mu: f64) -> Result<OutageBounds> {
    spec.validate()?;
    let inner = inner_spec(spec);
    let floor_of = |rho: f64| GAMMA_FLOOR * sys.error_variances(rho)[0] / rho.powf(sys.network().path_loss_exponent);
    let lower = average_over_distance(sys, spec, |rho| {
        average_over_gamma(sys, rho, floor_of(rho), &inner, |g| {
            conditional_outage_bounds(sys, rho, &[g], common_mu).map(|b| b.lower)
        })
    })?;
    let upper = average_over_distance(sys, spec, |rho| {
        average_over_gamma(sys, rho, floor_of(rho), &inner, |g| {
            conditional_outage_bounds(sys, rho, &[g], common_mu).map(|b| b.upper)
        })
    })?;
    let m = sys.array().num_fas as i32;
    Ok(OutageBounds {
        lower: lower.powi(m).clamp(0.0, 1.0),
        upper: upper.powi(m).clamp(0.0, 1.0),
    })
}
