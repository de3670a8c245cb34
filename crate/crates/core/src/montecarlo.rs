//! Monte Carlo simulation of the estimation and port-selection pipeline
//! over random Poisson networks.
//!
//! Every trial owns a ChaCha8 stream selected by its index, so aggregate
//! counts do not depend on how trials are spread over worker threads.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};
use rayon::prelude::*;

use crate::channel::complex_normal;
use crate::error::{config, domain, Result};
use crate::field::{default_outer_radius, interference_tail_mean, mean_interference, sample_serving_distance};
use crate::model::System;

// Trials per block when floating-point sums must be reduced in a fixed order.
const SUM_BLOCK: u64 = 4096;

/// Controls a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialPlan {
    pub num_trials: u64,
    pub seed: u64,
    /// Build estimates from simulated pilot observations instead of drawing
    /// the estimation error directly.
    pub faithful_pilots: bool,
    /// Outer radius of the simulated interferer annulus; `None` uses
    /// `max(50 / sqrt(pi lambda_b), 10 rho)`. Interference beyond it is
    /// added as its mean.
    pub outer_radius: Option<f64>,
    /// All candidate ports of a trial see the same interferer fades.
    pub same_interferer_fades: bool,
    /// Stage-two SINR uses the realised error `|g - g_hat|^2` instead of
    /// its variance.
    pub realized_error: bool,
    /// Condition every trial on this serving distance.
    pub fixed_distance: Option<f64>,
    /// Replace the interferer field by this interference power on every port.
    pub fixed_interference: Option<f64>,
}

impl Default for TrialPlan {
    fn default() -> Self {
        Self {
            num_trials: 10_000,
            seed: 1,
            faithful_pilots: false,
            outer_radius: None,
            same_interferer_fades: false,
            realized_error: false,
            fixed_distance: None,
            fixed_interference: None,
        }
    }
}

impl TrialPlan {
    pub fn validate(&self) -> Result<()> {
        if self.num_trials == 0 {
            return Err(config("trials must be at least 1"));
        }
        if let Some(r) = self.outer_radius {
            if !(r > 0.0 && r.is_finite()) {
                return Err(config("outer_radius must be positive"));
            }
        }
        if let Some(rho) = self.fixed_distance {
            if !(rho > 0.0 && rho.is_finite()) {
                return Err(config("fixed serving distance must be positive"));
            }
        }
        if let Some(i) = self.fixed_interference {
            if !(i >= 0.0 && i.is_finite()) {
                return Err(config("fixed interference must be nonnegative"));
            }
        }
        Ok(())
    }
}

/// Everything observed in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub serving_distance: f64,
    /// Stage-one winner (one-based port index) of each antenna.
    pub candidates: Vec<usize>,
    /// Stage-two SINR of each antenna's candidate.
    pub candidate_sinr: Vec<f64>,
    pub winning_sinr: f64,
    /// Zero-based antenna index of the stage-two winner.
    pub winning_fa: usize,
    pub outage: bool,
    /// `|g - g_hat|^2` for every estimated port, antenna-major.
    pub estimation_errors: Vec<f64>,
}

/// Outage estimate with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageEstimate {
    pub probability: f64,
    pub std_error: f64,
    pub outages: u64,
    pub trials: u64,
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// The random stream owned by trial `index` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn path_gain_from_sq(r_sq: f64, a: f64) -> f64 {
    if a == 4.0 {
        (r_sq * r_sq).recip()
    } else {
        r_sq.powf(-0.5 * a)
    }
}

/// Interferers of one trial, stored as path gains `r^-a`.
struct Field {
    gains: Vec<f64>,
    tail: f64,
    fixed: Option<f64>,
}

impl Field {
    fn sample<R: Rng>(&mut self, rng: &mut R, sys: &System, plan: &TrialPlan, rho: f64) -> Result<()> {
        self.gains.clear();
        self.fixed = plan.fixed_interference;
        if self.fixed.is_some() {
            return Ok(());
        }
        let net = sys.network();
        let r_max = plan
            .outer_radius
            .unwrap_or_else(|| default_outer_radius(net.bs_density, rho));
        if r_max <= rho {
            return Err(config(format!(
                "outer radius {r_max} does not exceed the serving distance {rho}"
            )));
        }
        self.tail = interference_tail_mean(r_max, net);
        let (lo, hi) = (rho * rho, r_max * r_max);
        let count: f64 = Poisson::new(net.bs_density * PI * (hi - lo))
            .map_err(|e| domain(format!("interferer count: {e}")))?
            .sample(rng);
        let a = net.path_loss_exponent;
        for _ in 0..count as usize {
            let u: f64 = rng.random();
            self.gains.push(path_gain_from_sq(lo + u * (hi - lo), a));
        }
        Ok(())
    }

    /// One interference realisation with fresh fades.
    fn power<R: Rng>(&self, rng: &mut R, sigma_sq: f64) -> f64 {
        if let Some(i) = self.fixed {
            return i;
        }
        let mut sum = 0.0;
        for g in &self.gains {
            let fade: f64 = Exp1.sample(rng);
            sum += g * fade;
        }
        sum * sigma_sq + self.tail
    }
}

/// Reusable per-worker buffers.
struct Workspace {
    field: Field,
    truth: Vec<Complex64>,
    estimate: Vec<Complex64>,
    ra: Vec<f64>,
    error_var: Vec<f64>,
    estimator: Vec<f64>,
}

impl Workspace {
    fn new(sys: &System) -> Self {
        let n = sys.selected_count();
        Self {
            field: Field {
                gains: Vec::new(),
                tail: 0.0,
                fixed: None,
            },
            truth: vec![Complex64::new(0.0, 0.0); n],
            estimate: vec![Complex64::new(0.0, 0.0); n],
            ra: vec![0.0; n],
            error_var: vec![0.0; n],
            estimator: vec![0.0; n],
        }
    }
}

/// Received pilot after despreading and its LMMSE scaling, for a port at
/// path loss `ra` with pilot interference power `pilot_interference`.
fn pilot_estimate<R: Rng>(
    rng: &mut R,
    g: Complex64,
    ra: f64,
    pilot_interference: f64,
    estimator: f64,
    sys: &System,
) -> Complex64 {
    let net = sys.network();
    let p = net.tx_power;
    let noise = net.channel_variance * p * net.inv_snr();
    let amp = (sys.budget.pilot_length * p / ra).sqrt();
    let disturbance = complex_normal(rng) * (p * pilot_interference + noise).sqrt();
    (g * amp + disturbance) * estimator
}

// LMMSE coefficient for a port at link distance r (path loss ra).
fn lmmse_coefficient(sys: &System, r: f64, ra: f64) -> Result<f64> {
    let net = sys.network();
    let p = net.tx_power;
    let s2 = net.channel_variance;
    let energy = sys.budget.pilot_length * p / ra;
    let noise = s2 * p * net.inv_snr();
    Ok(energy.sqrt() * s2 / (energy * s2 + noise + p * mean_interference(r, net)?))
}

fn simulate<R: Rng>(
    rng: &mut R,
    sys: &System,
    plan: &TrialPlan,
    ws: &mut Workspace,
    mut record: Option<&mut TrialOutcome>,
) -> Result<bool> {
    let net = sys.network();
    let a = net.path_loss_exponent;
    let s2 = net.channel_variance;
    let sigma = s2.sqrt();
    let inv_snr = net.inv_snr();
    let rho = match plan.fixed_distance {
        Some(r) => r,
        None => sample_serving_distance(rng, net.bs_density),
    };
    ws.field.sample(rng, sys, plan, rho)?;
    let errors = sys.error_variances(rho);
    for (j, r) in sys.link_distances(rho).into_iter().enumerate() {
        ws.ra[j] = r.powf(a);
        ws.error_var[j] = errors[j];
        if plan.faithful_pilots {
            ws.estimator[j] = lmmse_coefficient(sys, r, ws.ra[j])?;
        }
    }
    let shared = if plan.same_interferer_fades {
        Some(ws.field.power(rng, s2))
    } else {
        None
    };
    if let Some(out) = record.as_deref_mut() {
        out.serving_distance = rho;
        out.candidates.clear();
        out.candidate_sinr.clear();
        out.estimation_errors.clear();
    }
    let n = sys.selected_count();
    let mut best = (f64::NEG_INFINITY, 0usize);
    for fa in 0..sys.array().num_fas {
        let anchor = complex_normal(rng);
        ws.truth[0] = anchor * sigma;
        if plan.faithful_pilots {
            for j in 1..n {
                let innov = complex_normal(rng) * (1.0 - sys.mu[j] * sys.mu[j]).max(0.0).sqrt();
                ws.truth[j] = (innov + anchor * sys.mu[j]) * sigma;
            }
            for j in 0..n {
                let pilot_interference = ws.field.power(rng, s2);
                ws.estimate[j] = pilot_estimate(rng, ws.truth[j], ws.ra[j], pilot_interference, ws.estimator[j], sys);
            }
        } else {
            // The estimated gains follow the correlation model anchored on
            // the estimated reference gain; each port adds its own error.
            ws.estimate[0] = ws.truth[0] + complex_normal(rng) * ws.error_var[0].sqrt();
            for j in 1..n {
                let innov = complex_normal(rng) * ((1.0 - sys.mu[j] * sys.mu[j]).max(0.0).sqrt() * sigma);
                let err = complex_normal(rng) * ws.error_var[j].sqrt();
                ws.truth[j] = innov + ws.truth[0] * sys.mu[j];
                ws.estimate[j] = innov + ws.estimate[0] * sys.mu[j] + err;
            }
        }
        let mut pick = 0;
        for j in 1..n {
            if ws.estimate[j].norm_sqr() > ws.estimate[pick].norm_sqr() {
                pick = j;
            }
        }
        let interference = match shared {
            Some(i) => i,
            None => ws.field.power(rng, s2),
        };
        let distortion = if plan.realized_error {
            (ws.truth[pick] - ws.estimate[pick]).norm_sqr()
        } else {
            ws.error_var[pick]
        };
        let ra = ws.ra[pick];
        let sinr = (ws.estimate[pick].norm_sqr() / ra) / (interference + distortion / ra + inv_snr);
        if sinr > best.0 {
            best = (sinr, fa);
        }
        if let Some(out) = record.as_deref_mut() {
            out.candidates.push(sys.budget.selected_ports[pick]);
            out.candidate_sinr.push(sinr);
            for j in 0..n {
                out.estimation_errors.push((ws.truth[j] - ws.estimate[j]).norm_sqr());
            }
        }
    }
    let outage = best.0 < sys.target.threshold;
    if let Some(out) = record {
        out.winning_sinr = best.0;
        out.winning_fa = best.1;
        out.outage = outage;
    }
    Ok(outage)
}

/// Runs one trial of the full pipeline: serving distance, interferer field,
/// correlated gains, estimation, per-antenna selection by estimated
/// magnitude, then selection across antennas by SINR.
pub fn run_trial<R: Rng>(rng: &mut R, sys: &System, plan: &TrialPlan) -> Result<TrialOutcome> {
    plan.validate()?;
    let mut ws = Workspace::new(sys);
    let mut out = TrialOutcome {
        serving_distance: 0.0,
        candidates: Vec::new(),
        candidate_sinr: Vec::new(),
        winning_sinr: 0.0,
        winning_fa: 0,
        outage: false,
        estimation_errors: Vec::new(),
    };
    simulate(rng, sys, plan, &mut ws, Some(&mut out))?;
    Ok(out)
}

/// Fraction of `plan.num_trials` trials in outage.
pub fn estimate_outage(sys: &System, plan: &TrialPlan) -> Result<OutageEstimate> {
    plan.validate()?;
    let outages = (0..plan.num_trials)
        .into_par_iter()
        .map_init(
            || Workspace::new(sys),
            |ws, t| {
                let mut rng = trial_rng(plan.seed, t);
                simulate(&mut rng, sys, plan, ws, None).map(u64::from)
            },
        )
        .try_reduce(|| 0, |a, b| Ok(a + b))?;
    let n = plan.num_trials as f64;
    let p = outages as f64 / n;
    Ok(OutageEstimate {
        probability: p,
        std_error: (p * (1.0 - p) / n).sqrt(),
        outages,
        trials: plan.num_trials,
    })
}

/// Empirical mean squared error `|g - g_hat|^2` of the pilot-based LMMSE
/// estimate of port `port` (one-based) at fixed serving distance `rho`.
pub fn estimate_lmmse_mse(sys: &System, plan: &TrialPlan, rho: f64, port: usize) -> Result<MeanEstimate> {
    plan.validate()?;
    if !plan.faithful_pilots {
        return Err(config("LMMSE error estimation needs faithful_pilots"));
    }
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(domain(format!("serving distance must be positive, got {rho}")));
    }
    let r = crate::geometry::link_distance(port, rho, sys.array())?;
    let net = sys.network();
    let ra = r.powf(net.path_loss_exponent);
    let estimator = lmmse_coefficient(sys, r, ra)?;
    let sigma = net.channel_variance.sqrt();
    let plan = TrialPlan {
        fixed_distance: Some(rho),
        ..*plan
    };
    let blocks = plan.num_trials.div_ceil(SUM_BLOCK);
    let partial = (0..blocks)
        .into_par_iter()
        .map(|b| -> Result<(f64, f64)> {
            let mut field = Field {
                gains: Vec::new(),
                tail: 0.0,
                fixed: None,
            };
            let (mut s, mut ss) = (0.0, 0.0);
            for t in b * SUM_BLOCK..((b + 1) * SUM_BLOCK).min(plan.num_trials) {
                let mut rng = trial_rng(plan.seed, t);
                field.sample(&mut rng, sys, &plan, rho)?;
                let g = complex_normal(&mut rng) * sigma;
                let pilot_interference = field.power(&mut rng, net.channel_variance);
                let g_hat = pilot_estimate(&mut rng, g, ra, pilot_interference, estimator, sys);
                let e = (g - g_hat).norm_sqr();
                s += e;
                ss += e * e;
            }
            Ok((s, ss))
        })
        .collect::<Result<Vec<_>>>()?;
    let (s, ss) = partial.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0, acc.1 + p.1));
    let n = plan.num_trials as f64;
    let mean = s / n;
    let var = if plan.num_trials > 1 {
        ((ss - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(MeanEstimate {
        mean,
        std_error: (var / n).sqrt(),
        trials: plan.num_trials,
    })
}
