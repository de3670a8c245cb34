//! Spatially correlated port channels, LMMSE estimation quality and the
//! joint law of the estimated gains.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Error, Result};
use crate::field::NetworkConfig;
use crate::geometry::{fluid_velocity, link_distance, FaArrayConfig, FluidParams, FrameBudget, FrameInputs};
use crate::numerics::{i0e_unchecked, j0_unchecked, marcum_q1_pair, try_integrate, QuadratureSpec};

// Beyond this many e-folds the Rayleigh weight of the reference port is negligible.
const CDF_UPPER_CAP: f64 = 60.0;

/// Correlation between port `i` (one-based) and the reference port.
///
/// The reference port itself gets 0; every other port gets
/// `J0(2 pi (i - 1) kappa / (N - 1))`, which may be negative.
pub fn autocorrelation(i: usize, cfg: &FaArrayConfig) -> Result<f64> {
    if i == 0 || i > cfg.ports_per_fa {
        return Err(domain(format!("port index {i} outside 1..={}", cfg.ports_per_fa)));
    }
    if i == 1 {
        return Ok(0.0);
    }
    let arg = 2.0 * PI * (i - 1) as f64 * cfg.kappa / (cfg.ports_per_fa - 1) as f64;
    Ok(j0_unchecked(arg))
}

/// Correlations and effective variances of the estimated gains on the
/// estimated ports, reference port first.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationProfile {
    /// Correlation with the reference port; the first entry is 0.
    pub mu: Vec<f64>,
    /// `sigma^2 (1 - mu^2) + sigma_e^2` per port.
    pub sigma_tilde_sq: Vec<f64>,
}

impl CorrelationProfile {
    /// Builds the profile from correlations, the channel variance and the
    /// absolute estimation-error variance of each port.
    pub fn new(mu: Vec<f64>, sigma_sq: f64, error_variance: &[f64]) -> Result<Self> {
        if mu.len() != error_variance.len() {
            return Err(domain("profile needs one error variance per port"));
        }
        let sigma_tilde_sq = mu
            .iter()
            .zip(error_variance)
            .map(|(m, e)| sigma_sq * (1.0 - m * m) + e)
            .collect();
        Self::from_variances(mu, sigma_tilde_sq)
    }

    /// Builds the profile from correlations and effective variances directly.
    pub fn from_variances(mu: Vec<f64>, sigma_tilde_sq: Vec<f64>) -> Result<Self> {
        if mu.is_empty() || mu.len() != sigma_tilde_sq.len() {
            return Err(domain("profile needs equal, nonzero numbers of correlations and variances"));
        }
        if mu[0] != 0.0 {
            return Err(domain("the reference port must have zero correlation"));
        }
        if mu.iter().any(|m| !(m.abs() <= 1.0)) {
            return Err(domain("port correlations must lie in [-1, 1]"));
        }
        if sigma_tilde_sq.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(domain("effective variances must be positive"));
        }
        Ok(Self { mu, sigma_tilde_sq })
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }
}

/// Estimation-error variance of one port at a given serving distance,
/// relative to the channel variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimationQuality {
    pub error_variance: f64,
    pub rho: f64,
    pub port: usize,
}

/// Effective noise-plus-interference level seen by the pilot of a port at
/// link distance `r`, in units of pilot symbols:
/// `r^a / snr + 2 pi lambda_b r^2 / (a - 2)`.
pub(crate) fn pilot_impairment(r: f64, net: &NetworkConfig) -> f64 {
    let a = net.path_loss_exponent;
    r.powf(a) * net.inv_snr() + 2.0 * PI * net.bs_density * r * r / (a - 2.0)
}

/// LMMSE error variance `(1 + pilot / impairment)^-1` for a pilot of the given length.
pub(crate) fn relative_error_variance(r: f64, pilot_length: f64, net: &NetworkConfig) -> f64 {
    (1.0 + pilot_length / pilot_impairment(r, net)).recip()
}

/// LMMSE estimation-error variance of port `i` at serving distance `rho`.
pub fn estimation_error_variance(
    i: usize,
    rho: f64,
    cfg: &FaArrayConfig,
    budget: &FrameBudget,
    net: &NetworkConfig,
) -> Result<EstimationQuality> {
    if !(net.path_loss_exponent > 2.0) {
        return Err(domain(format!(
            "path-loss exponent {} <= 2: the mean interference integral diverges",
            net.path_loss_exponent
        )));
    }
    if !(budget.pilot_length > 0.0) {
        return Err(domain("pilot length must be positive"));
    }
    let r = link_distance(i, rho, cfg)?;
    Ok(EstimationQuality {
        error_variance: relative_error_variance(r, budget.pilot_length, net),
        rho,
        port: i,
    })
}

/// Smallest (real-valued) number of skipped ports that keeps the estimation
/// error variance of port `i` at serving distance `rho` below `target`.
///
/// The per-port pilot budget available per unit of skip is
/// `L_e / (M N) - kappa lambda W_c / ((N - 1) u)`; when it is not positive
/// the frame cannot meet any target and [`Error::InfeasibleSkip`] is returned.
pub fn min_skipped_ports(
    target: f64,
    rho: f64,
    i: usize,
    cfg: &FaArrayConfig,
    fluid: &FluidParams,
    frame: &FrameInputs,
    net: &NetworkConfig,
) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(domain(format!("target variance must lie in (0, 1), got {target}")));
    }
    frame.validate()?;
    fluid.validate()?;
    let r = link_distance(i, rho, cfg)?;
    let m = cfg.num_fas as f64;
    let n = cfg.ports_per_fa as f64;
    let budget = frame.estimation_uses() as f64 / (m * n)
        - cfg.length() * frame.coherence_bandwidth / ((n - 1.0) * fluid_velocity(fluid));
    if !(budget > 0.0) {
        return Err(Error::InfeasibleSkip { budget });
    }
    Ok(pilot_impairment(r, net) / budget * (target.recip() - 1.0))
}

fn check_taus(taus: &[f64], profile: &CorrelationProfile) -> Result<()> {
    if taus.len() != profile.len() {
        return Err(domain(format!(
            "expected {} thresholds, got {}",
            profile.len(),
            taus.len()
        )));
    }
    if taus.iter().any(|t| !(*t >= 0.0)) {
        return Err(domain("thresholds must be nonnegative"));
    }
    Ok(())
}

/// Probability that every estimated gain magnitude stays below its
/// threshold, `P[|g_1| < tau_1, ..., |g_N'| < tau_N']`.
///
/// Conditioning on the reference port reduces this to a single integral
/// over `t = |g_1|^2 / s_1` of `exp(-t)` times a product of Marcum-Q
/// complements.
pub fn joint_cdf(taus: &[f64], profile: &CorrelationProfile, spec: &QuadratureSpec) -> Result<f64> {
    check_taus(taus, profile)?;
    let s1 = profile.sigma_tilde_sq[0];
    let upper = taus[0] * taus[0] / s1;
    if profile.len() == 1 {
        return Ok(-(-upper).exp_m1());
    }
    if taus[1..].iter().any(|&t| t == 0.0) || upper == 0.0 {
        return Ok(0.0);
    }
    let terms: Vec<(f64, f64)> = profile.mu[1..]
        .iter()
        .zip(&profile.sigma_tilde_sq[1..])
        .zip(&taus[1..])
        .map(|((m, s), tau)| (2.0 * m * m * s1 / s, tau * (2.0 / s).sqrt()))
        .collect();
    let integrand = |t: f64| -> Result<f64> {
        let mut prod = (-t).exp();
        for &(c, b) in &terms {
            if prod == 0.0 {
                break;
            }
            prod *= marcum_q1_pair((c * t).sqrt(), b).1;
        }
        Ok(prod)
    };
    let r = try_integrate(integrand, 0.0, upper.min(CDF_UPPER_CAP), spec)?;
    Ok(r.value.clamp(0.0, 1.0))
}

/// Joint density of the estimated gain magnitudes: a Rayleigh density for
/// the reference port times Rician densities, centred on `|mu_j| tau_1`,
/// for the other ports.
pub fn joint_pdf(taus: &[f64], profile: &CorrelationProfile) -> Result<f64> {
    check_taus(taus, profile)?;
    let t1 = taus[0];
    let s1 = profile.sigma_tilde_sq[0];
    let mut density = 2.0 * t1 / s1 * (-t1 * t1 / s1).exp();
    for ((&m, &s), &t) in profile.mu[1..].iter().zip(&profile.sigma_tilde_sq[1..]).zip(&taus[1..]) {
        let centre = m.abs() * t1;
        let z = 2.0 * centre * t / s;
        density *= 2.0 * t / s * (-(t - centre) * (t - centre) / s).exp() * i0e_unchecked(z);
    }
    Ok(density)
}

/// Draws correlated small-scale gains for every port of every antenna.
///
/// Port `i` of an antenna mixes its own innovation with the reference
/// port's gain: `g_i = sigma (sqrt(1 - mu_i^2) w_i + mu_i w_1)` with
/// `w ~ CN(0, 1)`; antennas are independent.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    mu: Vec<f64>,
    innovation: Vec<f64>,
    sigma: f64,
}

impl ChannelSampler {
    pub fn new(cfg: &FaArrayConfig, sigma_sq: f64) -> Result<Self> {
        let mu = (1..=cfg.ports_per_fa)
            .map(|i| autocorrelation(i, cfg))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_correlations(mu, sigma_sq))
    }

    /// Sampler for an explicit correlation list, reference port first.
    pub fn from_correlations(mu: Vec<f64>, sigma_sq: f64) -> Self {
        let innovation = mu.iter().map(|m| (1.0 - m * m).max(0.0).sqrt()).collect();
        Self {
            mu,
            innovation,
            sigma: sigma_sq.sqrt(),
        }
    }

    pub fn ports(&self) -> usize {
        self.mu.len()
    }

    /// Fills `out` (one entry per port) with the gains of one antenna.
    pub fn sample_fa<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [Complex64]) {
        let anchor = complex_normal(rng);
        for (k, slot) in out.iter_mut().enumerate() {
            let g = if k == 0 {
                anchor
            } else {
                complex_normal(rng) * self.innovation[k] + anchor * self.mu[k]
            };
            *slot = g * self.sigma;
        }
    }
}

/// Standard circularly symmetric complex Gaussian (unit total variance).
pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// Gains of all ports of all antennas; `result[k][i]` is port `i + 1` of antenna `k`.
pub fn sample_correlated_channels<R: Rng + ?Sized>(
    rng: &mut R,
    cfg: &FaArrayConfig,
    sigma_sq: f64,
) -> Result<Vec<Vec<Complex64>>> {
    let sampler = ChannelSampler::new(cfg, sigma_sq)?;
    Ok((0..cfg.num_fas)
        .map(|_| {
            let mut fa = vec![Complex64::new(0.0, 0.0); cfg.ports_per_fa];
            sampler.sample_fa(rng, &mut fa);
            fa
        })
        .collect())
}
