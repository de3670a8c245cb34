//! Poisson base-station field: serving distance, interferer sampling, the
//! exact interference mean and its Gamma moment match.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, Poisson};

use crate::error::{config, domain, Result};

/// Largest admissible ratio between the interference lost beyond the outer
/// sampling radius and the full interference mean.
pub const MAX_TAIL_RATIO: f64 = 1e-4;

/// Network-level scalars.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkConfig {
    /// Base-station density (BS/m^2).
    pub bs_density: f64,
    /// Path-loss exponent, strictly above 2.
    pub path_loss_exponent: f64,
    /// Transmit power in watts.
    pub tx_power: f64,
    /// Noise power in watts.
    pub noise_power: f64,
    /// Small-scale fading variance.
    pub channel_variance: f64,
    /// Treat thermal noise as negligible (transmit SNR taken as infinite).
    pub interference_limited: bool,
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.bs_density > 0.0 && self.bs_density.is_finite()) {
            return Err(config("bs_density must be positive"));
        }
        if !(self.path_loss_exponent > 2.0 && self.path_loss_exponent.is_finite()) {
            return Err(config(format!(
                "path_loss_exponent must exceed 2: the Campbell mean-interference integral diverges otherwise, got {}",
                self.path_loss_exponent
            )));
        }
        if !(self.tx_power > 0.0 && self.tx_power.is_finite()) {
            return Err(config("tx_power must be positive"));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(config("noise_power must be positive"));
        }
        if !(self.channel_variance > 0.0 && self.channel_variance.is_finite()) {
            return Err(config("channel_variance must be positive"));
        }
        Ok(())
    }

    /// Transmit SNR `sigma^2 P / N0`.
    pub fn snr(&self) -> f64 {
        if self.interference_limited {
            f64::INFINITY
        } else {
            self.channel_variance * self.tx_power / self.noise_power
        }
    }

    /// `1 / snr()`, exactly zero in the interference-limited regime.
    pub fn inv_snr(&self) -> f64 {
        if self.interference_limited {
            0.0
        } else {
            self.noise_power / (self.channel_variance * self.tx_power)
        }
    }

    /// Natural length scale `1 / sqrt(pi lambda_b)` (root mean square serving distance).
    pub fn length_scale(&self) -> f64 {
        (PI * self.bs_density).sqrt().recip()
    }
}

fn check_exponent(a: f64) -> Result<()> {
    if a > 2.0 && a.is_finite() {
        Ok(())
    } else {
        Err(domain(format!(
            "path-loss exponent {a} <= 2: the mean interference integral diverges"
        )))
    }
}

/// Draws the distance to the nearest base station of a PPP of density `bs_density`.
pub fn sample_serving_distance<R: Rng + ?Sized>(rng: &mut R, bs_density: f64) -> f64 {
    let e: f64 = Exp1.sample(rng);
    (e / (PI * bs_density)).sqrt()
}

/// Default outer sampling radius for an exclusion radius `r0`.
pub fn default_outer_radius(bs_density: f64, r0: f64) -> f64 {
    (50.0 / (PI * bs_density).sqrt()).max(10.0 * r0)
}

/// Mean interference contributed by base stations beyond `r_max`.
pub fn interference_tail_mean(r_max: f64, cfg: &NetworkConfig) -> f64 {
    let a = cfg.path_loss_exponent;
    2.0 * PI * cfg.bs_density * cfg.channel_variance * r_max.powf(2.0 - a) / (a - 2.0)
}

/// Appends PPP points on the annulus `(r0, r_max]` to `out`, as distances.
/// No truncation check is made.
pub fn sample_annulus<R: Rng + ?Sized>(rng: &mut R, bs_density: f64, r0: f64, r_max: f64, out: &mut Vec<f64>) {
    let (lo, hi) = (r0 * r0, r_max * r_max);
    let mean = bs_density * PI * (hi - lo);
    if !(mean > 0.0) {
        return;
    }
    let count: f64 = Poisson::new(mean).expect("positive Poisson mean").sample(rng);
    let count = count as usize;
    out.reserve(count);
    for _ in 0..count {
        let u: f64 = rng.random();
        out.push((lo + u * (hi - lo)).sqrt());
    }
}

/// Samples interferer distances on the annulus `(r0, r_max]`.
///
/// The annulus must capture all but [`MAX_TAIL_RATIO`] of the interference
/// mean, i.e. `(r_max / r0)^(2 - a) < MAX_TAIL_RATIO`.
pub fn sample_interferers<R: Rng + ?Sized>(
    rng: &mut R,
    bs_density: f64,
    r0: f64,
    r_max: f64,
    path_loss_exponent: f64,
) -> Result<Vec<f64>> {
    check_exponent(path_loss_exponent)?;
    if !(r0 > 0.0 && r_max > r0 && r_max.is_finite()) {
        return Err(domain(format!("annulus needs 0 < r0 < r_max, got ({r0}, {r_max})")));
    }
    if !(bs_density > 0.0) {
        return Err(domain("bs_density must be positive"));
    }
    let tail_ratio = (r_max / r0).powf(2.0 - path_loss_exponent);
    if tail_ratio >= MAX_TAIL_RATIO {
        return Err(config(format!(
            "outer radius {r_max} leaves {tail_ratio:.2e} of the interference mean beyond it (limit {MAX_TAIL_RATIO:e})"
        )));
    }
    let mut out = Vec::new();
    sample_annulus(rng, bs_density, r0, r_max, &mut out);
    Ok(out)
}

/// Interference power `sum r^-a |g|^2` with fades drawn as exponentials of
/// mean `channel_variance`.
pub fn sample_interference_power<R: Rng + ?Sized>(rng: &mut R, distances: &[f64], cfg: &NetworkConfig) -> f64 {
    let a = cfg.path_loss_exponent;
    let sum: f64 = distances
        .iter()
        .map(|&r| {
            let fade: f64 = Exp1.sample(rng);
            fade * r.powf(-a)
        })
        .sum();
    sum * cfg.channel_variance
}

/// Mean interference beyond distance `r`, by Campbell's theorem.
pub fn mean_interference(r: f64, cfg: &NetworkConfig) -> Result<f64> {
    check_exponent(cfg.path_loss_exponent)?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(domain(format!("mean interference needs r > 0, got {r}")));
    }
    Ok(interference_tail_mean(r, cfg))
}

/// Gamma moment match of the interference seen at link distance `distance`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceModel {
    pub shape: f64,
    pub scale: f64,
    pub mean: f64,
    pub variance: f64,
    pub distance: f64,
}

/// Moment-matched Gamma law for the interference at link distance `r`:
/// shape `2 (pi lambda_b r^(2-a) / (a-2))^2`, scale `sigma^2 (a-2) / (pi lambda_b r^(2-a))`.
pub fn gamma_interference_model(r: f64, cfg: &NetworkConfig) -> Result<InterferenceModel> {
    let mean = mean_interference(r, cfg)?;
    let a = cfg.path_loss_exponent;
    let base = PI * cfg.bs_density * r.powf(2.0 - a);
    let shape = 2.0 * (base / (a - 2.0)).powi(2);
    let scale = cfg.channel_variance * (a - 2.0) / base;
    if !(shape > 0.0 && scale.is_finite()) {
        return Err(domain(format!("gamma interference model degenerates at r = {r}")));
    }
    Ok(InterferenceModel {
        shape,
        scale,
        mean,
        variance: shape * scale * scale,
        distance: r,
    })
}

/// Draws from the Gamma law of `model`.
pub fn sample_gamma_interference<R: Rng + ?Sized>(rng: &mut R, model: &InterferenceModel) -> f64 {
    Gamma::new(model.shape, model.scale)
        .expect("validated gamma parameters")
        .sample(rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn net() -> NetworkConfig {
        NetworkConfig {
            bs_density: 5e-5,
            path_loss_exponent: 4.0,
            tx_power: 1.0,
            noise_power: 1e-5,
            channel_variance: 1.0,
            interference_limited: false,
        }
    }

    #[test]
    fn mean_interference_scaling() {
        let c = net();
        let m = mean_interference(50.0, &c).unwrap();
        assert_relative_eq!(mean_interference(100.0, &c).unwrap(), m / 4.0, max_relative = 1e-14);
        let c2 = NetworkConfig { bs_density: 1e-4, ..c };
        assert_relative_eq!(mean_interference(50.0, &c2).unwrap(), 2.0 * m, max_relative = 1e-14);
        let bad = NetworkConfig { path_loss_exponent: 2.0, ..c };
        assert!(mean_interference(50.0, &bad).is_err());
    }

    #[test]
    fn gamma_model_moments() {
        let c = net();
        for r in [10.0, 80.0, 300.0] {
            let m = gamma_interference_model(r, &c).unwrap();
            assert_relative_eq!(m.shape * m.scale, mean_interference(r, &c).unwrap(), max_relative = 1e-14);
            assert_relative_eq!(m.shape * m.scale * m.scale, 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn interferer_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(sample_interferers(&mut rng, 5e-5, 10.0, 5.0, 4.0).is_err());
        assert!(sample_interferers(&mut rng, 5e-5, 10.0, 50.0, 4.0).is_err());
        assert!(sample_interferers(&mut rng, 5e-5, 10.0, 2000.0, 4.0).is_ok());
        assert!(sample_interferers(&mut rng, 5e-5, 10.0, 2000.0, 2.0).is_err());
    }

    #[test]
    fn snr_regimes() {
        let c = net();
        assert_relative_eq!(c.snr(), 1e5);
        let il = NetworkConfig { interference_limited: true, ..c };
        assert_eq!(il.inv_snr(), 0.0);
        assert!(il.snr().is_infinite());
    }
}
