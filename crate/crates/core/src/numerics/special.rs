//! Error function and Gamma density.

use std::f64::consts::PI;

use statrs::function::gamma::{gamma_lr, gamma_ur, ln_gamma};

use crate::error::{domain, Result};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const SERIES_LIMIT: f64 = 2.5;

// erf(x) = 2/sqrt(pi) exp(-x^2) sum_n 2^n x^(2n+1) / (2n+1)!!, all terms positive.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term.abs() > 1e-17 * sum.abs() {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

// erfc(x) for x >= SERIES_LIMIT by the Laplace continued fraction,
// evaluated with the modified Lentz method.
fn erfc_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for n in 1..500 {
        let a = 0.5 * n as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}

/// Error function.
pub fn erf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain(format!("erf needs a finite argument, got {x}")));
    }
    let ax = x.abs();
    let v = if ax < SERIES_LIMIT {
        erf_series(ax)
    } else {
        1.0 - erfc_fraction(ax)
    };
    Ok(v.copysign(x))
}

/// Complementary error function `1 - erf(x)`, accurate in the upper tail.
pub fn erfc(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain(format!("erfc needs a finite argument, got {x}")));
    }
    Ok(if x >= SERIES_LIMIT {
        erfc_fraction(x)
    } else if x > -SERIES_LIMIT {
        if x >= 0.0 {
            1.0 - erf_series(x)
        } else {
            1.0 + erf_series(-x)
        }
    } else {
        2.0 - erfc_fraction(-x)
    })
}

fn check_gamma_params(shape: f64, scale: f64) -> Result<()> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(domain(format!("gamma shape must be positive, got {shape}")));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(domain(format!("gamma scale must be positive, got {scale}")));
    }
    Ok(())
}

/// `ln` of `gamma * f(gamma)` for the Gamma(shape, scale) density `f`.
/// This is the density of `ln(gamma)`, the natural integrand after a
/// logarithmic change of variable.
pub(crate) fn gamma_log_density_in_log(gamma: f64, shape: f64, scale: f64) -> f64 {
    let z = gamma / scale;
    shape * z.ln() - z - ln_gamma(shape)
}

/// Gamma probability density with the given shape and scale.
pub fn gamma_pdf(gamma: f64, shape: f64, scale: f64) -> Result<f64> {
    check_gamma_params(shape, scale)?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(domain(format!("gamma_pdf needs a positive argument, got {gamma}")));
    }
    Ok((gamma_log_density_in_log(gamma, shape, scale) - gamma.ln()).exp())
}

/// Gamma cumulative distribution `P[G <= gamma]`.
pub fn gamma_cdf(gamma: f64, shape: f64, scale: f64) -> Result<f64> {
    check_gamma_params(shape, scale)?;
    if gamma <= 0.0 {
        return Ok(0.0);
    }
    Ok(gamma_lr(shape, gamma / scale))
}

/// Gamma survival function `P[G > gamma]`.
pub fn gamma_sf(gamma: f64, shape: f64, scale: f64) -> Result<f64> {
    check_gamma_params(shape, scale)?;
    if gamma <= 0.0 {
        return Ok(1.0);
    }
    Ok(gamma_ur(shape, gamma / scale))
}
