//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

/// `J0` by its ascending series, `terms` terms.
pub fn j0_series(x: f64, terms: usize) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..terms {
        term *= -q / (k * k) as f64;
        sum += term;
    }
    sum
}

/// `I0` by its ascending series, summed until terms stop contributing.
pub fn i0_series(x: f64, min_terms: usize) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 1;
    while k < min_terms || term > sum * 1e-18 {
        term *= q / (k * k) as f64;
        sum += term;
        k += 1;
    }
    sum
}

/// `erf` from power series: the alternating Maclaurin series for small
/// arguments and the positive Kummer form `2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!` beyond.
pub fn erf_series(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax <= 3.0 {
        let mut term = ax;
        let mut sum = ax;
        let mut n = 0usize;
        while term.abs() > 1e-20 * sum.abs().max(1e-300) || n < 5 {
            n += 1;
            term *= -ax * ax / n as f64;
            sum += term / (2 * n + 1) as f64;
            if n > 400 {
                break;
            }
        }
        2.0 / PI.sqrt() * sum
    } else {
        let mut term = ax;
        let mut sum = ax;
        let mut n = 0usize;
        while term > 1e-18 * sum {
            n += 1;
            term *= 2.0 * ax * ax / (2 * n + 1) as f64;
            sum += term;
        }
        2.0 / PI.sqrt() * (-ax * ax).exp() * sum
    };
    v.copysign(x)
}

/// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss-Legendre rule over `panels` equal panels.
pub fn composite_gl(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> f64 {
    let h = (b - a) / panels as f64;
    let mut sum = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in rule {
            sum += w * f(mid + 0.5 * h * x);
        }
    }
    0.5 * h * sum
}

/// Marcum `Q1(a, b)` as the integral of the Rician density beyond `b`.
pub fn marcum_oracle(a: f64, b: f64, rule: &[(f64, f64)]) -> f64 {
    let density = |t: f64| t * (-(t - a) * (t - a) / 2.0).exp() * i0_series(a * t, 4) * (-a * t).exp();
    let hi = a.max(b) + 14.0;
    composite_gl(density, b, hi, (4.0 * (hi - b)).ceil().max(1.0) as usize, rule)
}
