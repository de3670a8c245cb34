//! First-order Marcum Q-function.
//!
//! With `x = alpha * beta`, the Neumann series reads
//!
//! ```text
//! Q1(a, b)     = exp(-(b - a)^2 / 2) * sum_{k>=0} (a/b)^k Ie_k(x)        (b > a)
//! 1 - Q1(a, b) = exp(-(a - b)^2 / 2) * sum_{k>=1} (b/a)^k Ie_k(x)        (b <= a)
//! ```
//!
//! where `Ie_k(x) = exp(-x) I_k(x)`. Both sums have ratios at most one, so
//! they never overflow. The scaled Bessel sequence comes from Miller's
//! backward recurrence normalised by `exp(-x) I0(x)`, and the sum is
//! accumulated inside the recurrence so no buffer is needed.

use super::bessel::i0e_unchecked;
use crate::error::{domain, Result};

// Series terms are dropped once they fall this many nats below the first.
const TAIL_NATS: f64 = 40.0;
// Extra decay between the last kept term and the recurrence start.
const MILLER_NATS: f64 = 25.0;
const RESCALE: f64 = 1e250;

// Continuum approximation of -ln(I_k(x) / I_0(x)), uniform in k and x.
fn log_decay(k: f64, x: f64) -> f64 {
    let u = k / x;
    x * (u * u.asinh() - (1.0 + u * u).sqrt() + 1.0)
}

// Smallest integer k with `decay(k) >= target`, for increasing `decay`.
fn first_index_reaching(target: f64, decay: impl Fn(f64) -> f64) -> usize {
    let mut hi = 8usize;
    while decay(hi as f64) < target {
        hi *= 2;
    }
    let mut lo = hi / 2;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if decay(mid as f64) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

// Returns (sum_{k>=0} r^k Ie_k(x), sum_{k>=1} r^k Ie_k(x)) for 0 <= r <= 1.
fn scaled_neumann_sums(x: f64, r: f64) -> (f64, f64) {
    let i0e = i0e_unchecked(x);
    if x < 1e-20 {
        let s1 = r * 0.5 * x;
        return (i0e + s1, s1);
    }
    let ln_r = r.ln();
    let kmax = first_index_reaching(TAIL_NATS, |k| log_decay(k, x) - k * ln_r) + 4;
    let floor = log_decay(kmax as f64, x) + MILLER_NATS;
    let start = first_index_reaching(floor, |k| log_decay(k, x)).max(kmax + 10);

    let mut acc = 0.0;
    let mut v_next = 0.0;
    let mut v = 1.0;
    for k in (1..=start).rev() {
        acc = acc * r + v;
        let v_prev = v_next + (2.0 * k as f64 / x) * v;
        v_next = v;
        v = v_prev;
        if v > RESCALE || acc > RESCALE {
            v /= RESCALE;
            v_next /= RESCALE;
            acc /= RESCALE;
        }
    }
    let s1 = acc * r * (i0e / v);
    (i0e + s1, s1)
}

/// Returns `(Q1(a, b), 1 - Q1(a, b))`, each computed without cancellation
/// on its own side of `a = b`. Arguments must be nonnegative and finite.
pub(crate) fn marcum_q1_pair(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        return (1.0, 0.0);
    }
    if a == 0.0 {
        let h = -0.5 * b * b;
        return (h.exp(), -h.exp_m1());
    }
    let gap = 0.5 * (b - a) * (b - a);
    if b > a {
        if gap > 745.0 {
            return (0.0, 1.0);
        }
        let (s0, _) = scaled_neumann_sums(a * b, a / b);
        let q = ((-gap).exp() * s0).clamp(0.0, 1.0);
        (q, 1.0 - q)
    } else {
        if gap > 745.0 {
            return (1.0, 0.0);
        }
        let (_, s1) = scaled_neumann_sums(a * b, b / a);
        let p = ((-gap).exp() * s1).clamp(0.0, 1.0);
        (1.0 - p, p)
    }
}

fn check_args(alpha: f64, beta: f64) -> Result<()> {
    if !(alpha.is_finite() && beta.is_finite()) {
        return Err(domain(format!(
            "marcum_q1 needs finite arguments, got ({alpha}, {beta})"
        )));
    }
    if alpha < 0.0 || beta < 0.0 {
        return Err(domain(format!(
            "marcum_q1 needs nonnegative arguments, got ({alpha}, {beta})"
        )));
    }
    Ok(())
}

/// First-order Marcum Q-function `Q1(alpha, beta)`: the probability that a
/// Rician amplitude with noncentrality `alpha` and unit diffuse scale
/// exceeds `beta`.
pub fn marcum_q1(alpha: f64, beta: f64) -> Result<f64> {
    check_args(alpha, beta)?;
    Ok(marcum_q1_pair(alpha, beta).0)
}

/// `1 - Q1(alpha, beta)`, accurate when `Q1` is close to one.
pub fn marcum_q1_complement(alpha: f64, beta: f64) -> Result<f64> {
    check_args(alpha, beta)?;
    Ok(marcum_q1_pair(alpha, beta).1)
}
