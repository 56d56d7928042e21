//! Quasi-Cauchy empirical Bayes for unit-variance Gaussian observations.
//!
//! Prior: `(1 - w) δ₀ + w γ`, where `γ` is the quasi-Cauchy density whose
//! convolution with N(0, 1) has the closed form `g(x) = φ(0)(1 - e^{-x²/2})/x²`.

use std::f64::consts::PI;

use libm::erfc;

/// Standard normal density.
pub fn dnorm(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Standard normal distribution function.
pub fn pnorm(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Upper tail `1 - Φ(x)` without cancellation.
pub fn pnorm_upper(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Marginal density of an observation whose mean is drawn from `γ`.
pub fn marginal(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // 1 - e^{-u}/... expanded: (1 - e^{-x²/2})/x² = 1/2 - x²/8 + x⁴/48
        let x2 = x * x;
        return dnorm(0.0) * (0.5 - x2 / 8.0 + x2 * x2 / 48.0);
    }
    dnorm(0.0) * (-(-0.5 * x * x).exp_m1()) / (x * x)
}

/// `g(x)/φ(x) - 1`, the score ingredient for the mixing weight.
///
/// Infinite once `e^{x²/2}` overflows.
pub fn beta(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        // (e^{u} - 1)/(2u) - 1 with u = x²/2
        let u = 0.5 * x * x;
        return -0.5 + u / 2.0 + u * u / 6.0;
    }
    (0.5 * x * x).exp_m1() / (x * x) - 1.0
}

/// Mixing weight whose posterior-median threshold is `t`.
pub fn weight_from_threshold(t: f64) -> f64 {
    let t = t.abs();
    let num = pnorm(t) - t * dnorm(t) - 0.5;
    let den = (PI / 2.0).sqrt() * dnorm(t) * t * t;
    let w = 1.0 / (1.0 + num / den);
    if w.is_finite() {
        w
    } else if t == 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Posterior-median threshold for mixing weight `w`: the largest `|x|` whose
/// posterior median is zero.
pub fn threshold_from_weight(w: f64) -> f64 {
    if w >= 1.0 {
        return 0.0;
    }
    // weight_from_threshold decreases from 1 at t = 0
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while weight_from_threshold(hi) > w && hi < 60.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if weight_from_threshold(mid) > w {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lower bound for the weight: the one matching the universal threshold.
pub fn minimum_weight(n: usize) -> f64 {
    let n = n.max(2) as f64;
    weight_from_threshold((2.0 * n.ln()).sqrt())
}

fn score(betas: &[f64], w: f64) -> f64 {
    betas.iter().map(|&b| if b.is_finite() { b / (1.0 + w * b) } else { 1.0 / w }).sum()
}

/// Marginal maximum-likelihood mixing weight, clamped to
/// `[minimum_weight(n), 1]`.
///
/// Returns `None` when the score cannot be evaluated (non-finite input).
pub fn estimate_weight(x: &[f64]) -> Option<f64> {
    if x.is_empty() || x.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let betas: Vec<f64> = x.iter().map(|&v| beta(v)).collect();
    let mut lo = minimum_weight(x.len());
    let mut hi = 1.0;
    if score(&betas, hi) >= 0.0 {
        return Some(1.0);
    }
    if score(&betas, lo) <= 0.0 {
        return Some(lo);
    }
    // The score is decreasing in w; bisect on the log scale.
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        let s = score(&betas, mid);
        if s == 0.0 {
            return Some(mid);
        }
        if s > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some((lo * hi).sqrt())
}

/// `P(μ ≤ u | z) - 1/2`, rescaled, for `z ≥ 0`. Increasing in `u`.
fn median_zero(u: f64, z: f64, w: f64) -> f64 {
    let hh = z - u;
    let dn = dnorm(hh);
    // Φ̃(u)/φ(u) is the Mills ratio; evaluate it directly to avoid 0/0.
    let mills = if u < 30.0 { pnorm_upper(u) / dnorm(u) } else { 1.0 / u - 1.0 / (u * u * u) };
    let left = pnorm(hh) - z * dn + (z * u - 1.0) * dn * mills;
    let right = 1.0 + (-0.5 * z * z).exp() * (z * z * (1.0 / w - 1.0) - 1.0);
    right / 2.0 - left
}

/// Posterior median of the mean given one observation `x ~ N(μ, 1)`.
pub fn posterior_median(x: f64, w: f64) -> f64 {
    let z = x.abs();
    if z == 0.0 || w <= 0.0 {
        return 0.0;
    }
    let est = if z >= 20.0 {
        z - 2.0 / z
    } else {
        if median_zero(0.0, z, w) >= 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0, z);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if median_zero(mid, z, w) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    if est < 1e-7 {
        0.0
    } else {
        est.copysign(x)
    }
}
