//! Reference null distributions.
//!
//! `U = χ²₁ − 1` (the centered chi-square), its standardized `m`-degree
//! generalization `(χ²_m − m)/√m`, and `N(0, 2)`. All three have mean 0 and
//! variance 2. Tails are evaluated through the upper regularized incomplete
//! gamma function rather than `1 − cdf`, so small p-values keep their
//! relative accuracy.

use libm::erfc;
use statrs::function::erf::erf_inv;
use statrs::function::gamma::{gamma_lr, gamma_ur};

/// Survival function of `(χ²_m − m)/√m`.
pub fn centered_chisq_sf(x: f64, m: u32) -> f64 {
    let m = f64::from(m.max(1));
    let t = m.sqrt() * x + m;
    if t <= 0.0 {
        return 1.0;
    }
    if t.is_infinite() {
        return 0.0;
    }
    gamma_ur(0.5 * m, 0.5 * t)
}

/// Cumulative distribution function of `(χ²_m − m)/√m`; 0 left of the
/// support at `−√m`.
pub fn centered_chisq_cdf(x: f64, m: u32) -> f64 {
    let mf = f64::from(m.max(1));
    let t = mf.sqrt() * x + mf;
    if t <= 0.0 {
        return 0.0;
    }
    if t.is_infinite() {
        return 1.0;
    }
    gamma_lr(0.5 * mf, 0.5 * t)
}

/// Survival function of `N(0, 2)`.
pub fn normal2_sf(x: f64) -> f64 {
    0.5 * erfc(x / 2.0)
}

pub fn normal2_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / 2.0)
}

/// Quantile of `N(0, 2)`.
pub fn normal2_quantile(p: f64) -> f64 {
    2.0 * erf_inv(2.0 * p - 1.0)
}

/// Quantile of `(χ²_m − m)/√m` by bisection on the survival function.
pub fn centered_chisq_quantile(p: f64, m: u32) -> f64 {
    assert!((0.0..1.0).contains(&p), "probability must lie in [0, 1)");
    let target = 1.0 - p;
    let mut lo = -f64::from(m.max(1)).sqrt();
    let mut hi = 1.0;
    while centered_chisq_sf(hi, m) > target {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if centered_chisq_sf(mid, m) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.abs().max(1.0) {
            break;
        }
    }
    0.5 * (lo + hi)
}
