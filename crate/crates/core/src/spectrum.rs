//! The limiting null distribution of `n·C` and its tail comparisons.
//!
//! Under independence, `n·C` converges to `Σ w_ij (z_ij² − 1)` with standard
//! normal `z_ij` and weights `w_ij ∝ |λ_i μ_j|` normalized to unit square
//! sum, where `λ` and `μ` are the eigenvalues of the double-centered
//! matrices divided by `n`. [`NullSpectrum`] holds those weights and
//! [`simulate_null`] samples from the resulting law.
//!
//! The second half of the module compares upper tails. Reference `V` is
//! dominated by `U = χ²₁ − 1` beyond `x` when `F_V(x′) ≥ F_U(x′)` for every
//! `x′ ≥ x`; [`tail_crossing`] and [`dominance_level`] locate that point.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

pub use crate::dist::centered_chisq_cdf;
use crate::dist::{centered_chisq_sf, normal2_sf};
use crate::distance::{double_center, pairwise_matrix, CenteredMatrix, MetricSpec, SampleMatrix};
use crate::error::{invalid, Error, Result};
use crate::rng;

/// Eigenvalues smaller than this fraction of the largest are set to 0.
pub const EIGEN_TRUNCATION: f64 = 1e-12;
/// Weights below this are dropped (and the rest renormalized) when sampling.
pub const WEIGHT_TRUNCATION: f64 = 1e-6;
const SIGN_TOLERANCE: f64 = 1e-9;

/// Eigenvalues of both marginals and the normalized weight grid.
///
/// `lambda` and `mu` are sorted by decreasing magnitude, with truncated
/// values stored as 0. The grid only spans the nonzero eigenvalues:
/// `weights` is `rank_x × rank_y`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSpectrum {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
    pub weights: Vec<f64>,
    pub degenerate: bool,
}

fn truncate_sorted(mut values: Vec<f64>) -> Result<Vec<f64>> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    values.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let cutoff = EIGEN_TRUNCATION * values.first().map_or(0.0, |v| v.abs());
    for v in &mut values {
        if v.abs() < cutoff || *v == 0.0 {
            *v = 0.0;
        }
    }
    Ok(values)
}

fn rank(values: &[f64]) -> usize {
    values.iter().take_while(|v| **v != 0.0).count()
}

impl NullSpectrum {
    /// Builds the weights from two eigenvalue lists.
    ///
    /// Products `λ_i μ_j` must not be negative beyond rounding; a genuine
    /// sign conflict is reported as a numerical error.
    pub fn from_eigenvalues(lambda: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        let lambda = truncate_sorted(lambda)?;
        let mu = truncate_sorted(mu)?;
        let (rx, ry) = (rank(&lambda), rank(&mu));
        if rx == 0 || ry == 0 {
            return Ok(NullSpectrum {
                lambda,
                mu,
                weights: Vec::new(),
                degenerate: true,
            });
        }
        let extremes = |v: &[f64]| {
            v.iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
        };
        let (lmin, lmax) = extremes(&lambda[..rx]);
        let (mmin, mmax) = extremes(&mu[..ry]);
        let worst = (lmin * mmax).min(lmax * mmin).min(lmin * mmin).min(lmax * mmax);
        let scale = lambda[0].abs() * mu[0].abs();
        if worst < -SIGN_TOLERANCE * scale {
            return Err(Error::Numerical(format!(
                "eigenvalue products change sign (min product {worst:e}, scale {scale:e})"
            )));
        }
        let lsq: f64 = lambda[..rx].iter().map(|v| v * v).sum();
        let msq: f64 = mu[..ry].iter().map(|v| v * v).sum();
        let norm = (lsq * msq).sqrt();
        let mut weights = Vec::with_capacity(rx * ry);
        for l in &lambda[..rx] {
            for m in &mu[..ry] {
                weights.push(((l * m).abs() / norm).min(1.0));
            }
        }
        Ok(NullSpectrum {
            lambda,
            mu,
            weights,
            degenerate: false,
        })
    }

    /// `m` equal weights `1/√m`; the law is then `(χ²_m − m)/√m`.
    pub fn equal_weights(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(invalid("need at least one weight"));
        }
        Self::from_eigenvalues(vec![1.0; m], vec![1.0])
    }

    pub fn rank_x(&self) -> usize {
        rank(&self.lambda)
    }

    pub fn rank_y(&self) -> usize {
        rank(&self.mu)
    }

    /// `w_ij`, zero outside the nonzero block.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (rx, ry) = (self.rank_x(), self.rank_y());
        if i < rx && j < ry {
            self.weights[i * ry + j]
        } else {
            0.0
        }
    }

    pub fn square_sum(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum()
    }

    /// Weights kept for sampling, renormalized to unit square sum.
    pub fn sampling_weights(&self) -> Vec<f64> {
        let mut kept: Vec<f64> = self
            .weights
            .iter()
            .copied()
            .filter(|&w| w >= WEIGHT_TRUNCATION)
            .collect();
        let norm = kept.iter().map(|w| w * w).sum::<f64>().sqrt();
        if norm > 0.0 {
            kept.iter_mut().for_each(|w| *w /= norm);
        }
        kept
    }
}

fn eigenvalues(c: &CenteredMatrix) -> Result<Vec<f64>> {
    let n = c.n();
    let m = DMatrix::from_row_slice(n, n, c.entries()) / n as f64;
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    Ok(eig.eigenvalues.iter().copied().collect())
}

/// Null spectrum of a paired sample: eigenvalues of `H·D·H/n` for both
/// marginals.
pub fn spectrum(x: &SampleMatrix, y: &SampleMatrix, metric: &MetricSpec) -> Result<NullSpectrum> {
    crate::dcor::check_paired(x, y)?;
    if x.n() < 4 {
        return Err(Error::SmallSample { n: x.n(), min: 4 });
    }
    let cx = double_center(&pairwise_matrix(x, metric)?);
    let cy = double_center(&pairwise_matrix(y, metric)?);
    NullSpectrum::from_eigenvalues(eigenvalues(&cx)?, eigenvalues(&cy)?)
}

/// Draws from a null law, kept in replicate order.
#[derive(Debug, Clone, PartialEq)]
pub struct NullSample {
    pub values: Vec<f64>,
    pub reps: usize,
    pub seed: u64,
}

impl NullSample {
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let ss: f64 = self.values.iter().map(|v| (v - m) * (v - m)).sum();
        ss / (self.values.len() as f64 - 1.0)
    }

    pub fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    /// Empirical quantile with linear interpolation between order
    /// statistics.
    pub fn quantile(&self, p: f64) -> f64 {
        quantile_sorted(&self.sorted(), p)
    }

    pub fn quantiles(&self, ps: &[f64]) -> Vec<f64> {
        let s = self.sorted();
        ps.iter().map(|&p| quantile_sorted(&s, p)).collect()
    }

    /// Fraction of values strictly above `x`.
    pub fn exceedance(&self, x: f64) -> f64 {
        self.values.iter().filter(|&&v| v > x).count() as f64 / self.values.len() as f64
    }

    /// Kolmogorov–Smirnov distance to a continuous CDF.
    pub fn ks_distance(&self, cdf: impl Fn(f64) -> f64) -> f64 {
        let s = self.sorted();
        let n = s.len() as f64;
        s.iter().enumerate().fold(0.0, |d: f64, (i, &x)| {
            let f = cdf(x);
            d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
    }
}

pub(crate) fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Samples `Σ w_ij (z_ij² − 1)`. Replicate `s` draws from stream `s` of
/// `seed`, so the output does not depend on the thread count.
pub fn simulate_null(spec: &NullSpectrum, reps: usize, seed: u64) -> Result<NullSample> {
    if spec.degenerate {
        return Err(Error::DegenerateData(
            "null spectrum has no nonzero eigenvalues".into(),
        ));
    }
    if reps == 0 {
        return Err(invalid("need at least one replicate"));
    }
    let weights = spec.sampling_weights();
    let values = (0..reps)
        .into_par_iter()
        .map(|s| {
            let mut r = rng::stream(seed, s as u64);
            weights
                .iter()
                .map(|w| {
                    let z: f64 = r.sample(StandardNormal);
                    w * (z * z - 1.0)
                })
                .sum()
        })
        .collect();
    Ok(NullSample { values, reps, seed })
}

/// Search interval and grid step for crossing points.
pub const CROSSING_RANGE: (f64, f64) = (-1.0, 50.0);
const CROSSING_STEP: f64 = 1e-3;

/// Smallest `x` in the search range such that `sf_v(x′) ≤ sf_u(x′)` for
/// every grid point `x′ ≥ x`, refined by bisection. Returns the lower end of
/// the range when `V` is dominated everywhere.
pub fn dominance_crossing(sf_v: impl Fn(f64) -> f64, sf_u: impl Fn(f64) -> f64) -> f64 {
    let (lo, hi) = CROSSING_RANGE;
    let steps = ((hi - lo) / CROSSING_STEP).round() as usize;
    let at = |k: usize| lo + k as f64 * CROSSING_STEP;
    let violates = |x: f64| sf_v(x) > sf_u(x);
    let last_bad = (0..=steps).rev().find(|&k| violates(at(k)));
    match last_bad {
        None => lo,
        Some(k) if k == steps => hi,
        Some(k) => {
            let (mut a, mut b) = (at(k), at(k + 1));
            for _ in 0..60 {
                let mid = 0.5 * (a + b);
                if violates(mid) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            b
        }
    }
}

/// Crossing point beyond which `(χ²_m − m)/√m` is dominated by `χ²₁ − 1`.
pub fn tail_crossing(m: u32) -> Result<f64> {
    if m < 2 {
        return Err(invalid(format!("degree must be at least 2, got {m}")));
    }
    Ok(dominance_crossing(
        |x| centered_chisq_sf(x, m),
        |x| centered_chisq_sf(x, 1),
    ))
}

/// Largest `α` such that `V` is dominated by `χ²₁ − 1` beyond the latter's
/// `1 − α` quantile, i.e. `P(χ²₁ − 1 > x*)` at the crossing point `x*`.
pub fn dominance_level(sf_v: impl Fn(f64) -> f64) -> f64 {
    let u = |x: f64| centered_chisq_sf(x, 1);
    u(dominance_crossing(sf_v, u))
}

/// [`dominance_level`] for `N(0, 2)`.
pub fn normal_dominance_level() -> f64 {
    dominance_level(normal2_sf)
}
