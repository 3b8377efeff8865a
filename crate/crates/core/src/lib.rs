//! Bias-corrected distance correlation and fast independence tests.
//!
//! The central statistic is the bias-corrected distance correlation `C`,
//! built from U-centered distance (or Gaussian kernel) matrices. Under
//! independence, `n·C` is dominated in the upper tail by `χ²₁ − 1`, which
//! gives a test that needs no permutations:
//!
//! ```
//! use dcor_chisq::distance::{MetricSpec, SampleMatrix};
//! use dcor_chisq::hypothesis::chisq_test;
//!
//! let x: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
//! let y: Vec<f64> = x.iter().map(|v| v * v).collect();
//! let x = SampleMatrix::from_column(&x)?;
//! let y = SampleMatrix::from_column(&y)?;
//!
//! let result = chisq_test(&x, &y, &MetricSpec::EUCLIDEAN, false)?;
//! assert!(result.pvalue < 0.05);
//! # Ok::<(), dcor_chisq::Error>(())
//! ```
//!
//! Modules:
//!
//! * [`distance`]: sample matrices, metrics and both centering schemes.
//! * [`dcor`]: biased and bias-corrected covariance and correlation.
//! * [`fast`]: the `O(n log n)` path for one-dimensional Euclidean data.
//! * [`hypothesis`]: chi-square, permutation, t, K-sample and partial tests.
//! * [`spectrum`]: the limiting null law and tail dominance.
//! * [`simulation`]: synthetic scenarios and power estimates.

pub mod dcor;
pub mod dist;
pub mod distance;
pub mod error;
pub mod fast;
pub mod hypothesis;
pub mod rng;
pub mod simulation;
pub mod spectrum;

#[cfg(test)]
mod testutil;

pub use dcor::{dcor_biased, dcor_unbiased, DcorValue};
pub use distance::{MetricSpec, SampleMatrix};
pub use error::{Error, Result};
pub use hypothesis::{Method, TestResult};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/distance-correlation.md")]
    mod distance_correlation {}
    #[doc = include_str!("../../../book/src/tests.md")]
    mod tests {}
    #[doc = include_str!("../../../book/src/fast-path.md")]
    mod fast_path {}
    #[doc = include_str!("../../../book/src/ksample-partial.md")]
    mod ksample_partial {}
    #[doc = include_str!("../../../book/src/null-spectrum.md")]
    mod null_spectrum {}
    #[doc = include_str!("../../../book/src/simulations.md")]
    mod simulations {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
