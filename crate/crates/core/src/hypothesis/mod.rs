//! Independence tests built on the bias-corrected distance correlation.
//!
//! * [`chisq_test`]: p-value `1 − F_U(n·C)` with `U = χ²₁ − 1`, constant time
//!   once the statistic is known.
//! * [`permutation_test`] / [`dcor_permutation_test`]: the Monte Carlo
//!   benchmark.
//! * [`ttest`]: the `N(0, 2)` tail of `√(n²−3n−2)·C`.
//! * [`ksample_test`] and [`pdcor_test`]: the K-sample and partial variants,
//!   both reusing the chi-square p-value.

mod ksample;
mod partial;
mod permutation;

pub use ksample::{ksample_encode, ksample_permutation_test, ksample_test};
pub use partial::{pdcor, pdcor_test};
pub use permutation::{
    dcor_permutation_test, permutation_test, PermutationOptions, PermutationStatistic,
    PrecomputedDcor,
};

use crate::dcor::{dcor_unbiased, DcorValue};
use crate::dist::{centered_chisq_sf, normal2_sf};
use crate::distance::{MetricSpec, SampleMatrix};
use crate::error::{invalid, Error, Result};
use crate::fast::fast_dcor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    ChiSquare,
    Permutation,
    TTest,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ChiSquare => "chisq",
            Method::Permutation => "perm",
            Method::TTest => "ttest",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "chisq" => Ok(Method::ChiSquare),
            "perm" | "permutation" => Ok(Method::Permutation),
            "ttest" => Ok(Method::TTest),
            other => Err(invalid(format!("unknown method `{other}`"))),
        }
    }
}

/// Outcome of one test. `reps` and `seed` are only set for permutation tests.
#[derive(Debug, Clone, PartialEq)]
pub struct TestResult {
    pub statistic: f64,
    pub pvalue: f64,
    pub n: usize,
    pub method: Method,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub degenerate: bool,
}

impl TestResult {
    /// Reject independence iff `p < α`.
    pub fn rejects(&self, alpha: AlphaLevel) -> bool {
        self.pvalue < alpha.value()
    }
}

/// A type 1 error level in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AlphaLevel(f64);

impl AlphaLevel {
    /// Largest level at which the chi-square test is guaranteed valid.
    pub const GUARANTEED_VALID: f64 = 0.05;

    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(AlphaLevel(value))
        } else {
            Err(invalid(format!("alpha must lie in (0, 1), got {value}")))
        }
    }

    pub fn value(&self) -> f64 {
        self.0
    }

    /// Whether the chi-square test is valid at this level for every
    /// metric and marginal distribution.
    pub fn chisq_guaranteed_valid(&self) -> bool {
        self.0 <= Self::GUARANTEED_VALID
    }
}

impl Default for AlphaLevel {
    fn default() -> Self {
        AlphaLevel(0.05)
    }
}

/// `1 − F_{χ²₁−1}(n·C)`; 1 left of the support.
pub fn chisq_pvalue(statistic: f64, n: usize) -> Result<f64> {
    if !statistic.is_finite() {
        return Err(invalid(format!("statistic must be finite, got {statistic}")));
    }
    if n == 0 {
        return Err(invalid("sample size must be positive"));
    }
    Ok(centered_chisq_sf(n as f64 * statistic, 1))
}

/// One-sided `N(0, 2)` tail at `√(n²−3n−2)·C`.
pub fn ttest_pvalue(statistic: f64, n: usize) -> Result<f64> {
    if !statistic.is_finite() {
        return Err(invalid(format!("statistic must be finite, got {statistic}")));
    }
    if n < 4 {
        return Err(Error::SmallSample { n, min: 4 });
    }
    let nf = n as f64;
    Ok(normal2_sf((nf * nf - 3.0 * nf - 2.0).sqrt() * statistic))
}

fn statistic(x: &SampleMatrix, y: &SampleMatrix, metric: &MetricSpec, use_fast: bool) -> Result<DcorValue> {
    if use_fast {
        if !metric.is_euclidean() {
            return Err(Error::UnsupportedPath(
                "the fast path only supports the euclidean metric".into(),
            ));
        }
        crate::dcor::check_paired(x, y)?;
        fast_dcor(x, y)
    } else {
        dcor_unbiased(x, y, metric)
    }
}

/// The chi-square independence test. `use_fast` selects the O(n log n)
/// path, which requires one-dimensional Euclidean data.
pub fn chisq_test(
    x: &SampleMatrix,
    y: &SampleMatrix,
    metric: &MetricSpec,
    use_fast: bool,
) -> Result<TestResult> {
    let v = statistic(x, y, metric, use_fast)?;
    Ok(chisq_result(v, x.n()))
}

pub(crate) fn chisq_result(v: DcorValue, n: usize) -> TestResult {
    TestResult {
        statistic: v.dcor,
        pvalue: centered_chisq_sf(n as f64 * v.dcor, 1),
        n,
        method: Method::ChiSquare,
        reps: None,
        seed: None,
        degenerate: v.degenerate,
    }
}

/// The distance correlation t-test.
pub fn ttest(x: &SampleMatrix, y: &SampleMatrix, metric: &MetricSpec) -> Result<TestResult> {
    if x.n() < 4 {
        return Err(Error::SmallSample { n: x.n(), min: 4 });
    }
    let v = dcor_unbiased(x, y, metric)?;
    ttest_result(v, x.n())
}

pub(crate) fn ttest_result(v: DcorValue, n: usize) -> Result<TestResult> {
    Ok(TestResult {
        statistic: v.dcor,
        pvalue: ttest_pvalue(v.dcor, n)?,
        n,
        method: Method::TTest,
        reps: None,
        seed: None,
        degenerate: v.degenerate,
    })
}
