use rayon::prelude::*;

use super::{chisq_result, ttest_result, Method, TestResult};
use crate::dcor::{check_paired, from_u_centered, u_centered, DcorValue};
use crate::distance::{MetricSpec, SampleMatrix, UCenteredMatrix};
use crate::error::{invalid, Result};
use crate::rng;

/// Monte Carlo settings for a permutation test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PermutationOptions {
    pub reps: usize,
    pub seed: u64,
    /// Report `(count + 1)/(reps + 1)` instead of `count/reps`.
    pub add_one: bool,
}

impl PermutationOptions {
    pub const DEFAULT_REPS: usize = 500;

    pub fn new(reps: usize, seed: u64) -> Self {
        PermutationOptions {
            reps,
            seed,
            add_one: false,
        }
    }

    pub fn with_add_one(mut self, add_one: bool) -> Self {
        self.add_one = add_one;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(invalid("permutation test needs at least one replicate"));
        }
        Ok(())
    }

    fn pvalue(&self, exceed: usize) -> f64 {
        if self.add_one {
            (exceed + 1) as f64 / (self.reps + 1) as f64
        } else {
            exceed as f64 / self.reps as f64
        }
    }
}

impl Default for PermutationOptions {
    fn default() -> Self {
        Self::new(Self::DEFAULT_REPS, 0)
    }
}

/// Which quantity the permutation test compares. Both give the same p-value
/// because the variances do not change under permutation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PermutationStatistic {
    #[default]
    Dcor,
    Dcov,
}

/// Row order used by replicate `index`; row `i` of the permuted `X` is row
/// `order[i]` of the original.
fn replicate_order(n: usize, seed: u64, index: usize) -> Vec<usize> {
    rng::permutation(n, &mut rng::stream(seed, index as u64))
}

/// Permutation test with an arbitrary statistic.
///
/// Replicate `s` permutes the rows of `X` and evaluates `stat(X(π_s), Y)`;
/// the p-value is the fraction of replicates strictly exceeding the
/// observed statistic.
pub fn permutation_test<F>(
    x: &SampleMatrix,
    y: &SampleMatrix,
    stat: F,
    options: PermutationOptions,
) -> Result<TestResult>
where
    F: Fn(&SampleMatrix, &SampleMatrix) -> Result<f64> + Sync,
{
    options.validate()?;
    check_paired(x, y)?;
    let observed = stat(x, y)?;
    let n = x.n();
    let permuted: Vec<f64> = (0..options.reps)
        .into_par_iter()
        .map(|s| stat(&x.select_rows(&replicate_order(n, options.seed, s)), y))
        .collect::<Result<_>>()?;
    let exceed = permuted.iter().filter(|&&v| v > observed).count();
    Ok(TestResult {
        statistic: observed,
        pvalue: options.pvalue(exceed),
        n,
        method: Method::Permutation,
        reps: Some(options.reps),
        seed: Some(options.seed),
        degenerate: false,
    })
}

/// U-centered matrices of a paired sample, computed once and shared by the
/// chi-square, t and permutation tests.
///
/// Permuting observations commutes with U-centering, so a permuted
/// covariance is a gather over the stored matrices with no recomputation.
#[derive(Debug, Clone)]
pub struct PrecomputedDcor {
    cx: UCenteredMatrix,
    cy: UCenteredMatrix,
    value: DcorValue,
}

impl PrecomputedDcor {
    pub fn new(x: &SampleMatrix, y: &SampleMatrix, metric: &MetricSpec) -> Result<Self> {
        Self::new_with(x, y, metric, metric)
    }

    pub fn new_with(
        x: &SampleMatrix,
        y: &SampleMatrix,
        x_metric: &MetricSpec,
        y_metric: &MetricSpec,
    ) -> Result<Self> {
        check_paired(x, y)?;
        let cx = u_centered(x, x_metric)?;
        let cy = u_centered(y, y_metric)?;
        let value = from_u_centered(&cx, &cy)?;
        Ok(PrecomputedDcor { cx, cy, value })
    }

    pub fn n(&self) -> usize {
        self.cx.n()
    }

    pub fn value(&self) -> DcorValue {
        self.value
    }

    /// Covariance after reordering the rows of `X` by `order`.
    pub fn permuted_dcov(&self, order: &[usize]) -> f64 {
        let n = self.n();
        let (cx, cy) = (self.cx.entries(), self.cy.entries());
        let mut total = 0.0;
        for i in 0..n {
            let xrow = &cx[order[i] * n..(order[i] + 1) * n];
            let yrow = &cy[i * n..(i + 1) * n];
            let mut s = 0.0;
            for j in (i + 1)..n {
                s += xrow[order[j]] * yrow[j];
            }
            total += s;
        }
        2.0 * total / (n as f64 * (n as f64 - 3.0))
    }

    pub fn chisq(&self) -> TestResult {
        chisq_result(self.value, self.n())
    }

    pub fn ttest(&self) -> Result<TestResult> {
        ttest_result(self.value, self.n())
    }

    /// Permutation p-value. With a zero distance variance every permuted
    /// statistic ties the observed 0, and the result is reported as
    /// degenerate with p = 1.
    pub fn permutation(
        &self,
        statistic: PermutationStatistic,
        options: PermutationOptions,
    ) -> Result<TestResult> {
        options.validate()?;
        let n = self.n();
        let v = self.value;
        let observed = match statistic {
            PermutationStatistic::Dcor => v.dcor,
            PermutationStatistic::Dcov => v.dcov,
        };
        let mut result = TestResult {
            statistic: observed,
            pvalue: 1.0,
            n,
            method: Method::Permutation,
            reps: Some(options.reps),
            seed: Some(options.seed),
            degenerate: v.degenerate,
        };
        if v.degenerate {
            return Ok(result);
        }
        let exceed = (0..options.reps)
            .into_par_iter()
            .filter(|&s| {
                let dcov = self.permuted_dcov(&replicate_order(n, options.seed, s));
                let permuted = match statistic {
                    PermutationStatistic::Dcor => {
                        DcorValue::from_parts(dcov, v.variance_x, v.variance_y, false).dcor
                    }
                    PermutationStatistic::Dcov => dcov,
                };
                permuted > observed
            })
            .count();
        result.pvalue = options.pvalue(exceed);
        Ok(result)
    }
}

/// Permutation test of the bias-corrected distance correlation (or
/// covariance).
pub fn dcor_permutation_test(
    x: &SampleMatrix,
    y: &SampleMatrix,
    metric: &MetricSpec,
    statistic: PermutationStatistic,
    options: PermutationOptions,
) -> Result<TestResult> {
    options.validate()?;
    check_paired(x, y)?;
    if x.n() < 4 {
        return Ok(TestResult {
            statistic: 0.0,
            pvalue: 1.0,
            n: x.n(),
            method: Method::Permutation,
            reps: Some(options.reps),
            seed: Some(options.seed),
            degenerate: true,
        });
    }
    PrecomputedDcor::new(x, y, metric)?.permutation(statistic, options)
}
