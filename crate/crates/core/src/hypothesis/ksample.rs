use super::permutation::{PermutationOptions, PermutationStatistic, PrecomputedDcor};
use super::{chisq_result, TestResult};
use crate::dcor::dcor_unbiased_with;
use crate::distance::{MetricSpec, SampleMatrix};
use crate::error::{invalid, Result};

/// Stacks the groups into one sample `X` and builds the one-hot label
/// matrix `Y` (row `i` has a 1 in the column of its group).
pub fn ksample_encode(groups: &[SampleMatrix]) -> Result<(SampleMatrix, SampleMatrix)> {
    let k = groups.len();
    if k < 2 {
        return Err(invalid(format!("K-sample test needs at least two groups, got {k}")));
    }
    let d = groups[0].d();
    if let Some((i, g)) = groups.iter().enumerate().find(|(_, g)| g.d() != d) {
        return Err(invalid(format!(
            "group {i} has dimension {}, expected {d}",
            g.d()
        )));
    }
    let n: usize = groups.iter().map(SampleMatrix::n).sum();
    let mut xs = Vec::with_capacity(n * d);
    let mut labels = vec![0.0; n * k];
    let mut row = 0;
    for (g, group) in groups.iter().enumerate() {
        xs.extend_from_slice(group.values());
        for _ in 0..group.n() {
            labels[row * k + g] = 1.0;
            row += 1;
        }
    }
    Ok((SampleMatrix::new(n, d, xs)?, SampleMatrix::new(n, k, labels)?))
}

/// Chi-square K-sample test. `metric` applies to the data; the labels always
/// use the Euclidean distance.
pub fn ksample_test(groups: &[SampleMatrix], metric: &MetricSpec) -> Result<TestResult> {
    let (x, y) = ksample_encode(groups)?;
    let v = dcor_unbiased_with(&x, &y, metric, &MetricSpec::EUCLIDEAN)?;
    Ok(chisq_result(v, x.n()))
}

/// Permutation counterpart of [`ksample_test`] on the same encoding.
pub fn ksample_permutation_test(
    groups: &[SampleMatrix],
    metric: &MetricSpec,
    options: PermutationOptions,
) -> Result<TestResult> {
    let (x, y) = ksample_encode(groups)?;
    PrecomputedDcor::new_with(&x, &y, metric, &MetricSpec::EUCLIDEAN)?
        .permutation(PermutationStatistic::Dcor, options)
}
