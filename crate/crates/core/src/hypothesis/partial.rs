use super::{Method, TestResult};
use crate::dcor::{check_paired, u_centered};
use crate::dist::centered_chisq_sf;
use crate::distance::{MetricSpec, SampleMatrix, UCenteredMatrix};
use crate::error::{Error, Result};

/// Removes the component of `a` along `c` under the U-centered inner
/// product. A zero `c` leaves `a` untouched.
fn project_out(a: &UCenteredMatrix, c: &UCenteredMatrix, cc: f64) -> Result<UCenteredMatrix> {
    if cc > 0.0 {
        Ok(a.minus_scaled(c, a.inner(c)? / cc))
    } else {
        Ok(a.clone())
    }
}

/// `(pdcor, degenerate)`.
fn pdcor_value(
    x: &SampleMatrix,
    y: &SampleMatrix,
    z: &SampleMatrix,
    metric: &MetricSpec,
) -> Result<(f64, bool)> {
    check_paired(x, y)?;
    check_paired(x, z)?;
    let n = x.n();
    if n < 4 {
        return Err(Error::SmallSample { n, min: 4 });
    }
    let a = u_centered(x, metric)?;
    let b = u_centered(y, metric)?;
    let c = u_centered(z, metric)?;
    let cc = c.inner(&c)?;
    let pa = project_out(&a, &c, cc)?;
    let pb = project_out(&b, &c, cc)?;
    let denom = pa.inner(&pa)? * pb.inner(&pb)?;
    if denom > 0.0 {
        Ok(((pa.inner(&pb)? / denom.sqrt()).clamp(-1.0, 1.0), false))
    } else {
        Ok((0.0, true))
    }
}

/// Partial distance correlation of `X` and `Y` given `Z`: the cosine of the
/// U-centered matrices of `X` and `Y` after projecting out that of `Z`.
pub fn pdcor(x: &SampleMatrix, y: &SampleMatrix, z: &SampleMatrix, metric: &MetricSpec) -> Result<f64> {
    pdcor_value(x, y, z, metric).map(|(v, _)| v)
}

/// Chi-square test of zero partial distance correlation.
pub fn pdcor_test(
    x: &SampleMatrix,
    y: &SampleMatrix,
    z: &SampleMatrix,
    metric: &MetricSpec,
) -> Result<TestResult> {
    let (statistic, degenerate) = pdcor_value(x, y, z, metric)?;
    let n = x.n();
    Ok(TestResult {
        statistic,
        pvalue: centered_chisq_sf(n as f64 * statistic, 1),
        n,
        method: Method::ChiSquare,
        reps: None,
        seed: None,
        degenerate,
    })
}
