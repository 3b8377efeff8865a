//! Biased and bias-corrected distance covariance and correlation through the
//! dense matrix path.

use crate::distance::{
    double_center, pairwise_matrix, u_center, CenteredMatrix, MetricSpec, SampleMatrix,
    UCenteredMatrix,
};
use crate::error::{invalid, Result};

/// A distance covariance together with the two distance variances and the
/// resulting correlation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DcorValue {
    pub dcov: f64,
    pub dcor: f64,
    pub variance_x: f64,
    pub variance_y: f64,
    pub biased: bool,
    /// Set when the correlation was forced to 0: fewer than 4 observations
    /// (bias-corrected only) or a non-positive variance product.
    pub degenerate: bool,
}

impl DcorValue {
    pub(crate) fn from_parts(dcov: f64, variance_x: f64, variance_y: f64, biased: bool) -> Self {
        let denom = variance_x * variance_y;
        let (dcor, degenerate) = if denom > 0.0 && denom.is_finite() {
            let r = dcov / denom.sqrt();
            let r = if biased { r.clamp(0.0, 1.0) } else { r.clamp(-1.0, 1.0) };
            (r, false)
        } else {
            (0.0, true)
        };
        DcorValue {
            dcov,
            dcor,
            variance_x,
            variance_y,
            biased,
            degenerate,
        }
    }

    pub(crate) fn small_sample() -> Self {
        DcorValue {
            dcov: 0.0,
            dcor: 0.0,
            variance_x: 0.0,
            variance_y: 0.0,
            biased: false,
            degenerate: true,
        }
    }
}

pub(crate) fn check_paired(x: &SampleMatrix, y: &SampleMatrix) -> Result<()> {
    if x.n() != y.n() {
        return Err(invalid(format!(
            "sample sizes differ: {} vs {}",
            x.n(),
            y.n()
        )));
    }
    Ok(())
}

/// `tr(Cx·Cy) / (n(n−3))`, evaluated as an elementwise product sum.
pub fn dcov_unbiased(cx: &UCenteredMatrix, cy: &UCenteredMatrix) -> Result<f64> {
    cx.inner(cy)
}

pub(crate) fn u_centered(x: &SampleMatrix, metric: &MetricSpec) -> Result<UCenteredMatrix> {
    u_center(&pairwise_matrix(x, metric)?)
}

/// Bias-corrected distance correlation; both samples use `metric`.
pub fn dcor_unbiased(x: &SampleMatrix, y: &SampleMatrix, metric: &MetricSpec) -> Result<DcorValue> {
    dcor_unbiased_with(x, y, metric, metric)
}

/// Bias-corrected distance correlation with a separate metric per sample.
pub fn dcor_unbiased_with(
    x: &SampleMatrix,
    y: &SampleMatrix,
    x_metric: &MetricSpec,
    y_metric: &MetricSpec,
) -> Result<DcorValue> {
    check_paired(x, y)?;
    x_metric.validate()?;
    y_metric.validate()?;
    if x.n() < 4 {
        return Ok(DcorValue::small_sample());
    }
    let cx = u_centered(x, x_metric)?;
    let cy = u_centered(y, y_metric)?;
    from_u_centered(&cx, &cy)
}

pub(crate) fn from_u_centered(cx: &UCenteredMatrix, cy: &UCenteredMatrix) -> Result<DcorValue> {
    let dcov = cx.inner(cy)?;
    let vx = cx.inner(cx)?;
    let vy = cy.inner(cy)?;
    Ok(DcorValue::from_parts(dcov, vx, vy, false))
}

/// `tr(A·B) / n²` for double-centered `A`, `B`.
pub fn dcov_biased(a: &CenteredMatrix, b: &CenteredMatrix) -> Result<f64> {
    if a.n() != b.n() {
        return Err(invalid(format!("dimension mismatch: {} vs {}", a.n(), b.n())));
    }
    let n = a.n() as f64;
    let s: f64 = a
        .entries()
        .iter()
        .zip(b.entries())
        .map(|(p, q)| p * q)
        .sum();
    Ok(s / (n * n))
}

/// The original (biased) distance correlation, in `[0, 1]`.
pub fn dcor_biased(x: &SampleMatrix, y: &SampleMatrix, metric: &MetricSpec) -> Result<DcorValue> {
    check_paired(x, y)?;
    let a = double_center(&pairwise_matrix(x, metric)?);
    let b = double_center(&pairwise_matrix(y, metric)?);
    let dcov = dcov_biased(&a, &b)?;
    let vx = dcov_biased(&a, &a)?;
    let vy = dcov_biased(&b, &b)?;
    Ok(DcorValue::from_parts(dcov, vx, vy, true))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{normal_matrix, normal_vec, shuffled};
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn col(v: &[f64]) -> SampleMatrix {
        SampleMatrix::from_column(v).unwrap()
    }

    #[test]
    fn zero_matrices_have_zero_dcov() {
        let c = u_centered(&col(&[1.0; 6]), &MetricSpec::EUCLIDEAN).unwrap();
        assert_eq!(dcov_unbiased(&c, &c).unwrap(), 0.0);
    }

    #[test]
    fn dcov_matches_trace_product() {
        let c = u_centered(&col(&[0.0, 1.0, 2.0, 3.0]), &MetricSpec::EUCLIDEAN).unwrap();
        let m = DMatrix::from_row_slice(4, 4, c.entries());
        let expect = (&m * &m).trace() / (4.0 * 1.0);
        assert!((dcov_unbiased(&c, &c).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn self_correlation_is_one() {
        let x = normal_matrix(30, 3, 4);
        let v = dcor_unbiased(&x, &x, &MetricSpec::EUCLIDEAN).unwrap();
        assert!((v.dcor - 1.0).abs() < 1e-12);
        let g = MetricSpec::gaussian(None).unwrap();
        assert!((dcor_unbiased(&x, &x, &g).unwrap().dcor - 1.0).abs() < 1e-12);
        assert!((dcor_biased(&x, &x, &MetricSpec::EUCLIDEAN).unwrap().dcor - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_sample_gives_zero() {
        let x = col(&[2.0; 10]);
        let y = col(&normal_vec(10, 1));
        let v = dcor_unbiased(&x, &y, &MetricSpec::EUCLIDEAN).unwrap();
        assert_eq!(v.dcor, 0.0);
        assert!(v.degenerate);
        let b = dcor_biased(&x, &y, &MetricSpec::EUCLIDEAN).unwrap();
        assert_eq!(b.dcor, 0.0);
    }

    #[test]
    fn three_observations_give_zero() {
        let v = dcor_unbiased(&col(&[0.0, 1.0, 5.0]), &col(&[1.0, 2.0, 2.5]), &MetricSpec::EUCLIDEAN)
            .unwrap();
        assert_eq!(v.dcor, 0.0);
        assert!(v.degenerate);
    }

    #[test]
    fn unequal_sizes_rejected() {
        assert!(dcor_unbiased(&col(&[0.0; 5]), &col(&[0.0; 6]), &MetricSpec::EUCLIDEAN).is_err());
        assert!(dcor_biased(&col(&[0.0; 5]), &col(&[0.0; 6]), &MetricSpec::EUCLIDEAN).is_err());
    }

    fn hdh(x: &SampleMatrix) -> DMatrix<f64> {
        let n = x.n();
        let d = DMatrix::from_fn(n, n, |i, j| {
            x.row(i)
                .iter()
                .zip(x.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt()
        });
        let h = DMatrix::<f64>::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
        &h * d * &h
    }

    #[test]
    fn biased_matches_matrix_oracle() {
        let x = normal_matrix(25, 2, 9);
        let y = normal_matrix(25, 3, 10);
        let (a, b) = (hdh(&x), hdh(&y));
        let n2 = 625.0;
        let cov = (&a * &b).trace() / n2;
        let expect = cov / ((&a * &a).trace() / n2 * (&b * &b).trace() / n2).sqrt();
        let got = dcor_biased(&x, &y, &MetricSpec::EUCLIDEAN).unwrap();
        assert!((got.dcov - cov).abs() < 1e-10);
        assert!((got.dcor - expect).abs() < 1e-10);
    }

    #[test]
    fn biased_is_positive_under_independence() {
        let mut total = 0.0;
        for s in 0..50 {
            let x = col(&normal_vec(100, 2 * s));
            let y = col(&normal_vec(100, 2 * s + 1));
            let v = dcor_biased(&x, &y, &MetricSpec::EUCLIDEAN).unwrap();
            assert!(v.dcor > 0.0);
            total += v.dcor;
        }
        assert!(total > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn affine_invariance(seed in any::<u64>(), a in 0.1f64..10.0, b in -5.0f64..5.0,
                             c in -10.0f64..-0.1, e in -5.0f64..5.0) {
            let xv = normal_vec(40, seed);
            let yv: Vec<f64> = normal_vec(40, seed ^ 1).iter().zip(&xv).map(|(n, x)| x * x + n).collect();
            let base = dcor_unbiased(&col(&xv), &col(&yv), &MetricSpec::EUCLIDEAN).unwrap().dcor;
            let xs: Vec<f64> = xv.iter().map(|v| a * v + b).collect();
            let ys: Vec<f64> = yv.iter().map(|v| c * v + e).collect();
            let moved = dcor_unbiased(&col(&xs), &col(&ys), &MetricSpec::EUCLIDEAN).unwrap().dcor;
            prop_assert!((base - moved).abs() < 1e-9);
        }

        #[test]
        fn joint_permutation_invariance(seed in any::<u64>(), n in 4usize..40) {
            let x = normal_matrix(n, 2, seed);
            let y = normal_matrix(n, 1, seed ^ 7);
            let order = shuffled(n, seed);
            let a = dcor_unbiased(&x, &y, &MetricSpec::EUCLIDEAN).unwrap().dcor;
            let b = dcor_unbiased(&x.select_rows(&order), &y.select_rows(&order), &MetricSpec::EUCLIDEAN)
                .unwrap()
                .dcor;
            prop_assert!((a - b).abs() < 1e-12);
        }

        #[test]
        fn unbiased_in_unit_interval(seed in any::<u64>(), n in 4usize..30) {
            let v = dcor_unbiased(&normal_matrix(n, 2, seed), &normal_matrix(n, 2, !seed), &MetricSpec::EUCLIDEAN)
                .unwrap();
            prop_assert!((-1.0..=1.0).contains(&v.dcor));
        }
    }
}
