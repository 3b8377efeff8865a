//! O(n log n) distance covariance for one-dimensional Euclidean data.
//!
//! With `A_ij = |x_i − x_j|`, `B_ij = |y_i − y_j|` the bias-corrected
//! covariance only needs three aggregates:
//!
//! ```text
//! T1 = Σ A_ij B_ij     T2 = Σ A_i· B_i·     T3 = A_·· B_··
//! dcov = T1/(n(n−3)) − 2 T2/(n(n−2)(n−3)) + T3/(n(n−1)(n−2)(n−3))
//! ```
//!
//! Row sums `A_i·` come from prefix sums over the sorted sample. For `T1`,
//! order the pairs by `x`; then
//! `Σ_{i<j} A_ij B_ij = Σ_{i<j} (x_j−x_i)(y_j−y_i) − 2 Σ_{discordant} (x_j−x_i)(y_j−y_i)`.
//! The first sum is `n Σxy − Σx Σy`. The discordant pairs are the inversions
//! of `y` in `x` order, collected during a merge sort on `y` that carries
//! suffix aggregates (count, Σx, Σy, Σxy) of the left run.
//!
//! Values are shifted by a central sample element first. Distances are
//! unchanged, magnitudes stay small, and integer data stay integer, so
//! heavily tied integer samples reproduce the brute-force sums exactly.

use crate::dcor::DcorValue;
use crate::distance::SampleMatrix;
use crate::error::{invalid, Error, Result};

/// The three aggregates behind the fast covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleSums {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
}

impl TripleSums {
    /// Bias-corrected covariance for a sample of size `n` (0 when `n < 4`).
    pub fn dcov(&self, n: usize) -> f64 {
        if n < 4 {
            return 0.0;
        }
        let n = n as f64;
        let a = n * (n - 3.0);
        let b = a * (n - 2.0);
        let c = b * (n - 1.0);
        self.t1 / a - 2.0 * self.t2 / b + self.t3 / c
    }
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::default();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Per-variable quantities shared by the cross and self covariances.
struct Marginal {
    /// Sample shifted by its middle order statistic, original order.
    shifted: Vec<f64>,
    /// Ascending order of the sample.
    order: Vec<usize>,
    row_sums: Vec<f64>,
    total: f64,
}

impl Marginal {
    fn new(v: &[f64]) -> Self {
        let n = v.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_unstable_by(|&a, &b| v[a].total_cmp(&v[b]));
        let center = v[order[n / 2]];
        let shifted: Vec<f64> = v.iter().map(|x| x - center).collect();

        let total_sum = shifted.iter().copied().collect::<CompensatedSum>().value();
        let mut below = CompensatedSum::default();
        let mut row_sums = vec![0.0; n];
        for (rank, &idx) in order.iter().enumerate() {
            let xk = shifted[idx];
            let lo = below.value();
            let hi = total_sum - lo - xk;
            let k = rank as f64;
            let m = (n - rank - 1) as f64;
            row_sums[idx] = (xk * k - lo) + (hi - xk * m);
            below.add(xk);
        }
        let total = row_sums.iter().copied().collect::<CompensatedSum>().value();
        Marginal {
            shifted,
            order,
            row_sums,
            total,
        }
    }

    /// `Σ_{i<j} (x_i − x_j)²`, i.e. the all-pairs cross term with itself.
    fn self_cross(&self) -> f64 {
        cross_moment(&self.shifted, &self.shifted)
    }
}

/// `n Σ x_i y_i − Σ x_i Σ y_i`, which equals `Σ_{i<j} (x_j − x_i)(y_j − y_i)`.
fn cross_moment(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sxy = x.iter().zip(y).map(|(a, b)| a * b).collect::<CompensatedSum>();
    let sx = x.iter().copied().collect::<CompensatedSum>().value();
    let sy = y.iter().copied().collect::<CompensatedSum>().value();
    let mut acc = CompensatedSum::default();
    acc.add(n * sxy.sum);
    acc.add(n * sxy.comp);
    acc.add(-(sx * sy));
    acc.value()
}

/// Sum of `(x_j − x_i)(y_j − y_i)` over pairs that are ordered by `x` but
/// strictly inverted in `y`. Input pairs must already be sorted by `x`.
fn discordant_sum(mut run: Vec<(f64, f64)>) -> f64 {
    let n = run.len();
    let mut buf = run.clone();
    let mut suf_x = vec![0.0; n];
    let mut suf_y = vec![0.0; n];
    let mut suf_xy = vec![0.0; n];
    let mut acc = CompensatedSum::default();

    // `run` holds (y, x) so the merge compares on the first field.
    let mut width = 1;
    while width < n {
        let mut lo = 0;
        while lo < n {
            let mid = (lo + width).min(n);
            let hi = (lo + 2 * width).min(n);
            if mid == hi {
                buf[lo..hi].copy_from_slice(&run[lo..hi]);
                lo = hi;
                continue;
            }
            let (mut sx, mut sy, mut sxy) = (0.0, 0.0, 0.0);
            for k in (lo..mid).rev() {
                let (y, x) = run[k];
                sx += x;
                sy += y;
                sxy += x * y;
                suf_x[k] = sx;
                suf_y[k] = sy;
                suf_xy[k] = sxy;
            }
            let (mut li, mut ri, mut out) = (lo, mid, lo);
            while li < mid && ri < hi {
                if run[li].0 <= run[ri].0 {
                    buf[out] = run[li];
                    li += 1;
                } else {
                    let (yr, xr) = run[ri];
                    let count = (mid - li) as f64;
                    acc.add(count * xr * yr - xr * suf_y[li] - yr * suf_x[li] + suf_xy[li]);
                    buf[out] = run[ri];
                    ri += 1;
                }
                out += 1;
            }
            let rest = if li < mid { &run[li..mid] } else { &run[ri..hi] };
            buf[out..hi].copy_from_slice(rest);
            lo = hi;
        }
        std::mem::swap(&mut run, &mut buf);
        width *= 2;
    }
    acc.value()
}

fn validate(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(invalid(format!(
            "sample sizes differ: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.is_empty() {
        return Err(invalid("empty sample"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(invalid("non-finite sample value"));
    }
    Ok(())
}

fn cross_sums(mx: &Marginal, my: &Marginal) -> TripleSums {
    let pairs: Vec<(f64, f64)> = mx
        .order
        .iter()
        .map(|&i| (my.shifted[i], mx.shifted[i]))
        .collect();
    let concordant_all = cross_moment(&mx.shifted, &my.shifted);
    let discordant = discordant_sum(pairs);
    let t2 = mx
        .row_sums
        .iter()
        .zip(&my.row_sums)
        .map(|(a, b)| a * b)
        .collect::<CompensatedSum>()
        .value();
    TripleSums {
        t1: 2.0 * (concordant_all - 2.0 * discordant),
        t2,
        t3: mx.total * my.total,
    }
}

fn self_sums(m: &Marginal) -> TripleSums {
    TripleSums {
        t1: 2.0 * m.self_cross(),
        t2: m.row_sums.iter().map(|a| a * a).collect::<CompensatedSum>().value(),
        t3: m.total * m.total,
    }
}

/// `T1`, `T2`, `T3` for paired one-dimensional samples in O(n log n).
pub fn triple_sums_1d(x: &[f64], y: &[f64]) -> Result<TripleSums> {
    validate(x, y)?;
    Ok(cross_sums(&Marginal::new(x), &Marginal::new(y)))
}

/// Bias-corrected distance covariance of 1D samples; 0 when `n < 4`.
pub fn fast_dcov_1d(x: &[f64], y: &[f64]) -> Result<f64> {
    validate(x, y)?;
    if x.len() < 4 {
        return Ok(0.0);
    }
    Ok(triple_sums_1d(x, y)?.dcov(x.len()))
}

/// Bias-corrected distance correlation of 1D samples in O(n log n).
pub fn fast_dcor_1d(x: &[f64], y: &[f64]) -> Result<DcorValue> {
    validate(x, y)?;
    let n = x.len();
    if n < 4 {
        return Ok(DcorValue::small_sample());
    }
    let mx = Marginal::new(x);
    let my = Marginal::new(y);
    let dcov = cross_sums(&mx, &my).dcov(n);
    let vx = self_sums(&mx).dcov(n);
    let vy = self_sums(&my).dcov(n);
    Ok(DcorValue::from_parts(dcov, vx, vy, false))
}

/// [`fast_dcor_1d`] on single-column sample matrices.
pub fn fast_dcor(x: &SampleMatrix, y: &SampleMatrix) -> Result<DcorValue> {
    if x.d() != 1 || y.d() != 1 {
        return Err(Error::UnsupportedPath(format!(
            "fast path needs one-dimensional samples, got d = {} and {}",
            x.d(),
            y.d()
        )));
    }
    fast_dcor_1d(x.values(), y.values())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dcor::dcor_unbiased;
    use crate::distance::MetricSpec;
    use crate::testutil::normal_vec;
    use proptest::prelude::*;

    /// Direct O(n²) evaluation of the three sums.
    fn brute(x: &[f64], y: &[f64]) -> TripleSums {
        let n = x.len();
        let (mut t1, mut ra, mut rb) = (0.0, vec![0.0; n], vec![0.0; n]);
        for i in 0..n {
            for j in 0..n {
                let a = (x[i] - x[j]).abs();
                let b = (y[i] - y[j]).abs();
                t1 += a * b;
                ra[i] += a;
                rb[i] += b;
            }
        }
        let t2 = ra.iter().zip(&rb).map(|(a, b)| a * b).sum();
        let t3 = ra.iter().sum::<f64>() * rb.iter().sum::<f64>();
        TripleSums { t1, t2, t3 }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
    }

    fn matrix_dcor(x: &[f64], y: &[f64]) -> DcorValue {
        dcor_unbiased(
            &SampleMatrix::from_column(x).unwrap(),
            &SampleMatrix::from_column(y).unwrap(),
            &MetricSpec::EUCLIDEAN,
        )
        .unwrap()
    }

    #[test]
    fn two_point_example() {
        let t = triple_sums_1d(&[0.0, 1.0], &[0.0, 1.0]).unwrap();
        assert_eq!(t, TripleSums { t1: 2.0, t2: 2.0, t3: 4.0 });
    }

    #[test]
    fn matches_brute_force() {
        let x = normal_vec(500, 1);
        let y: Vec<f64> = normal_vec(500, 2).iter().zip(&x).map(|(e, v)| v.sin() + 0.3 * e).collect();
        let (f, b) = (triple_sums_1d(&x, &y).unwrap(), brute(&x, &y));
        assert!(rel(f.t1, b.t1) < 1e-9, "{f:?} vs {b:?}");
        assert!(rel(f.t2, b.t2) < 1e-9);
        assert!(rel(f.t3, b.t3) < 1e-9);
    }

    #[test]
    fn constant_x_gives_zero_sums() {
        let t = triple_sums_1d(&[3.0; 20], &normal_vec(20, 4)).unwrap();
        assert_eq!(t, TripleSums { t1: 0.0, t2: 0.0, t3: 0.0 });
        assert_eq!(fast_dcor_1d(&[3.0; 20], &normal_vec(20, 4)).unwrap().dcor, 0.0);
    }

    #[test]
    fn agrees_with_matrix_path() {
        let x = normal_vec(200, 5);
        let y: Vec<f64> = normal_vec(200, 6).iter().zip(&x).map(|(e, v)| v * v + e).collect();
        let m = matrix_dcor(&x, &y);
        let f = fast_dcor_1d(&x, &y).unwrap();
        assert!(rel(fast_dcov_1d(&x, &y).unwrap(), m.dcov) < 1e-10);
        assert!((f.dcor - m.dcor).abs() < 1e-10);
    }

    #[test]
    fn self_correlation_and_dependence() {
        let x = normal_vec(1000, 7);
        assert!((fast_dcor_1d(&x, &x).unwrap().dcor - 1.0).abs() < 1e-10);
        let y: Vec<f64> = normal_vec(1000, 8).iter().zip(&x).map(|(e, v)| 2.0 * v + e).collect();
        assert!(fast_dcor_1d(&x, &y).unwrap().dcor > 0.0);
    }

    #[test]
    fn small_and_invalid_inputs() {
        assert_eq!(fast_dcov_1d(&[0.0, 1.0, 2.0], &[2.0, 1.0, 0.5]).unwrap(), 0.0);
        assert!(fast_dcor_1d(&[0.0, 1.0, 2.0], &[2.0, 1.0, 0.5]).unwrap().degenerate);
        assert!(triple_sums_1d(&[0.0, 1.0], &[0.0]).is_err());
        assert!(triple_sums_1d(&[0.0, f64::INFINITY], &[0.0, 1.0]).is_err());
        let x = SampleMatrix::new(4, 2, vec![0.0; 8]).unwrap();
        let y = SampleMatrix::from_column(&[0.0; 4]).unwrap();
        assert!(matches!(fast_dcor(&x, &y), Err(Error::UnsupportedPath(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn tied_integers_are_exact(
            pairs in proptest::collection::vec((-6i32..6, -4i32..4), 1..300)
        ) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0 as f64).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1 as f64).collect();
            prop_assert_eq!(triple_sums_1d(&x, &y).unwrap(), brute(&x, &y));
        }

        #[test]
        fn path_equivalence(n in 4usize..2000, seed in any::<u64>(), ties in any::<bool>()) {
            let mut x = normal_vec(n, seed);
            let mut y: Vec<f64> = normal_vec(n, !seed).iter().zip(&x).map(|(e, v)| v.abs() + e).collect();
            if ties {
                x.iter_mut().for_each(|v| *v = (*v * 2.0).round());
                y.iter_mut().for_each(|v| *v = v.round());
            }
            let f = fast_dcor_1d(&x, &y).unwrap();
            let m = matrix_dcor(&x, &y);
            prop_assert!((f.dcor - m.dcor).abs() <= 1e-9, "n={} fast={} matrix={}", n, f.dcor, m.dcor);
        }
    }
}
