//! Sample matrices, pairwise distance/kernel matrices and the two centering
//! schemes used by the distance covariance family.
//!
//! All matrices are dense, row-major `f64`. Kernel matrices travel through
//! exactly the same centering pipeline as distance matrices.

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};

/// Row count above which the O(n²) kernels split work across threads.
pub(crate) const PARALLEL_ROWS: usize = 512;

/// An `n × d` observation matrix; rows are observations.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    values: Vec<f64>,
    n: usize,
    d: usize,
}

impl SampleMatrix {
    /// Builds a matrix from row-major `values`.
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("sample matrix has no observations"));
        }
        if d == 0 {
            return Err(invalid("sample matrix has no dimensions"));
        }
        if values.len() != n * d {
            return Err(invalid(format!(
                "expected {} values for a {n}x{d} matrix, got {}",
                n * d,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!(
                "non-finite entry at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(Self { values, n, d })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * d);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != d {
                return Err(invalid(format!(
                    "row {i} has {} columns, expected {d}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Self::new(rows.len(), d, values)
    }

    /// A single-column (d = 1) matrix.
    pub fn from_column(values: &[f64]) -> Result<Self> {
        Self::new(values.len(), 1, values.to_vec())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// New matrix whose row `i` is row `order[i]` of `self`.
    pub fn select_rows(&self, order: &[usize]) -> SampleMatrix {
        let mut values = Vec::with_capacity(order.len() * self.d);
        for &i in order {
            values.extend_from_slice(self.row(i));
        }
        SampleMatrix {
            values,
            n: order.len(),
            d: self.d,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MetricKind {
    Euclidean,
    GaussianKernel,
}

/// Which pairwise function to use. A Gaussian kernel without an explicit
/// bandwidth uses the median pairwise distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSpec {
    pub kind: MetricKind,
    pub bandwidth: Option<f64>,
}

impl MetricSpec {
    pub const EUCLIDEAN: MetricSpec = MetricSpec {
        kind: MetricKind::Euclidean,
        bandwidth: None,
    };

    pub fn euclidean() -> Self {
        Self::EUCLIDEAN
    }

    pub fn gaussian(bandwidth: Option<f64>) -> Result<Self> {
        let spec = MetricSpec {
            kind: MetricKind::GaussianKernel,
            bandwidth,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match (self.kind, self.bandwidth) {
            (MetricKind::Euclidean, Some(_)) => {
                Err(invalid("a bandwidth only applies to the gaussian kernel"))
            }
            (MetricKind::GaussianKernel, Some(bw)) if !(bw.is_finite() && bw > 0.0) => Err(
                invalid(format!("gaussian bandwidth must be positive, got {bw}")),
            ),
            _ => Ok(()),
        }
    }

    pub fn is_euclidean(&self) -> bool {
        self.kind == MetricKind::Euclidean
    }
}

impl Default for MetricSpec {
    fn default() -> Self {
        Self::EUCLIDEAN
    }
}

/// A symmetric `n × n` distance or kernel matrix.
///
/// The stored [`MetricSpec`] records the resolved bandwidth for Gaussian
/// kernels, so the median heuristic is visible after the fact.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    entries: Vec<f64>,
    n: usize,
    metric: MetricSpec,
}

impl PairwiseMatrix {
    /// Wraps a caller-supplied square matrix (e.g. precomputed distances).
    /// Only shape, finiteness and symmetry are checked.
    pub fn from_entries(n: usize, entries: Vec<f64>, metric: MetricSpec) -> Result<Self> {
        if n == 0 {
            return Err(invalid("pairwise matrix must have at least one row"));
        }
        if entries.len() != n * n {
            return Err(invalid(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(invalid("pairwise matrix has non-finite entries"));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (entries[i * n + j], entries[j * n + i]);
                if (a - b).abs() > 1e-12 * a.abs().max(b.abs()).max(1.0) {
                    return Err(invalid(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { entries, n, metric })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn metric(&self) -> MetricSpec {
        self.metric
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }
}

/// The bias-corrected (U-centered) matrix: zero diagonal, zero row and column
/// sums.
#[derive(Debug, Clone, PartialEq)]
pub struct UCenteredMatrix {
    entries: Vec<f64>,
    n: usize,
}

impl UCenteredMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// The U-centered inner product `Σ_{i≠j} P_ij Q_ij / (n(n−3))`.
    ///
    /// Rows are reduced independently and then summed in row order, so the
    /// result does not depend on the thread count.
    pub fn inner(&self, other: &UCenteredMatrix) -> Result<f64> {
        if self.n != other.n {
            return Err(invalid(format!(
                "dimension mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        let n = self.n;
        let row_dot = |(a, b): (&[f64], &[f64])| -> f64 {
            a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>()
        };
        let total: f64 = if n >= PARALLEL_ROWS {
            let rows: Vec<f64> = self
                .entries
                .par_chunks_exact(n)
                .zip(other.entries.par_chunks_exact(n))
                .map(row_dot)
                .collect();
            rows.iter().sum()
        } else {
            self.entries
                .chunks_exact(n)
                .zip(other.entries.chunks_exact(n))
                .map(row_dot)
                .sum()
        };
        Ok(total / (n as f64 * (n as f64 - 3.0)))
    }

    /// `self − coef·other`; stays U-centered since both operands are.
    pub(crate) fn minus_scaled(&self, other: &UCenteredMatrix, coef: f64) -> UCenteredMatrix {
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - coef * b)
            .collect();
        UCenteredMatrix { entries, n: self.n }
    }
}

/// `H·D·H` with `H = I − J/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenteredMatrix {
    entries: Vec<f64>,
    n: usize,
}

impl CenteredMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Reinterprets the centered matrix as a generic pairwise matrix.
    pub fn into_pairwise(self, metric: MetricSpec) -> PairwiseMatrix {
        PairwiseMatrix {
            entries: self.entries,
            n: self.n,
            metric,
        }
    }
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

fn fill_symmetric(x: &SampleMatrix, f: impl Fn(f64) -> f64 + Sync) -> Vec<f64> {
    let n = x.n();
    let row = |i: usize, out: &mut [f64]| {
        let xi = x.row(i);
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = f(squared_distance(xi, x.row(j)));
        }
    };
    let mut entries = vec![0.0; n * n];
    if n >= PARALLEL_ROWS {
        entries
            .par_chunks_exact_mut(n)
            .enumerate()
            .for_each(|(i, out)| row(i, out));
    } else {
        for (i, out) in entries.chunks_exact_mut(n).enumerate() {
            row(i, out);
        }
    }
    // Bitwise symmetry; the per-cell arithmetic already agrees but the
    // invariant is cheap to make exact.
    for i in 0..n {
        for j in (i + 1)..n {
            entries[j * n + i] = entries[i * n + j];
        }
    }
    entries
}

/// Pairwise Euclidean distances or Gaussian kernel values of the rows of `x`.
pub fn pairwise_matrix(x: &SampleMatrix, metric: &MetricSpec) -> Result<PairwiseMatrix> {
    metric.validate()?;
    match metric.kind {
        MetricKind::Euclidean => {
            let entries = fill_symmetric(x, f64::sqrt);
            Ok(PairwiseMatrix {
                entries,
                n: x.n(),
                metric: *metric,
            })
        }
        MetricKind::GaussianKernel => {
            let sigma = match metric.bandwidth {
                Some(bw) => bw,
                None => median_bandwidth(x)?,
            };
            let scale = 1.0 / (2.0 * sigma * sigma);
            let entries = fill_symmetric(x, |sq| (-sq * scale).exp());
            Ok(PairwiseMatrix {
                entries,
                n: x.n(),
                metric: MetricSpec {
                    kind: MetricKind::GaussianKernel,
                    bandwidth: Some(sigma),
                },
            })
        }
    }
}

/// Median of the `n(n−1)/2` off-diagonal Euclidean distances (duplicate
/// points contribute zeros).
pub fn median_bandwidth(x: &SampleMatrix) -> Result<f64> {
    let n = x.n();
    if n < 2 {
        return Err(Error::DegenerateData(
            "median bandwidth needs at least two observations".into(),
        ));
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            dists.push(squared_distance(x.row(i), x.row(j)).sqrt());
        }
    }
    let m = dists.len();
    let mid = m / 2;
    let (_, upper, _) = dists.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    let median = if m % 2 == 1 {
        upper
    } else {
        let lower = dists[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower + upper)
    };
    if median <= 0.0 {
        return Err(Error::DegenerateData(
            "median pairwise distance is zero; specify a bandwidth".into(),
        ));
    }
    Ok(median)
}

fn row_and_column_sums(entries: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; n];
    for (i, row) in entries.chunks_exact(n).enumerate() {
        for (j, &v) in row.iter().enumerate() {
            rows[i] += v;
            cols[j] += v;
        }
    }
    (rows, cols)
}

/// U-centering of a pairwise matrix.
///
/// Off-diagonal entries are
/// `D_ij − D_i·/(n−2) − D_·j/(n−2) + D_··/((n−1)(n−2))`; the diagonal is 0.
pub fn u_center(d: &PairwiseMatrix) -> Result<UCenteredMatrix> {
    let n = d.n();
    if n < 4 {
        return Err(Error::SmallSample { n, min: 4 });
    }
    let (rows, cols) = row_and_column_sums(&d.entries, n);
    let total: f64 = rows.iter().sum();
    let nf = n as f64;
    let inv = 1.0 / (nf - 2.0);
    let grand = total / ((nf - 1.0) * (nf - 2.0));

    let mut entries = vec![0.0; n * n];
    for (i, out) in entries.chunks_exact_mut(n).enumerate() {
        let src = &d.entries[i * n..(i + 1) * n];
        let ri = rows[i] * inv;
        for j in 0..n {
            if j != i {
                out[j] = src[j] - ri - cols[j] * inv + grand;
            }
        }
    }
    Ok(UCenteredMatrix { entries, n })
}

/// Classical double centering `H·D·H`.
pub fn double_center(d: &PairwiseMatrix) -> CenteredMatrix {
    let n = d.n();
    let (rows, cols) = row_and_column_sums(&d.entries, n);
    let nf = n as f64;
    let grand = rows.iter().sum::<f64>() / (nf * nf);
    let mut entries = d.entries.clone();
    for (i, out) in entries.chunks_exact_mut(n).enumerate() {
        let ri = rows[i] / nf;
        for (j, v) in out.iter_mut().enumerate() {
            *v += grand - ri - cols[j] / nf;
        }
    }
    CenteredMatrix { entries, n }
}
