//! Shared fixtures for unit tests.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::distance::{MetricSpec, PairwiseMatrix, SampleMatrix};
use crate::rng;

pub fn normal_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, 0);
    (0..n).map(|_| r.sample(StandardNormal)).collect()
}

pub fn normal_matrix(n: usize, d: usize, seed: u64) -> SampleMatrix {
    SampleMatrix::new(n, d, normal_vec(n * d, seed)).unwrap()
}

/// Random symmetric matrix with zero diagonal and positive off-diagonal.
pub fn random_symmetric(n: usize, seed: u64) -> PairwiseMatrix {
    let mut r = rng::stream(seed, 1);
    let mut e = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v: f64 = r.random_range(0.1..5.0);
            e[i * n + j] = v;
            e[j * n + i] = v;
        }
    }
    PairwiseMatrix::from_entries(n, e, MetricSpec::EUCLIDEAN).unwrap()
}

pub fn shuffled(n: usize, seed: u64) -> Vec<usize> {
    rng::permutation(n, &mut rng::stream(seed, 2))
}
