//! Deterministic random streams.
//!
//! Every Monte Carlo replicate draws from its own ChaCha stream keyed by
//! `(seed, index)`, so results do not depend on how replicates are scheduled
//! across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The generator for replicate `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A child seed for replicate `index`, for APIs that take a plain seed.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    stream(seed, index).next_u64()
}

/// Uniformly random permutation of `0..n`.
pub fn permutation<R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order
}
