//! Permutation test for independence.
//!
//! Replicate `r` permutes the rows of Y. Because the centering matrix
//! commutes with permutation conjugation, the permuted statistic is computed
//! from the already-centered matrices as
//! `(1/n^2) sum_ij D~_ij R~_{pi(i) pi(j)}`, without re-centering.
//!
//! Randomness: replicate `r` draws from ChaCha8 seeded with `seed` on stream
//! `r`, so the null distribution is identical regardless of thread count or
//! scheduling. Permutations are uniform Fisher-Yates shuffles.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dcov::{permuted_inner, CenteredPair};
use crate::error::{Error, Result};

pub const DEFAULT_PERMUTATIONS: usize = 999;

#[derive(Debug, Clone, Serialize)]
pub struct PermutationResult {
    pub observed: f64,
    pub null_stats: Vec<f64>,
    pub p_value: f64,
    pub num_permutations: usize,
    pub seed: u64,
}

/// Random generator for permutation replicate `replicate`.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

pub fn random_permutation(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

/// Add-one p-value `(1 + #{null >= observed}) / (B + 1)`.
pub fn add_one_p_value(observed: f64, null_stats: &[f64]) -> f64 {
    let exceed = null_stats.iter().filter(|&&s| s >= observed).count();
    (1 + exceed) as f64 / (null_stats.len() + 1) as f64
}

pub fn permutation_test(cp: &CenteredPair, permutations: usize, seed: u64) -> Result<PermutationResult> {
    if permutations == 0 {
        return Err(Error::Config("number of permutations must be at least 1".into()));
    }
    let n = cp.n();
    let n2 = (n * n) as f64;
    let null_stats: Vec<f64> = (0..permutations as u64)
        .into_par_iter()
        .map(|r| {
            let perm = random_permutation(n, &mut replicate_rng(seed, r));
            permuted_inner(&cp.d_tilde, &cp.r_tilde, Some(&perm), false) / n2
        })
        .collect();
    let observed = cp.v_hat;
    Ok(PermutationResult {
        observed,
        p_value: add_one_p_value(observed, &null_stats),
        null_stats,
        num_permutations: permutations,
        seed,
    })
}
