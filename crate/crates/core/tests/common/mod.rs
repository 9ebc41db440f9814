//! Fixtures and reference computations shared by the integration tests.
//!
//! The reference routines here are deliberately naive (explicit centering
//! matrices, plain loops) so they share no code with the library.

#![allow(dead_code)]

use adcov::data::SampleSet;
use adcov::metrics::{MatrixKind, MetricSpec, PairwiseMatrix};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// The four metric configurations exercised throughout: Euclidean distance,
/// polynomial kernels with `(alpha, beta) = (0.5, 0.5)` and `(2, 0.5)`, and
/// the double-exponential kernel with `theta = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Config {
    Euclidean,
    PolyHalf,
    PolyTwo,
    DoubleExp,
}

pub const CONFIGS: [Config; 4] = [Config::Euclidean, Config::PolyHalf, Config::PolyTwo, Config::DoubleExp];

impl Config {
    pub fn spec(self) -> MetricSpec {
        match self {
            Config::Euclidean => MetricSpec::euclidean(),
            Config::PolyHalf => MetricSpec::polynomial(0.5, 0.5).unwrap(),
            Config::PolyTwo => MetricSpec::polynomial(2.0, 0.5).unwrap(),
            Config::DoubleExp => MetricSpec::double_exponential(1.0).unwrap(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Config::Euclidean => "euclidean",
            Config::PolyHalf => "poly(0.5,0.5)",
            Config::PolyTwo => "poly(2,0.5)",
            Config::DoubleExp => "dexp(1)",
        }
    }

    /// Kernel written out by hand. For Euclidean distance this is the
    /// distance-induced kernel `(|a| + |b| - |a - b|) / 2`, which generates
    /// the Euclidean distance exactly.
    pub fn kernel(self, a: &[f64], b: &[f64]) -> f64 {
        let sq = |v: &[f64], w: &[f64]| v.iter().zip(w).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
        let zero = vec![0.0; a.len()];
        match self {
            Config::Euclidean => 0.5 * (sq(a, &zero).sqrt() + sq(b, &zero).sqrt() - sq(a, b).sqrt()),
            Config::PolyHalf => (0.5 + sq(a, b)).powf(-0.5),
            Config::PolyTwo => (0.5 + sq(a, b)).powf(-2.0),
            Config::DoubleExp => (-sq(a, b)).exp(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Fixture {
    pub x: SampleSet,
    pub y: SampleSet,
    pub config: Config,
}

pub fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect()).collect()
}

/// Random paired data: `n` in `2..=max_n`, dimensions from `{1, 2, 5}`,
/// dependent in half the cases, coarsely rounded (creating ties) in a few.
pub fn random_fixture(rng: &mut ChaCha8Rng, max_n: usize, config: Config) -> Fixture {
    let dims = [1usize, 2, 5];
    let n = rng.random_range(2..=max_n);
    let p = dims[rng.random_range(0..3)];
    let q = dims[rng.random_range(0..3)];
    let xs = gaussian_rows(rng, n, p);
    let dependent = rng.random::<bool>();
    let mut ys: Vec<Vec<f64>> = gaussian_rows(rng, n, q);
    if dependent {
        for (x, y) in xs.iter().zip(ys.iter_mut()) {
            let s: f64 = x.iter().sum();
            for (k, v) in y.iter_mut().enumerate() {
                *v = 0.3 * *v + (s * (k + 1) as f64).sin();
            }
        }
    }
    let round = rng.random_range(0..10) == 0;
    let tidy = |rows: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        if round {
            rows.into_iter().map(|r| r.into_iter().map(|v| (v * 2.0).round() / 2.0).collect()).collect()
        } else {
            rows
        }
    };
    Fixture {
        x: SampleSet::from_rows(&tidy(xs), "x", "X").unwrap(),
        y: SampleSet::from_rows(&tidy(ys), "y", "Y").unwrap(),
        config,
    }
}

pub fn fixtures(seed: u64, count: usize, max_n: usize, configs: &[Config]) -> Vec<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|k| random_fixture(&mut rng, max_n, configs[k % configs.len()])).collect()
}

pub fn hand_kernel(s: &SampleSet, config: Config) -> DMatrix<f64> {
    let rows = s.rows();
    let n = rows.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = config.kernel(&rows[i], &rows[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

pub fn kernel_matrix(values: DMatrix<f64>) -> PairwiseMatrix {
    PairwiseMatrix::from_matrix(values, MatrixKind::Kernel, MetricSpec::precomputed(MatrixKind::Kernel)).unwrap()
}

pub fn centering(n: usize) -> DMatrix<f64> {
    DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64)
}

/// `(1/n^2) tr(K H L H)` with an explicit centering matrix.
pub fn naive_hsic(k: &DMatrix<f64>, l: &DMatrix<f64>) -> f64 {
    let n = k.nrows();
    let h = centering(n);
    (k * &h * l * &h).trace() / (n * n) as f64
}

/// Distance covariance from the definition: `a_ij - a_i. - a_.j + a_..`.
pub fn naive_dcov(d: &DMatrix<f64>, r: &DMatrix<f64>) -> f64 {
    let n = d.nrows();
    let center = |m: &DMatrix<f64>| {
        let row: Vec<f64> = (0..n).map(|i| m.row(i).sum() / n as f64).collect();
        let col: Vec<f64> = (0..n).map(|j| m.column(j).sum() / n as f64).collect();
        let all = m.sum() / (n * n) as f64;
        DMatrix::from_fn(n, n, |i, j| m[(i, j)] - row[i] - col[j] + all)
    };
    let (a, b) = (center(d), center(r));
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[(i, j)] * b[(i, j)];
        }
    }
    s / (n * n) as f64
}

pub fn generated_distance(k: &DMatrix<f64>) -> DMatrix<f64> {
    let n = k.nrows();
    DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { (k[(i, i)] + k[(j, j)] - 2.0 * k[(i, j)]).max(0.0) })
}

pub fn euclidean_distances(s: &SampleSet) -> DMatrix<f64> {
    let rows = s.rows();
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| {
        rows[i].iter().zip(&rows[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    })
}
