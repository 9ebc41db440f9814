//! Additive decomposition of the sample statistic into weighted squared
//! correlations of spectral features:
//!
//! ```text
//! V = (4 / n^2) * sum_i sum_j lambda_i * sigma_j * corr(phi_i, psi_j)^2
//! ```
//!
//! `lambda, phi` come from the centered X matrix and `sigma, psi` from the
//! centered Y matrix. Features are unit-norm and zero-mean, so the inner
//! product `phi_i . psi_j` is exactly their sample Pearson correlation.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dcov::CenteredPair;
use crate::error::Result;
use crate::metrics::MatrixKind;
use crate::numeric::compensated_sum;
use crate::spectral::{centered_spectrum, EigenSystem};

#[derive(Debug, Clone)]
pub struct AdcDecomposition {
    pub x_system: EigenSystem,
    pub y_system: EigenSystem,
    /// `corr[(i, j)] = phi_i . psi_j`; zero when either feature is degenerate.
    pub corr: DMatrix<f64>,
    /// `lambda_i * sigma_j * corr[(i, j)]^2`.
    pub contributions: DMatrix<f64>,
    pub v_hat_reconstructed: f64,
    pub v_hat_direct: f64,
}

impl AdcDecomposition {
    pub fn n(&self) -> usize {
        self.corr.nrows()
    }

    /// `sum_ij lambda_i sigma_j corr^2`, without the `4 / n^2` factor.
    pub fn total_contribution(&self) -> f64 {
        compensated_sum(self.contributions.iter().copied())
    }

    /// Tolerance scale used for the reconstruction identity:
    /// `max(v_direct, (4/n^2) * sum(lambda) * sum(sigma) / n)`.
    pub fn identity_scale(&self) -> f64 {
        let n = self.n() as f64;
        let floor = 4.0 / (n * n) * self.x_system.eigenvalue_sum() * self.y_system.eigenvalue_sum() / n;
        self.v_hat_direct.max(floor)
    }

    pub fn identity_residual(&self) -> f64 {
        (self.v_hat_reconstructed - self.v_hat_direct).abs()
    }
}

/// Serializable view of a decomposition: all eigenvalues, the leading
/// `features_x` / `features_y` feature vectors, and the leading block of the
/// correlation and contribution matrices (row `i` is `phi_{i+1}`).
#[derive(Debug, Clone, Serialize)]
pub struct AdcSummary {
    pub n: usize,
    pub v_hat_direct: f64,
    pub v_hat_reconstructed: f64,
    pub identity_residual: f64,
    pub lambda: Vec<f64>,
    pub sigma: Vec<f64>,
    pub features_x: usize,
    pub features_y: usize,
    pub phi: Vec<Vec<f64>>,
    pub psi: Vec<Vec<f64>>,
    pub corr: Vec<Vec<f64>>,
    pub contributions: Vec<Vec<f64>>,
}

impl AdcDecomposition {
    pub fn summary(&self, features_x: usize, features_y: usize) -> AdcSummary {
        let (fx, fy) = (features_x.min(self.n()), features_y.min(self.n()));
        let block = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..fx).map(|i| (0..fy).map(|j| m[(i, j)]).collect()).collect()
        };
        AdcSummary {
            n: self.n(),
            v_hat_direct: self.v_hat_direct,
            v_hat_reconstructed: self.v_hat_reconstructed,
            identity_residual: self.identity_residual(),
            lambda: self.x_system.eigenvalues.clone(),
            sigma: self.y_system.eigenvalues.clone(),
            features_x: fx,
            features_y: fy,
            phi: (0..fx).map(|i| self.x_system.feature(i)).collect(),
            psi: (0..fy).map(|j| self.y_system.feature(j)).collect(),
            corr: block(&self.corr),
            contributions: block(&self.contributions),
        }
    }
}

/// Decomposes both centered matrices and assembles the correlation and
/// contribution matrices.
pub fn adc_decompose(cp: &CenteredPair) -> Result<AdcDecomposition> {
    // d_tilde / r_tilde are distance-scale for both kernel and distance inputs
    let x_system = centered_spectrum(&cp.d_tilde, MatrixKind::Distance)?;
    let y_system = centered_spectrum(&cp.r_tilde, MatrixKind::Distance)?;
    Ok(assemble(x_system, y_system, cp.v_hat))
}

pub(crate) fn assemble(x_system: EigenSystem, y_system: EigenSystem, v_hat_direct: f64) -> AdcDecomposition {
    let n = x_system.len();
    let mut corr = x_system.eigenvectors.transpose() * &y_system.eigenvectors;
    let mut contributions = DMatrix::zeros(n, n);
    for j in 0..n {
        let sigma = y_system.eigenvalues[j];
        for i in 0..n {
            let lambda = x_system.eigenvalues[i];
            if x_system.is_degenerate(i) || y_system.is_degenerate(j) {
                corr[(i, j)] = 0.0;
                continue;
            }
            let c = corr[(i, j)];
            contributions[(i, j)] = lambda * sigma * c * c;
        }
    }
    let total = compensated_sum(contributions.iter().copied());
    let v_hat_reconstructed = 4.0 * total / (n * n) as f64;
    AdcDecomposition { x_system, y_system, corr, contributions, v_hat_reconstructed, v_hat_direct }
}

/// One `(phi_i, psi_j)` pair; `i` and `j` are 1-based feature numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedPair {
    pub i: usize,
    pub j: usize,
    pub contribution: f64,
    pub corr_sq: f64,
    pub lambda: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ContributionRanking {
    pub pairs: Vec<RankedPair>,
    pub cumulative_share: Vec<f64>,
    /// Set when every contribution is zero; shares are then all zero.
    pub degenerate_total: bool,
}

impl ContributionRanking {
    /// Share of the total not covered by the top `k` pairs.
    pub fn remaining_after(&self, k: usize) -> f64 {
        if k == 0 {
            return if self.degenerate_total { 0.0 } else { 1.0 };
        }
        1.0 - self.cumulative_share[k.min(self.cumulative_share.len()) - 1]
    }
}

/// Orders all `n^2` pairs by contribution, largest first; ties go to the
/// lexicographically smaller `(i, j)`.
pub fn rank_contributions(adc: &AdcDecomposition) -> ContributionRanking {
    let (rows, cols) = adc.contributions.shape();
    let mut pairs = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let c = adc.corr[(i, j)];
            pairs.push(RankedPair {
                i: i + 1,
                j: j + 1,
                contribution: adc.contributions[(i, j)],
                corr_sq: c * c,
                lambda: adc.x_system.eigenvalues[i],
                sigma: adc.y_system.eigenvalues[j],
            });
        }
    }
    pairs.sort_by(|a, b| {
        b.contribution.total_cmp(&a.contribution).then(a.i.cmp(&b.i)).then(a.j.cmp(&b.j))
    });
    cumulative(pairs)
}

fn cumulative(pairs: Vec<RankedPair>) -> ContributionRanking {
    let total = compensated_sum(pairs.iter().map(|p| p.contribution));
    if total <= 0.0 {
        let len = pairs.len();
        return ContributionRanking { pairs, cumulative_share: vec![0.0; len], degenerate_total: true };
    }
    let mut acc = crate::numeric::CompensatedSum::new();
    let mut cumulative_share: Vec<f64> = pairs
        .iter()
        .map(|p| {
            acc.add(p.contribution);
            (acc.value() / total).min(1.0)
        })
        .collect();
    // guard against a last value of 1 - ulp
    if let Some(last) = cumulative_share.last_mut() {
        *last = 1.0;
    }
    ContributionRanking { pairs, cumulative_share, degenerate_total: false }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightShare {
    /// 1-based feature number.
    pub index: usize,
    pub eigenvalue: f64,
    pub share: f64,
}

/// Each eigenvalue's share of the eigenvalue sum, in feature order.
pub fn weight_profile(sys: &EigenSystem) -> Vec<WeightShare> {
    weight_profile_of(&sys.eigenvalues)
}

pub fn weight_profile_of(eigenvalues: &[f64]) -> Vec<WeightShare> {
    let total = compensated_sum(eigenvalues.iter().copied());
    eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &eigenvalue)| WeightShare {
            index: k + 1,
            eigenvalue,
            share: if total > 0.0 { eigenvalue / total } else { 0.0 },
        })
        .collect()
}
