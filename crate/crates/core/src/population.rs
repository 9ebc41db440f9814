//! Exact population HSIC, distance covariance and feature decomposition for
//! distributions with finite support.
//!
//! Expectations are enumerated over all atom pairs, so the cost is
//! `O(m^2)` in the number of atoms; supports up to a couple of thousand
//! atoms are practical.
//!
//! For a distance `d` the marginal-centered kernel is
//! `k(x, x') = -1/2 [d(x, x') - E d(X, x') - E d(x, X') + E d(X, X')]`,
//! which generates `d` exactly and has zero mean under the marginal. Its
//! Mercer decomposition on a finite support is the eigendecomposition of
//! `sqrt(p_a p_b) k(u_a, u_b)` over the distinct support points `u_a`.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{PairedDataset, SampleSet};
use crate::error::{Error, Result};
use crate::metrics::{MatrixKind, MetricKind, MetricSpec, PairwiseMatrix};
use crate::numeric::{compensated_sum, CompensatedSum};
use crate::spectral::{deflated_eigen, finish, symmetrized, EigenSystem, DEFAULT_RANK_EPS};

/// One support atom: the value pair `(x, y)` with probability `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteJointDistribution {
    atoms: Vec<Atom>,
}

impl FiniteJointDistribution {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidDistribution(msg));
        let Some(first) = atoms.first() else {
            return invalid("no atoms".into());
        };
        let (p, q) = (first.x.len(), first.y.len());
        if p == 0 || q == 0 {
            return invalid("atoms need non-empty x and y".into());
        }
        for (t, a) in atoms.iter().enumerate() {
            if a.x.len() != p || a.y.len() != q {
                return invalid(format!("atom {t} has inconsistent dimensions"));
            }
            if !(a.p.is_finite() && a.p >= 0.0) {
                return invalid(format!("atom {t} has probability {}", a.p));
            }
            if a.x.iter().chain(&a.y).any(|v| !v.is_finite()) {
                return invalid(format!("atom {t} has a non-finite coordinate"));
            }
        }
        let total = compensated_sum(atoms.iter().map(|a| a.p));
        if (total - 1.0).abs() > 1e-12 {
            return invalid(format!("probabilities sum to {total}"));
        }
        Ok(Self { atoms })
    }

    /// Product of two marginals, atoms in `x`-major order.
    pub fn independent(x: &[(Vec<f64>, f64)], y: &[(Vec<f64>, f64)]) -> Result<Self> {
        let atoms = x
            .iter()
            .flat_map(|(xv, px)| y.iter().map(move |(yv, py)| Atom { x: xv.clone(), y: yv.clone(), p: px * py }))
            .collect();
        Self::new(atoms)
    }

    /// Uniform distribution over the rows of a dataset.
    pub fn empirical(ds: &PairedDataset) -> Result<Self> {
        let n = ds.n();
        let atoms = (0..n).map(|i| Atom { x: ds.x.row(i), y: ds.y.row(i), p: 1.0 / n as f64 }).collect();
        Self::new(atoms).or_else(|_| {
            // 1/n does not always sum to 1 within 1e-12 for large n; renormalise the last atom
            let mut atoms: Vec<Atom> =
                (0..n).map(|i| Atom { x: ds.x.row(i), y: ds.y.row(i), p: 1.0 / n as f64 }).collect();
            let rest = compensated_sum(atoms[..n - 1].iter().map(|a| a.p));
            atoms[n - 1].p = 1.0 - rest;
            Self::new(atoms)
        })
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let atoms: Vec<Atom> = serde_json::from_str(text)?;
        Self::new(atoms)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.atoms)?)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    fn probs(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.p).collect()
    }

    /// IID draws of `n` observations.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<PairedDataset> {
        let index = WeightedIndex::new(self.probs())
            .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        let draws: Vec<usize> = (0..n).map(|_| index.sample(rng)).collect();
        let xs: Vec<Vec<f64>> = draws.iter().map(|&t| self.atoms[t].x.clone()).collect();
        let ys: Vec<Vec<f64>> = draws.iter().map(|&t| self.atoms[t].y.clone()).collect();
        PairedDataset::new(SampleSet::from_rows(&xs, "x", "X")?, SampleSet::from_rows(&ys, "y", "Y")?)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    X,
    Y,
}

impl FiniteJointDistribution {
    fn point(&self, t: usize, side: Side) -> &[f64] {
        match side {
            Side::X => &self.atoms[t].x,
            Side::Y => &self.atoms[t].y,
        }
    }

    /// `m x m` matrix of the metric over the atoms of one side.
    fn atom_matrix(&self, side: Side, spec: &MetricSpec) -> Result<PairwiseMatrix> {
        spec.check()?;
        if matches!(spec.kind, MetricKind::PrecomputedDistance | MetricKind::PrecomputedKernel) {
            return Err(Error::InvalidParams {
                kind: spec.kind.name().into(),
                reason: "pass precomputed atom matrices explicitly".into(),
            });
        }
        let m = self.len();
        let mut values = DMatrix::from_fn(m, m, |s, t| {
            if s <= t { spec.eval(self.point(s, side), self.point(t, side)) } else { 0.0 }
        });
        for s in 0..m {
            for t in 0..s {
                values[(s, t)] = values[(t, s)];
            }
        }
        if spec.matrix_kind() == MatrixKind::Distance {
            values.fill_diagonal(0.0);
        }
        PairwiseMatrix::from_matrix(values, spec.matrix_kind(), spec.clone())
    }

    fn check_atom_matrix(&self, m: &PairwiseMatrix) -> Result<()> {
        if m.n() != self.len() {
            return Err(Error::DimensionMismatch(m.n(), self.len()));
        }
        Ok(())
    }
}

/// `E[a(X,X') b(Y,Y')] + E[a] E[b] - 2 E_{XY}[E_{X'} a(X,X') E_{Y'} b(Y,Y')]`.
fn three_term(a: &DMatrix<f64>, b: &DMatrix<f64>, p: &[f64]) -> f64 {
    let m = p.len();
    let mut joint = CompensatedSum::new();
    let mut a_mean = CompensatedSum::new();
    let mut b_mean = CompensatedSum::new();
    let mut cross = CompensatedSum::new();
    for s in 0..m {
        let mut a_row = CompensatedSum::new();
        let mut b_row = CompensatedSum::new();
        for t in 0..m {
            let w = p[s] * p[t];
            joint.add(w * a[(s, t)] * b[(s, t)]);
            a_mean.add(w * a[(s, t)]);
            b_mean.add(w * b[(s, t)]);
            a_row.add(p[t] * a[(s, t)]);
            b_row.add(p[t] * b[(s, t)]);
        }
        cross.add(p[s] * a_row.value() * b_row.value());
    }
    let mut total = CompensatedSum::new();
    total.add(joint.value());
    total.add(a_mean.value() * b_mean.value());
    total.add(-2.0 * cross.value());
    total.value()
}

/// Marginal-centered kernel; distances get the `-1/2` factor so that the
/// result generates the input semimetric.
fn centered_kernel(mat: &PairwiseMatrix, p: &[f64]) -> DMatrix<f64> {
    let m = p.len();
    let values = mat.values();
    let row_means: Vec<f64> =
        (0..m).map(|s| compensated_sum((0..m).map(|t| p[t] * values[(s, t)]))).collect();
    let grand = compensated_sum((0..m).map(|s| p[s] * row_means[s]));
    let scale = match mat.kind() {
        MatrixKind::Distance => -0.5,
        MatrixKind::Kernel => 1.0,
    };
    let mut out = DMatrix::from_fn(m, m, |s, t| scale * (values[(s, t)] - row_means[s] - row_means[t] + grand));
    for s in 0..m {
        for t in 0..s {
            out[(s, t)] = out[(t, s)];
        }
    }
    out
}

/// Kernels are shifted by their first diagonal entry. The three-term
/// formula is invariant to adding a constant, and the shift makes a
/// constant marginal contribute exact zeros instead of cancellation residue.
fn as_kernel(mat: &PairwiseMatrix, p: &[f64]) -> DMatrix<f64> {
    match mat.kind() {
        MatrixKind::Kernel => mat.values().add_scalar(-mat.values()[(0, 0)]),
        MatrixKind::Distance => centered_kernel(mat, p),
    }
}

fn as_distance(mat: &PairwiseMatrix) -> DMatrix<f64> {
    match mat.kind() {
        MatrixKind::Distance => mat.values().clone(),
        MatrixKind::Kernel => {
            let k = mat.values();
            DMatrix::from_fn(k.nrows(), k.ncols(), |s, t| {
                if s == t { 0.0 } else { k[(s, s)] + k[(t, t)] - 2.0 * k[(s, t)] }
            })
        }
    }
}

/// Population HSIC by direct three-term enumeration.
pub fn population_hsic(dist: &FiniteJointDistribution, kx: &MetricSpec, ky: &MetricSpec) -> Result<f64> {
    population_hsic_matrices(dist, &dist.atom_matrix(Side::X, kx)?, &dist.atom_matrix(Side::Y, ky)?)
}

/// As [`population_hsic`], with metric matrices indexed by atom.
pub fn population_hsic_matrices(
    dist: &FiniteJointDistribution,
    kx: &PairwiseMatrix,
    ky: &PairwiseMatrix,
) -> Result<f64> {
    dist.check_atom_matrix(kx)?;
    dist.check_atom_matrix(ky)?;
    let p = dist.probs();
    Ok(three_term(&as_kernel(kx, &p), &as_kernel(ky, &p), &p))
}

/// Population distance covariance by direct three-term enumeration.
/// Kernel specs are replaced by the semimetric they generate.
pub fn population_dcov(dist: &FiniteJointDistribution, dx: &MetricSpec, dy: &MetricSpec) -> Result<f64> {
    population_dcov_matrices(dist, &dist.atom_matrix(Side::X, dx)?, &dist.atom_matrix(Side::Y, dy)?)
}

pub fn population_dcov_matrices(
    dist: &FiniteJointDistribution,
    dx: &PairwiseMatrix,
    dy: &PairwiseMatrix,
) -> Result<f64> {
    dist.check_atom_matrix(dx)?;
    dist.check_atom_matrix(dy)?;
    Ok(three_term(&as_distance(dx), &as_distance(dy), &dist.probs()))
}

/// Mercer system of one marginal: eigenvalues with eigenfunctions tabulated
/// on the distinct support points.
#[derive(Debug, Clone)]
pub struct MarginalFeatures {
    pub support: Vec<Vec<f64>>,
    pub probs: Vec<f64>,
    pub weights: Vec<f64>,
    /// `values[(a, i)] = phi_i(support[a])`.
    pub values: DMatrix<f64>,
    /// Support index of every atom of the joint (atoms with `p = 0` map to `None`).
    atom_to_support: Vec<Option<usize>>,
}

impl MarginalFeatures {
    pub fn is_degenerate(&self, i: usize) -> bool {
        self.weights[i] == 0.0
    }

    pub fn is_significant(&self, i: usize) -> bool {
        let max = self.weights.first().copied().unwrap_or(0.0).max(0.0);
        self.weights[i] > DEFAULT_RANK_EPS * max
    }

    /// `E[phi_i(X)]` under the marginal.
    pub fn mean(&self, i: usize) -> f64 {
        compensated_sum(self.probs.iter().enumerate().map(|(a, p)| p * self.values[(a, i)]))
    }

    /// `E[phi_i(X)^2]` under the marginal.
    pub fn second_moment(&self, i: usize) -> f64 {
        compensated_sum(self.probs.iter().enumerate().map(|(a, p)| p * self.values[(a, i)].powi(2)))
    }
}

#[derive(Debug, Clone)]
pub struct PopulationAdc {
    pub x: MarginalFeatures,
    pub y: MarginalFeatures,
    /// `corr[(i, j)] = corr[phi_i(X), psi_j(Y)]` under the joint.
    pub corr: DMatrix<f64>,
    /// `sum_ij lambda_i sigma_j corr_ij^2`; equals the population HSIC.
    pub decomposition_sum: f64,
}

/// Feature decomposition of the population HSIC.
pub fn population_adc(dist: &FiniteJointDistribution, kx: &MetricSpec, ky: &MetricSpec) -> Result<PopulationAdc> {
    population_adc_matrices(dist, &dist.atom_matrix(Side::X, kx)?, &dist.atom_matrix(Side::Y, ky)?)
}

pub fn population_adc_matrices(
    dist: &FiniteJointDistribution,
    kx: &PairwiseMatrix,
    ky: &PairwiseMatrix,
) -> Result<PopulationAdc> {
    dist.check_atom_matrix(kx)?;
    dist.check_atom_matrix(ky)?;
    let x = marginal_features(dist, Side::X, kx)?;
    let y = marginal_features(dist, Side::Y, ky)?;
    let (mx, my) = (x.weights.len(), y.weights.len());
    let mut corr = DMatrix::zeros(mx, my);
    for (t, atom) in dist.atoms().iter().enumerate() {
        let (Some(a), Some(b)) = (x.atom_to_support[t], y.atom_to_support[t]) else {
            continue;
        };
        for j in 0..my {
            let psi = y.values[(b, j)];
            for i in 0..mx {
                corr[(i, j)] += atom.p * x.values[(a, i)] * psi;
            }
        }
    }
    let mut sum = CompensatedSum::new();
    for j in 0..my {
        for i in 0..mx {
            if x.is_degenerate(i) || y.is_degenerate(j) {
                corr[(i, j)] = 0.0;
            } else {
                sum.add(x.weights[i] * y.weights[j] * corr[(i, j)].powi(2));
            }
        }
    }
    Ok(PopulationAdc { x, y, corr, decomposition_sum: sum.value() })
}

fn marginal_features(dist: &FiniteJointDistribution, side: Side, mat: &PairwiseMatrix) -> Result<MarginalFeatures> {
    // merge atoms with identical coordinates; skip zero-probability atoms
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut support: Vec<Vec<f64>> = Vec::new();
    let mut representative: Vec<usize> = Vec::new();
    let mut probs: Vec<f64> = Vec::new();
    let mut atom_to_support = Vec::with_capacity(dist.len());
    for (t, atom) in dist.atoms().iter().enumerate() {
        if atom.p == 0.0 {
            atom_to_support.push(None);
            continue;
        }
        let point = dist.point(t, side);
        let key: Vec<u64> = point.iter().map(|v| (v + 0.0).to_bits()).collect();
        let a = *index.entry(key).or_insert_with(|| {
            support.push(point.to_vec());
            representative.push(t);
            probs.push(0.0);
            support.len() - 1
        });
        probs[a] += atom.p;
        atom_to_support.push(Some(a));
    }
    let m = support.len();
    let sub = DMatrix::from_fn(m, m, |a, b| mat.values()[(representative[a], representative[b])]);
    let sub = PairwiseMatrix::from_matrix(sub, mat.kind(), mat.spec().clone())?;
    let centered = centered_kernel(&sub, &probs);
    let roots: Vec<f64> = probs.iter().map(|p| p.sqrt()).collect();
    let weighted = DMatrix::from_fn(m, m, |a, b| roots[a] * roots[b] * centered[(a, b)]);
    let weighted = symmetrized(&weighted, 1.0)?;
    let null = DVector::from_vec(roots.clone()).normalize();
    let (values, vectors) = deflated_eigen(&weighted, &null);
    let EigenSystem { eigenvalues, eigenvectors, .. } = finish(values, vectors, DEFAULT_RANK_EPS, &weighted)
        .map_err(|(min, max)| Error::IndefiniteCenteredKernel { min, max })?;
    let values = DMatrix::from_fn(m, m, |a, i| eigenvectors[(a, i)] / roots[a]);
    Ok(MarginalFeatures { support, probs, weights: eigenvalues, values, atom_to_support })
}

/// Results of the identity checks run by the `oracle` command.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub atoms: usize,
    pub population_hsic: f64,
    pub population_dcov: f64,
    pub population_adc_sum: f64,
    /// `|adc_sum - hsic| / max(|hsic|, floor)`.
    pub adc_residual: f64,
    /// `|dcov - 4 hsic| / max(|4 hsic|, floor)`.
    pub dcov_residual: f64,
    pub max_feature_mean: f64,
    pub max_feature_variance_error: f64,
    pub passed: bool,
}

pub const ADC_TOLERANCE: f64 = 1e-10;
pub const DCOV_TOLERANCE: f64 = 1e-12;
/// Absolute floor below which values count as zero in relative residuals.
pub const ZERO_FLOOR: f64 = 1e-14;

pub fn relative_residual(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(ZERO_FLOOR)
}

/// Runs every population identity on one fixture.
pub fn oracle_report(dist: &FiniteJointDistribution, kx: &PairwiseMatrix, ky: &PairwiseMatrix) -> Result<OracleReport> {
    let hsic = population_hsic_matrices(dist, kx, ky)?;
    let dcov = population_dcov_matrices(dist, kx, ky)?;
    let adc = population_adc_matrices(dist, kx, ky)?;
    let adc_residual = relative_residual(adc.decomposition_sum, hsic);
    let dcov_residual = relative_residual(dcov, 4.0 * hsic);
    let mut max_mean = 0.0_f64;
    let mut max_var = 0.0_f64;
    for f in [&adc.x, &adc.y] {
        for i in 0..f.weights.len() {
            if f.is_significant(i) {
                max_mean = max_mean.max(f.mean(i).abs());
                max_var = max_var.max((f.second_moment(i) - 1.0).abs());
            }
        }
    }
    let passed = adc_residual <= ADC_TOLERANCE
        && dcov_residual <= DCOV_TOLERANCE
        && max_mean <= 1e-10
        && max_var <= 1e-10;
    Ok(OracleReport {
        atoms: dist.len(),
        population_hsic: hsic,
        population_dcov: dcov,
        population_adc_sum: adc.decomposition_sum,
        adc_residual,
        dcov_residual,
        max_feature_mean: max_mean,
        max_feature_variance_error: max_var,
        passed,
    })
}

/// Atom-indexed matrix of a metric spec; exposed for callers that mix
/// computed and precomputed sides.
pub fn support_matrix(dist: &FiniteJointDistribution, y_side: bool, spec: &MetricSpec) -> Result<PairwiseMatrix> {
    dist.atom_matrix(if y_side { Side::Y } else { Side::X }, spec)
}
