//! Eigensystems of doubly-centered matrices.
//!
//! A centered matrix `A` always satisfies `A q = 0` for a known unit vector
//! `q` (the normalized ones vector for sample matrices, `sqrt(p)` for the
//! probability-weighted matrices of the population oracle). The solver
//! reflects `q` onto the first axis with a Householder transform, solves the
//! complementary `(n-1)`-dimensional problem, and reports `q` itself with
//! eigenvalue exactly zero. Every other eigenvector is then orthogonal to `q`
//! to working precision.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::MatrixKind;

pub const DEFAULT_RANK_EPS: f64 = 1e-8;

/// Eigenvalues in nonincreasing order with unit eigenvectors as columns.
#[derive(Debug, Clone, Serialize)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: DMatrix<f64>,
    pub rank_eps: f64,
}

impl EigenSystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0).max(0.0)
    }

    /// Feature `i` (0-based) carries no weight.
    pub fn is_degenerate(&self, i: usize) -> bool {
        self.eigenvalues[i] == 0.0
    }

    /// Eigenvalue strictly above `rank_eps * max(lambda)`.
    pub fn is_significant(&self, i: usize) -> bool {
        self.eigenvalues[i] > self.rank_eps * self.max_eigenvalue()
    }

    pub fn feature(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i).iter().copied().collect()
    }

    pub fn eigenvalue_sum(&self) -> f64 {
        crate::numeric::compensated_sum(self.eigenvalues.iter().copied())
    }
}

/// Eigensystem of the feature matrix of a centered distance-scale or kernel
/// matrix: `-1/2 * centered` for distances, `centered` itself for kernels.
pub fn centered_spectrum(centered: &DMatrix<f64>, source: MatrixKind) -> Result<EigenSystem> {
    centered_spectrum_with_eps(centered, source, DEFAULT_RANK_EPS)
}

pub fn centered_spectrum_with_eps(
    centered: &DMatrix<f64>,
    source: MatrixKind,
    rank_eps: f64,
) -> Result<EigenSystem> {
    let n = centered.nrows();
    if centered.ncols() != n {
        return Err(Error::NotSquare { rows: n, cols: centered.ncols() });
    }
    let scale = match source {
        MatrixKind::Distance => -0.5,
        MatrixKind::Kernel => 1.0,
    };
    let a = symmetrized(centered, scale)?;
    let ones = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let (values, vectors) = deflated_eigen(&a, &ones);
    finish(values, vectors, rank_eps, &a).map_err(|(min, max)| Error::IndefiniteMatrix { min, max })
}

/// Checks symmetry within `1e-9 * max(1, max|entry|)` and returns
/// `scale * (M + M^T) / 2`.
pub(crate) fn symmetrized(m: &DMatrix<f64>, scale: f64) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    let tol = 1e-9 * m.amax().max(1.0);
    let mut out = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in 0..=j {
            let gap = (m[(i, j)] - m[(j, i)]).abs();
            if gap > tol {
                return Err(Error::AsymmetryTooLarge { row: i, col: j, gap });
            }
            let v = scale * 0.5 * (m[(i, j)] + m[(j, i)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

/// Full eigendecomposition of symmetric `a` given a unit vector `null`
/// with `a * null = 0` in exact arithmetic. Output is unsorted; `null` is
/// the last column with eigenvalue exactly 0.
pub(crate) fn deflated_eigen(a: &DMatrix<f64>, null: &DVector<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = a.nrows();
    if n == 1 {
        return (vec![0.0], DMatrix::from_element(1, 1, 1.0));
    }
    // v = null + sign(null_0) e_0, P = I - beta v v^T maps null to -sign(null_0) e_0
    let mut v = null.clone();
    let sign = if null[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += sign;
    let beta = 2.0 / v.norm_squared();

    // P A P = A - v w^T - w v^T with p = beta A v, w = p - (beta/2)(v^T p) v
    let p = a * &v * beta;
    let k = 0.5 * beta * v.dot(&p);
    let w = &p - &v * k;
    let mut reflected = a.clone();
    reflected.ger(-1.0, &v, &w, 1.0);
    reflected.ger(-1.0, &w, &v, 1.0);

    let block = reflected.view((1, 1), (n - 1, n - 1)).into_owned();
    let block = (&block + block.transpose()) * 0.5;
    let eig = SymmetricEigen::new(block);

    let mut vectors = DMatrix::zeros(n, n);
    for c in 0..(n - 1) {
        // P [0; u] = [0; u] - beta v (v[1..] . u)
        let u = eig.eigenvectors.column(c);
        let dot: f64 = v.rows(1, n - 1).dot(&u);
        let mut col = vectors.column_mut(c);
        col[0] = -beta * v[0] * dot;
        for r in 1..n {
            col[r] = u[r - 1] - beta * v[r] * dot;
        }
    }
    vectors.set_column(n - 1, null);
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.push(0.0);
    (values, vectors)
}

/// Sorts descending, fixes signs, clamps roundoff negatives. Returns the
/// offending `(min, max)` pair if the spectrum is indefinite.
pub(crate) fn finish(
    values: Vec<f64>,
    vectors: DMatrix<f64>,
    rank_eps: f64,
    source: &DMatrix<f64>,
) -> std::result::Result<EigenSystem, (f64, f64)> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    // stable: the appended null vector stays after equal eigenvalues
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));

    let max = values[order[0]].max(0.0);
    let min = values[order[n - 1]];
    // eigensolver roundoff floor for matrices that are zero up to noise
    let floor = 64.0 * f64::EPSILON * n as f64 * source.amax();
    let tol = (rank_eps * max).max(floor);
    if min < -tol {
        return Err((min, max));
    }

    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let lambda = values[src];
        eigenvalues.push(if lambda < 0.0 { 0.0 } else { lambda });
        let mut col = vectors.column(src).into_owned();
        let mut pivot = 0;
        for r in 1..n {
            if col[r].abs() > col[pivot].abs() {
                pivot = r;
            }
        }
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        eigenvectors.set_column(dst, &col);
    }
    Ok(EigenSystem { eigenvalues, eigenvectors, rank_eps })
}
