//! Double centering, sample distance covariance and empirical HSIC.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::metrics::{MatrixKind, MetricSpec, PairwiseMatrix};
use crate::numeric::{compensated_sum, CompensatedSum};

/// Rows per block in the trace reduction. Fixed so that the reduction order,
/// and hence the result, does not depend on the thread count.
const BLOCK_ROWS: usize = 32;

/// Doubly-centered distance-scale matrices of both groups plus the statistics.
///
/// For kernel inputs the stored matrices are `-2 HKH` and `-2 HLH`, so every
/// consumer can treat them as centered distance matrices.
#[derive(Debug, Clone, Serialize)]
pub struct CenteredPair {
    #[serde(skip)]
    pub d_tilde: DMatrix<f64>,
    #[serde(skip)]
    pub r_tilde: DMatrix<f64>,
    pub v_hat: f64,
    pub hsic_hat: f64,
    pub source: MatrixKind,
    pub source_specs: (MetricSpec, MetricSpec),
}

impl CenteredPair {
    pub fn n(&self) -> usize {
        self.d_tilde.nrows()
    }
}

/// `HMH` via row, column and grand means.
pub fn double_center(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, c) = m.shape();
    assert_eq!(n, c, "double_center needs a square matrix");
    let inv = 1.0 / n as f64;
    let row_means: Vec<f64> = (0..n).map(|i| compensated_sum(m.row(i).iter().copied()) * inv).collect();
    let col_means: Vec<f64> = (0..n).map(|j| compensated_sum(m.column(j).iter().copied()) * inv).collect();
    let grand = compensated_sum(row_means.iter().copied()) * inv;
    let symmetric = m == &m.transpose();
    let mut out = DMatrix::from_fn(n, n, |i, j| m[(i, j)] - row_means[i] - col_means[j] + grand);
    if symmetric {
        // mirror the upper triangle so the result is exactly symmetric
        for j in 0..n {
            for i in (j + 1)..n {
                out[(i, j)] = out[(j, i)];
            }
        }
    }
    out
}

/// `sum_ij a_ij * b_{perm(i) perm(j)}` with blocked compensated summation.
///
/// `perm = None` is the identity. Block partial sums are combined in block
/// order, so the value is bit-identical whether or not `parallel` is set.
pub fn permuted_inner(a: &DMatrix<f64>, b: &DMatrix<f64>, perm: Option<&[usize]>, parallel: bool) -> f64 {
    let n = a.nrows();
    let block = |start: usize| -> f64 {
        let mut acc = CompensatedSum::new();
        for j in start..(start + BLOCK_ROWS).min(n) {
            // column j of a and of the permuted b; both are contiguous in a
            let pj = perm.map_or(j, |p| p[j]);
            let a_col = a.column(j);
            let b_col = b.column(pj);
            match perm {
                None => a_col.iter().zip(b_col.iter()).for_each(|(x, y)| acc.add(x * y)),
                Some(p) => a_col.iter().zip(p).for_each(|(x, &pi)| acc.add(x * b_col[pi])),
            }
        }
        acc.value()
    };
    let starts: Vec<usize> = (0..n).step_by(BLOCK_ROWS).collect();
    let partials: Vec<f64> = if parallel {
        starts.par_iter().map(|&s| block(s)).collect()
    } else {
        starts.iter().map(|&s| block(s)).collect()
    };
    compensated_sum(partials)
}

fn statistic(d_tilde: &DMatrix<f64>, r_tilde: &DMatrix<f64>, raw_sum: f64) -> Result<f64> {
    let n2 = (d_tilde.nrows() * d_tilde.nrows()) as f64;
    let v = raw_sum / n2;
    if v < 0.0 {
        let tol = 1e-9 * d_tilde.norm() * r_tilde.norm() / n2;
        if v < -tol {
            return Err(Error::NegativeStatistic(v));
        }
        return Ok(0.0);
    }
    Ok(v)
}

fn check_pair(a: &PairwiseMatrix, b: &PairwiseMatrix, kind: MatrixKind) -> Result<()> {
    for m in [a, b] {
        if m.kind() != kind {
            return Err(Error::WrongMatrixKind { expected: kind.name(), got: m.kind().name() });
        }
    }
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch(a.n(), b.n()));
    }
    Ok(())
}

/// Sample distance covariance `(1/n^2) sum_ij D~_ij R~_ij`.
pub fn sample_dcov(d_mat: &PairwiseMatrix, r_mat: &PairwiseMatrix) -> Result<CenteredPair> {
    check_pair(d_mat, r_mat, MatrixKind::Distance)?;
    let d_tilde = double_center(d_mat.values());
    let r_tilde = double_center(r_mat.values());
    let v_hat = statistic(&d_tilde, &r_tilde, permuted_inner(&d_tilde, &r_tilde, None, true))?;
    Ok(CenteredPair {
        d_tilde,
        r_tilde,
        v_hat,
        hsic_hat: v_hat / 4.0,
        source: MatrixKind::Distance,
        source_specs: (d_mat.spec().clone(), r_mat.spec().clone()),
    })
}

/// Empirical HSIC `(1/n^2) tr(KHLH)`, evaluated as the entrywise product sum
/// of `HKH` and `HLH`.
pub fn empirical_hsic(k_mat: &PairwiseMatrix, l_mat: &PairwiseMatrix) -> Result<CenteredPair> {
    check_pair(k_mat, l_mat, MatrixKind::Kernel)?;
    let hkh = double_center(k_mat.values());
    let hlh = double_center(l_mat.values());
    let hsic_hat = statistic(&hkh, &hlh, permuted_inner(&hkh, &hlh, None, true))?;
    Ok(CenteredPair {
        d_tilde: hkh * -2.0,
        r_tilde: hlh * -2.0,
        v_hat: 4.0 * hsic_hat,
        hsic_hat,
        source: MatrixKind::Kernel,
        source_specs: (k_mat.spec().clone(), l_mat.spec().clone()),
    })
}

/// Dispatches on the matrix kinds: two distances go through
/// [`sample_dcov`], two kernels through [`empirical_hsic`]. A mixed pair
/// converts the kernel side to its generated semimetric.
pub fn centered_pair(x: &PairwiseMatrix, y: &PairwiseMatrix) -> Result<CenteredPair> {
    match (x.kind(), y.kind()) {
        (MatrixKind::Kernel, MatrixKind::Kernel) => empirical_hsic(x, y),
        (MatrixKind::Distance, MatrixKind::Distance) => sample_dcov(x, y),
        _ => {
            let to_dist = |m: &PairwiseMatrix| match m.kind() {
                MatrixKind::Kernel => crate::metrics::kernel_to_distance(m),
                MatrixKind::Distance => Ok(m.clone()),
            };
            sample_dcov(&to_dist(x)?, &to_dist(y)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SampleSet;
    use crate::metrics::{kernel_to_distance, pairwise_matrix};
    use proptest::prelude::*;

    fn dist(xs: &[f64]) -> PairwiseMatrix {
        pairwise_matrix(&SampleSet::from_column(xs, "x", "X").unwrap(), &MetricSpec::euclidean()).unwrap()
    }

    fn precomputed(values: DMatrix<f64>, kind: MatrixKind) -> PairwiseMatrix {
        PairwiseMatrix::from_matrix(values, kind, MetricSpec::precomputed(kind)).unwrap()
    }

    /// Independent route: explicit `H M H` products.
    fn center_by_h(m: &DMatrix<f64>) -> DMatrix<f64> {
        let n = m.nrows();
        let h = DMatrix::identity(n, n) - DMatrix::from_element(n, n, 1.0 / n as f64);
        &h * m * &h
    }

    #[test]
    fn centering_three_points() {
        let d = dist(&[0.0, 1.0, 2.0]);
        let expected = DMatrix::from_row_slice(3, 3, &[-10.0, 2.0, 8.0, 2.0, -4.0, 2.0, 8.0, 2.0, -10.0]) / 9.0;
        let got = double_center(d.values());
        assert!((&got - &expected).amax() < 1e-15);
        assert!((&got - center_by_h(d.values())).amax() < 1e-15);
    }

    #[test]
    fn centering_constant_and_idempotent() {
        assert_eq!(double_center(&DMatrix::from_element(4, 4, 3.5)).amax(), 0.0);
        let once = double_center(dist(&[0.3, -1.0, 2.2, 5.0]).values());
        let twice = double_center(&once);
        assert!((&once - &twice).amax() < 1e-14);
    }

    #[test]
    fn three_point_statistic_is_360_over_729() {
        let d = dist(&[0.0, 1.0, 2.0]);
        let cp = sample_dcov(&d, &d).unwrap();
        assert!((cp.v_hat - 360.0 / 729.0).abs() < 1e-14);
        assert_eq!(cp.hsic_hat, cp.v_hat / 4.0);
    }

    #[test]
    fn constant_group_gives_zero() {
        let cp = sample_dcov(&dist(&[0.0, 1.0, 2.0, 4.0]), &dist(&[7.0; 4])).unwrap();
        assert_eq!(cp.v_hat, 0.0);
        assert_eq!(cp.r_tilde.amax(), 0.0);
    }

    #[test]
    fn identity_kernel_two_points() {
        let k = precomputed(DMatrix::identity(2, 2), MatrixKind::Kernel);
        let cp = empirical_hsic(&k, &k).unwrap();
        assert!((cp.hsic_hat - 0.25).abs() < 1e-15);
        let hkh = &cp.d_tilde * -0.5;
        assert_eq!(hkh, DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]));
        assert_eq!(cp.v_hat, 1.0);

        let ones = precomputed(DMatrix::from_element(2, 2, 1.0), MatrixKind::Kernel);
        assert_eq!(empirical_hsic(&ones, &k).unwrap().hsic_hat, 0.0);
    }

    #[test]
    fn errors() {
        let d3 = dist(&[0.0, 1.0, 2.0]);
        let d2 = dist(&[0.0, 1.0]);
        assert!(matches!(sample_dcov(&d3, &d2), Err(Error::DimensionMismatch(3, 2))));
        let k = precomputed(DMatrix::identity(3, 3), MatrixKind::Kernel);
        assert!(matches!(sample_dcov(&d3, &k), Err(Error::WrongMatrixKind { .. })));
        // -1/2 HDH of `bad` has eigenvalue -1: not of negative type
        let bad = precomputed(
            DMatrix::from_row_slice(4, 4, &[
                0.0, 1.0, 1.0, 4.0, 1.0, 0.0, 4.0, 1.0, 1.0, 4.0, 0.0, 1.0, 4.0, 1.0, 1.0, 0.0,
            ]),
            MatrixKind::Distance,
        );
        let other = precomputed(
            DMatrix::from_row_slice(4, 4, &[
                0.0, 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 1.0, 0.0,
            ]),
            MatrixKind::Distance,
        );
        // (1/n^2) tr(D~ R~) = -1/4 for this pair
        match sample_dcov(&bad, &other) {
            Err(Error::NegativeStatistic(v)) => assert!((v + 0.25).abs() < 1e-15),
            other => panic!("expected NegativeStatistic, got {other:?}"),
        }
    }

    #[test]
    fn blocked_sum_matches_between_modes() {
        let xs: Vec<f64> = (0..150).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let ys: Vec<f64> = (0..150).map(|i| ((i * 53) % 97) as f64 / 3.0).collect();
        let a = double_center(dist(&xs).values());
        let b = double_center(dist(&ys).values());
        let perm: Vec<usize> = (0..150).rev().collect();
        assert_eq!(
            permuted_inner(&a, &b, Some(&perm), true).to_bits(),
            permuted_inner(&a, &b, Some(&perm), false).to_bits()
        );
    }

    fn rows_strategy(dim: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
        (2usize..40).prop_flat_map(move |n| {
            (
                prop::collection::vec(prop::collection::vec(-2.0..2.0f64, dim), n),
                prop::collection::vec(prop::collection::vec(-2.0..2.0f64, dim), n),
            )
        })
    }

    proptest! {
        #[test]
        fn hsic_and_dcov_agree((xr, yr) in rows_strategy(2), which in 0usize..3) {
            let spec = [
                MetricSpec::polynomial(0.5, 0.5).unwrap(),
                MetricSpec::polynomial(2.0, 0.5).unwrap(),
                MetricSpec::double_exponential(1.0).unwrap(),
            ][which].clone();
            let x = SampleSet::from_rows(&xr, "x", "X").unwrap();
            let y = SampleSet::from_rows(&yr, "y", "Y").unwrap();
            let k = pairwise_matrix(&x, &spec).unwrap();
            let l = pairwise_matrix(&y, &spec).unwrap();
            let via_kernel = empirical_hsic(&k, &l).unwrap();
            let via_dist = sample_dcov(&kernel_to_distance(&k).unwrap(), &kernel_to_distance(&l).unwrap()).unwrap();
            let scale = via_kernel.v_hat.abs().max(1e-300);
            prop_assert!((via_kernel.v_hat - via_dist.v_hat).abs() <= 1e-10 * scale.max(1e-12));
        }

        #[test]
        fn symmetric_in_groups((xr, yr) in rows_strategy(1)) {
            let d = pairwise_matrix(&SampleSet::from_rows(&xr, "x", "X").unwrap(), &MetricSpec::euclidean()).unwrap();
            let r = pairwise_matrix(&SampleSet::from_rows(&yr, "y", "Y").unwrap(), &MetricSpec::euclidean()).unwrap();
            prop_assert_eq!(sample_dcov(&d, &r).unwrap().v_hat, sample_dcov(&r, &d).unwrap().v_hat);
        }

        #[test]
        fn invariant_to_joint_permutation_and_shift((xr, yr) in rows_strategy(2), shift in -5.0..5.0f64) {
            let x = SampleSet::from_rows(&xr, "x", "X").unwrap();
            let y = SampleSet::from_rows(&yr, "y", "Y").unwrap();
            let base = sample_dcov(
                &pairwise_matrix(&x, &MetricSpec::euclidean()).unwrap(),
                &pairwise_matrix(&y, &MetricSpec::euclidean()).unwrap(),
            ).unwrap().v_hat;

            let perm: Vec<usize> = (0..xr.len()).rev().collect();
            let permuted = sample_dcov(
                &pairwise_matrix(&x.permute_rows(&perm).unwrap(), &MetricSpec::euclidean()).unwrap(),
                &pairwise_matrix(&y.permute_rows(&perm).unwrap(), &MetricSpec::euclidean()).unwrap(),
            ).unwrap().v_hat;
            prop_assert!((permuted - base).abs() <= 1e-12 * base.max(1e-300));

            let shifted: Vec<Vec<f64>> = xr.iter().map(|r| r.iter().map(|v| v + shift).collect()).collect();
            let xs = SampleSet::from_rows(&shifted, "x", "X").unwrap();
            let moved = sample_dcov(
                &pairwise_matrix(&xs, &MetricSpec::euclidean()).unwrap(),
                &pairwise_matrix(&y, &MetricSpec::euclidean()).unwrap(),
            ).unwrap().v_hat;
            prop_assert!((moved - base).abs() <= 1e-12 * base.max(1e-12));
        }

        #[test]
        fn identical_groups_give_frobenius((xr, _) in rows_strategy(1)) {
            let d = pairwise_matrix(&SampleSet::from_rows(&xr, "x", "X").unwrap(), &MetricSpec::euclidean()).unwrap();
            let cp = sample_dcov(&d, &d).unwrap();
            let n2 = (xr.len() * xr.len()) as f64;
            let frob = cp.d_tilde.norm_squared() / n2;
            prop_assert!(cp.v_hat >= 0.0);
            prop_assert!((cp.v_hat - frob).abs() <= 1e-12 * frob.max(1e-300));
        }
    }
}
