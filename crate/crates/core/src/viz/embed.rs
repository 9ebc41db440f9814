use nalgebra::{DMatrix, SymmetricEigen};

/// Projects rows onto the two leading principal axes of the standardized
/// columns. Constant columns standardize to zero. Each axis is signed so its
/// largest-magnitude loading is positive.
pub(crate) fn pca_2d(values: &DMatrix<f64>) -> DMatrix<f64> {
    let (n, p) = values.shape();
    let mut z = values.clone();
    for c in 0..p {
        let col = values.column(c);
        let mean = col.mean();
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let sd = var.sqrt();
        for r in 0..n {
            z[(r, c)] = if sd > 0.0 { (values[(r, c)] - mean) / sd } else { 0.0 };
        }
    }
    if p == 1 {
        let mut out = DMatrix::zeros(n, 2);
        out.set_column(0, &z.column(0));
        return out;
    }
    let cov = z.transpose() * &z / n as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let mut axes = DMatrix::zeros(p, 2);
    for (k, &idx) in order.iter().take(2).enumerate() {
        let mut v = eig.eigenvectors.column(idx).clone_owned();
        let lead = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        if lead < 0.0 {
            v.neg_mut();
        }
        axes.set_column(k, &v);
    }
    z * axes
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_embeds_onto_first_axis() {
        let m = DMatrix::from_fn(20, 3, |r, c| r as f64 * (c + 1) as f64);
        let e = pca_2d(&m);
        for r in 0..20 {
            assert!(e[(r, 1)].abs() < 1e-9);
        }
        assert!(e[(19, 0)] > e[(0, 0)]);
        let spread = e.column(0).iter().map(|v| v * v).sum::<f64>() / 20.0;
        assert!((spread - 3.0).abs() < 1e-9);
    }

    #[test]
    fn constant_columns_are_ignored() {
        let m = DMatrix::from_fn(10, 3, |r, c| if c == 1 { 5.0 } else { (r * (c + 2)) as f64 });
        let e = pca_2d(&m);
        assert!(e.iter().all(|v| v.is_finite()));
    }
}
