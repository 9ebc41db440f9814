//! Semimetrics, kernels and the dense pairwise matrices built from them.
//!
//! Kernels are radial in the squared Euclidean norm `r2 = |x - x'|^2`:
//!
//! * polynomial: `(beta + r2)^(-alpha)`
//! * double exponential: `exp(-r2 / theta)`
//!
//! A kernel generates the semimetric `d(x, x') = k(x, x) + k(x', x') - 2 k(x, x')`.
//! Matrices are stored densely, so `n` around `10^4` is the practical ceiling.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::SampleSet;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    EuclideanDistance,
    PolynomialKernel,
    DoubleExponentialKernel,
    PrecomputedDistance,
    PrecomputedKernel,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::EuclideanDistance => "euclidean",
            MetricKind::PolynomialKernel => "polynomial",
            MetricKind::DoubleExponentialKernel => "double-exponential",
            MetricKind::PrecomputedDistance => "precomputed-distance",
            MetricKind::PrecomputedKernel => "precomputed-kernel",
        }
    }

    pub fn matrix_kind(self) -> MatrixKind {
        match self {
            MetricKind::EuclideanDistance | MetricKind::PrecomputedDistance => MatrixKind::Distance,
            _ => MatrixKind::Kernel,
        }
    }

    fn required_params(self) -> &'static [&'static str] {
        match self {
            MetricKind::PolynomialKernel => &["alpha", "beta"],
            MetricKind::DoubleExponentialKernel => &["theta"],
            _ => &[],
        }
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "euclidean" | "euclidean-distance" => MetricKind::EuclideanDistance,
            "polynomial" | "polynomial-kernel" => MetricKind::PolynomialKernel,
            "double-exponential" | "double-exponential-kernel" => MetricKind::DoubleExponentialKernel,
            "precomputed-distance" => MetricKind::PrecomputedDistance,
            "precomputed-kernel" => MetricKind::PrecomputedKernel,
            _ => return Err(Error::BadMetricSpec(s.to_string())),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Distance,
    Kernel,
}

impl MatrixKind {
    pub fn name(self) -> &'static str {
        match self {
            MatrixKind::Distance => "distance",
            MatrixKind::Kernel => "kernel",
        }
    }
}

/// Declarative choice of semimetric or kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub kind: MetricKind,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl MetricSpec {
    pub fn new(kind: MetricKind, params: &[(&str, f64)]) -> Result<Self> {
        let spec = Self {
            kind,
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn euclidean() -> Self {
        Self { kind: MetricKind::EuclideanDistance, params: BTreeMap::new() }
    }

    pub fn polynomial(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(MetricKind::PolynomialKernel, &[("alpha", alpha), ("beta", beta)])
    }

    pub fn double_exponential(theta: f64) -> Result<Self> {
        Self::new(MetricKind::DoubleExponentialKernel, &[("theta", theta)])
    }

    pub fn precomputed(kind: MatrixKind) -> Self {
        let kind = match kind {
            MatrixKind::Distance => MetricKind::PrecomputedDistance,
            MatrixKind::Kernel => MetricKind::PrecomputedKernel,
        };
        Self { kind, params: BTreeMap::new() }
    }

    /// Params present exactly for the kinds that need them, all strictly positive.
    pub fn check(&self) -> Result<()> {
        let required = self.kind.required_params();
        let invalid = |reason: String| Error::InvalidParams { kind: self.kind.name().into(), reason };
        for name in required {
            match self.params.get(*name) {
                None => return Err(invalid(format!("missing `{name}`"))),
                Some(v) if !(v.is_finite() && *v > 0.0) => {
                    return Err(invalid(format!("`{name}` must be > 0, got {v}")))
                }
                Some(_) => {}
            }
        }
        if let Some(extra) = self.params.keys().find(|k| !required.contains(&k.as_str())) {
            return Err(invalid(format!("unexpected parameter `{extra}`")));
        }
        Ok(())
    }

    pub fn matrix_kind(&self) -> MatrixKind {
        self.kind.matrix_kind()
    }

    fn param(&self, name: &str) -> f64 {
        self.params[name]
    }

    /// Evaluates the metric or kernel on one pair of points.
    ///
    /// Panics for precomputed kinds, which have no pointwise form.
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let r2: f64 = a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum();
        match self.kind {
            MetricKind::EuclideanDistance => r2.sqrt(),
            MetricKind::PolynomialKernel => (self.param("beta") + r2).powf(-self.param("alpha")),
            MetricKind::DoubleExponentialKernel => (-r2 / self.param("theta")).exp(),
            MetricKind::PrecomputedDistance | MetricKind::PrecomputedKernel => {
                panic!("precomputed metric has no pointwise evaluation")
            }
        }
    }
}

impl fmt::Display for MetricSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.kind.name())?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            write!(f, "{}{k}={v}", if i == 0 { ':' } else { ',' })?;
        }
        Ok(())
    }
}

/// Parses `name[:param=value,...]`, e.g. `polynomial:alpha=0.5,beta=0.5`.
impl FromStr for MetricSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let kind: MetricKind = name.parse()?;
        let mut params = BTreeMap::new();
        for item in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| Error::BadMetricSpec(s.to_string()))?;
            let v: f64 = v.trim().parse().map_err(|_| Error::BadMetricSpec(s.to_string()))?;
            params.insert(k.trim().to_string(), v);
        }
        let spec = MetricSpec { kind, params };
        spec.check()?;
        Ok(spec)
    }
}

/// Symmetric `n x n` matrix of distances or kernel values.
#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseMatrix {
    values: DMatrix<f64>,
    kind: MatrixKind,
    spec: MetricSpec,
}

impl PairwiseMatrix {
    /// Wraps an explicit matrix, checking squareness, exact symmetry, and for
    /// distances a zero diagonal with nonnegative entries.
    pub fn from_matrix(values: DMatrix<f64>, kind: MatrixKind, spec: MetricSpec) -> Result<Self> {
        let (r, c) = values.shape();
        if r != c {
            return Err(Error::NotSquare { rows: r, cols: c });
        }
        for i in 0..r {
            for j in 0..i {
                if values[(i, j)] != values[(j, i)] {
                    return Err(Error::AsymmetryTooLarge {
                        row: i,
                        col: j,
                        gap: (values[(i, j)] - values[(j, i)]).abs(),
                    });
                }
            }
        }
        if kind == MatrixKind::Distance {
            check_distance_entries(&values)?;
        }
        Ok(Self { values, kind, spec })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn kind(&self) -> MatrixKind {
        self.kind
    }

    pub fn spec(&self) -> &MetricSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    /// Conjugates by a permutation: entry `(i, j)` of the result is entry
    /// `(perm[i], perm[j])` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let values = DMatrix::from_fn(perm.len(), perm.len(), |i, j| self.values[(perm[i], perm[j])]);
        Self { values, kind: self.kind, spec: self.spec.clone() }
    }
}

fn check_distance_entries(values: &DMatrix<f64>) -> Result<()> {
    for j in 0..values.ncols() {
        for i in 0..values.nrows() {
            let v = values[(i, j)];
            if v < 0.0 || (i == j && v != 0.0) {
                return Err(Error::NegativeDistanceEntry { row: i, col: j, value: v });
            }
        }
    }
    Ok(())
}

/// Dense pairwise matrix of `s` under `spec`. Each unordered pair is
/// evaluated once; rows are computed in parallel.
pub fn pairwise_matrix(s: &SampleSet, spec: &MetricSpec) -> Result<PairwiseMatrix> {
    spec.check()?;
    if matches!(spec.kind, MetricKind::PrecomputedDistance | MetricKind::PrecomputedKernel) {
        return Err(Error::InvalidParams {
            kind: spec.kind.name().into(),
            reason: "precomputed matrices are loaded, not computed".into(),
        });
    }
    let rows = s.rows();
    let n = rows.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| spec.eval(&rows[i], &rows[j])).collect())
        .collect();
    let mut values = DMatrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (off, &v) in row.iter().enumerate() {
            let j = i + off;
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    if spec.matrix_kind() == MatrixKind::Distance {
        values.fill_diagonal(0.0);
    }
    Ok(PairwiseMatrix { values, kind: spec.matrix_kind(), spec: spec.clone() })
}

/// Generated semimetric `K_ii + K_jj - 2 K_ij`.
///
/// Negative entries down to `-1e-12 * max(1, max_i K_ii)` are roundoff and
/// clamped to zero; anything lower means the kernel matrix is not PSD.
pub fn kernel_to_distance(k_mat: &PairwiseMatrix) -> Result<PairwiseMatrix> {
    if k_mat.kind != MatrixKind::Kernel {
        return Err(Error::WrongMatrixKind { expected: "kernel", got: k_mat.kind.name() });
    }
    let k = &k_mat.values;
    let n = k.nrows();
    let scale = k.diagonal().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut v = k[(i, i)] + k[(j, j)] - 2.0 * k[(i, j)];
            if v < 0.0 {
                if v < -tol {
                    return Err(Error::NegativeGeneratedDistance { row: i, col: j, value: v });
                }
                v = 0.0;
            }
            d[(i, j)] = v;
            d[(j, i)] = v;
        }
    }
    Ok(PairwiseMatrix { values: d, kind: MatrixKind::Distance, spec: k_mat.spec.clone() })
}

/// Reads a square, headerless CSV matrix. Asymmetry up to
/// `1e-9 * max(1, max|entry|)` is averaged away.
pub fn load_precomputed(path: impl AsRef<Path>, kind: MatrixKind) -> Result<PairwiseMatrix> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_precomputed(file, kind)
}

pub fn read_precomputed<R: std::io::Read>(reader: R, kind: MatrixKind) -> Result<PairwiseMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Csv(e.to_string()))?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| Error::NonNumericCell {
                    row: r + 1,
                    column: (c + 1).to_string(),
                    value: cell.to_string(),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let n = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != n) {
        return Err(Error::NotSquare { rows: n, cols: bad.len() });
    }
    let scale = rows.iter().flatten().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut values = DMatrix::zeros(n, n);
    for i in 0..n {
        values[(i, i)] = rows[i][i];
        for j in 0..i {
            let gap = (rows[i][j] - rows[j][i]).abs();
            if gap > 1e-9 * scale {
                return Err(Error::AsymmetryTooLarge { row: i, col: j, gap });
            }
            let avg = 0.5 * (rows[i][j] + rows[j][i]);
            values[(i, j)] = avg;
            values[(j, i)] = avg;
        }
    }
    PairwiseMatrix::from_matrix(values, kind, MetricSpec::precomputed(kind))
}
