//! Sample containers and CSV ingestion.
//!
//! CSV dialect: comma separated, UTF-8, header row required, `.` as the
//! decimal separator; scientific notation is accepted. Empty cells are an
//! error, never imputed.

use std::collections::HashSet;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One group of variables: an `n x p` matrix of finite reals with labels.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    values: DMatrix<f64>,
    column_labels: Vec<String>,
    group_name: String,
}

impl SampleSet {
    pub fn new(
        values: DMatrix<f64>,
        column_labels: Vec<String>,
        group_name: impl Into<String>,
    ) -> Result<Self> {
        let (n, p) = values.shape();
        if n < 2 {
            return Err(Error::TooFewRows(n));
        }
        if p == 0 {
            return Err(Error::InvalidSample("sample set has no columns".into()));
        }
        if column_labels.len() != p {
            return Err(Error::InvalidSample(format!(
                "{} labels for {} columns",
                column_labels.len(),
                p
            )));
        }
        let mut seen = HashSet::new();
        for label in &column_labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::InvalidSample(format!("duplicate column label `{label}`")));
            }
        }
        if let Some(idx) = values.iter().position(|v| !v.is_finite()) {
            // column-major storage
            let (row, col) = (idx % n, idx / n);
            return Err(Error::InvalidSample(format!(
                "non-finite value at row {row}, column `{}`",
                column_labels[col]
            )));
        }
        Ok(Self { values, column_labels, group_name: group_name.into() })
    }

    /// Builds a sample set from rows, labelling columns `{prefix}1..{prefix}p`.
    pub fn from_rows(rows: &[Vec<f64>], prefix: &str, group_name: &str) -> Result<Self> {
        let n = rows.len();
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(Error::InvalidSample("ragged rows".into()));
        }
        let values = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
        let labels = (1..=p).map(|j| format!("{prefix}{j}")).collect();
        Self::new(values, labels, group_name)
    }

    /// One-dimensional convenience constructor.
    pub fn from_column(xs: &[f64], label: &str, group_name: &str) -> Result<Self> {
        Self::new(DMatrix::from_column_slice(xs.len(), 1, xs), vec![label.into()], group_name)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn column_labels(&self) -> &[String] {
        &self.column_labels
    }

    pub fn group_name(&self) -> &str {
        &self.group_name
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.values.row(i).iter().copied().collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|i| self.row(i)).collect()
    }

    /// Same columns with rows reordered: row `k` of the result is row `perm[k]`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        let values = DMatrix::from_fn(perm.len(), self.dim(), |i, j| self.values[(perm[i], j)]);
        Self::new(values, self.column_labels.clone(), self.group_name.clone())
    }
}

#[derive(Serialize, Deserialize)]
struct SampleSetJson {
    group_name: String,
    column_labels: Vec<String>,
    values: Vec<Vec<f64>>,
}

impl Serialize for SampleSet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SampleSetJson {
            group_name: self.group_name.clone(),
            column_labels: self.column_labels.clone(),
            values: self.rows(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SampleSet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = SampleSetJson::deserialize(deserializer)?;
        let n = raw.values.len();
        let p = raw.column_labels.len();
        if raw.values.iter().any(|r| r.len() != p) {
            return Err(serde::de::Error::custom("row length differs from label count"));
        }
        let values = DMatrix::from_fn(n, p, |i, j| raw.values[i][j]);
        SampleSet::new(values, raw.column_labels, raw.group_name).map_err(serde::de::Error::custom)
    }
}

/// Paired observations: row `i` of `x` and row `i` of `y` belong together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairedDataset {
    pub x: SampleSet,
    pub y: SampleSet,
}

impl PairedDataset {
    pub fn new(x: SampleSet, y: SampleSet) -> Result<Self> {
        if x.n() != y.n() {
            return Err(Error::DimensionMismatch(x.n(), y.n()));
        }
        Ok(Self { x, y })
    }

    pub fn n(&self) -> usize {
        self.x.n()
    }
}

/// Loads the selected columns of a CSV file as a paired dataset.
pub fn load_csv(
    path: impl AsRef<Path>,
    x_columns: &[String],
    y_columns: &[String],
) -> Result<PairedDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, x_columns, y_columns)
}

/// Reader-based variant of [`load_csv`].
pub fn read_csv<R: std::io::Read>(
    reader: R,
    x_columns: &[String],
    y_columns: &[String],
) -> Result<PairedDataset> {
    if x_columns.is_empty() || y_columns.is_empty() {
        return Err(Error::InvalidSample("both X and Y need at least one column".into()));
    }
    if let Some(c) = x_columns.iter().find(|c| y_columns.contains(c)) {
        return Err(Error::OverlappingSelection(c.clone()));
    }
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let locate = |names: &[String]| -> Result<Vec<usize>> {
        names
            .iter()
            .map(|name| {
                header
                    .iter()
                    .position(|h| h == name)
                    .ok_or_else(|| Error::MissingColumn(name.clone()))
            })
            .collect()
    };
    let x_idx = locate(x_columns)?;
    let y_idx = locate(y_columns)?;

    let mut x_rows = Vec::new();
    let mut y_rows = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        // 1-based data row numbering, header excluded
        let row = row + 1;
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        let parse = |idx: &[usize]| -> Result<Vec<f64>> {
            idx.iter()
                .map(|&c| {
                    let cell = record.get(c).unwrap_or("");
                    match cell.parse::<f64>() {
                        Ok(v) if v.is_finite() => Ok(v),
                        _ => Err(Error::NonNumericCell {
                            row,
                            column: header[c].clone(),
                            value: cell.to_string(),
                        }),
                    }
                })
                .collect()
        };
        x_rows.push(parse(&x_idx)?);
        y_rows.push(parse(&y_idx)?);
    }
    if x_rows.len() < 2 {
        return Err(Error::TooFewRows(x_rows.len()));
    }
    let build = |rows: &[Vec<f64>], labels: &[String], group: &str| {
        let values = DMatrix::from_fn(rows.len(), labels.len(), |i, j| rows[i][j]);
        SampleSet::new(values, labels.to_vec(), group)
    };
    PairedDataset::new(build(&x_rows, x_columns, "X")?, build(&y_rows, y_columns, "Y")?)
}

/// Writes X columns followed by Y columns. Values use the shortest decimal
/// form that parses back to the identical `f64` (at most 17 significant
/// digits).
pub fn save_csv(ds: &PairedDataset, path: impl AsRef<Path>) -> Result<()> {
    write_table(path, &header_of(ds, &[]), &rows_of(ds, &[]))
}

pub(crate) fn header_of(ds: &PairedDataset, extra: &[String]) -> Vec<String> {
    ds.x.column_labels()
        .iter()
        .chain(ds.y.column_labels())
        .chain(extra)
        .cloned()
        .collect()
}

pub(crate) fn rows_of(ds: &PairedDataset, extra: &[Vec<f64>]) -> Vec<Vec<f64>> {
    (0..ds.n())
        .map(|i| {
            let mut row = ds.x.row(i);
            row.extend(ds.y.row(i));
            if let Some(e) = extra.get(i) {
                row.extend_from_slice(e);
            }
            row
        })
        .collect()
}

pub(crate) fn write_table(path: impl AsRef<Path>, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Csv(e.to_string()))?;
    w.write_record(header).map_err(|e| Error::Csv(e.to_string()))?;
    for row in rows {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| Error::Csv(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Non-fatal data-quality findings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Warning {
    ConstantColumn { group: String, column: String },
    DuplicateRows { first: usize, second: usize },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::ConstantColumn { group, column } => {
                write!(f, "constant column `{column}` in group {group}")
            }
            Warning::DuplicateRows { first, second } => {
                write!(f, "duplicate rows {first} and {second}")
            }
        }
    }
}

/// Reports constant columns and duplicated observations.
pub fn validate(ds: &PairedDataset) -> Vec<Warning> {
    let mut warnings = Vec::new();
    for s in [&ds.x, &ds.y] {
        for (j, col) in s.values().column_iter().enumerate() {
            let first = col[0];
            if col.iter().all(|&v| v == first) {
                warnings.push(Warning::ConstantColumn {
                    group: s.group_name().to_string(),
                    column: s.column_labels()[j].clone(),
                });
            }
        }
    }
    let mut seen: std::collections::HashMap<Vec<u64>, usize> = std::collections::HashMap::new();
    for i in 0..ds.n() {
        // -0.0 and 0.0 compare equal as values
        let key: Vec<u64> = ds.x.row(i).into_iter().chain(ds.y.row(i)).map(|v| (v + 0.0).to_bits()).collect();
        if let Some(&first) = seen.get(&key) {
            warnings.push(Warning::DuplicateRows { first, second: i });
        } else {
            seen.insert(key, i);
        }
    }
    warnings
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cols(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn load_selects_and_shapes() {
        let text = "a,b,c\n1,2,3\n4,5,6\n7,8,9e-1\n";
        let ds = read_csv(text.as_bytes(), &cols(&["a"]), &cols(&["b", "c"])).unwrap();
        assert_eq!(ds.x.values().shape(), (3, 1));
        assert_eq!(ds.y.values().shape(), (3, 2));
        assert_eq!(ds.y.row(2), vec![8.0, 0.9]);
        assert_eq!(ds.x.row(1), vec![4.0]);
    }

    #[test]
    fn overlapping_selection_rejected() {
        let text = "a,b\n1,2\n3,4\n";
        let err = read_csv(text.as_bytes(), &cols(&["a"]), &cols(&["a"])).unwrap_err();
        assert!(matches!(err, Error::OverlappingSelection(c) if c == "a"));
    }

    #[test]
    fn non_numeric_cell_names_row_and_column() {
        let text = "a,b\n1,2\nabc,4\n";
        let err = read_csv(text.as_bytes(), &cols(&["a"]), &cols(&["b"])).unwrap_err();
        match err {
            Error::NonNumericCell { row, column, value } => {
                assert_eq!((row, column.as_str(), value.as_str()), (2, "a", "abc"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_cell_is_an_error() {
        let text = "a,b\n1,2\n,4\n";
        assert!(matches!(
            read_csv(text.as_bytes(), &cols(&["a"]), &cols(&["b"])),
            Err(Error::NonNumericCell { .. })
        ));
    }

    #[test]
    fn missing_column_and_too_few_rows() {
        let text = "a,b\n1,2\n3,4\n";
        assert!(matches!(
            read_csv(text.as_bytes(), &cols(&["z"]), &cols(&["b"])),
            Err(Error::MissingColumn(_))
        ));
        let one = "a,b\n1,2\n";
        assert!(matches!(
            read_csv(one.as_bytes(), &cols(&["a"]), &cols(&["b"])),
            Err(Error::TooFewRows(1))
        ));
    }

    #[test]
    fn validate_flags_constant_and_duplicates() {
        let x = SampleSet::from_column(&[5.0, 5.0, 5.0], "a", "X").unwrap();
        let y = SampleSet::from_column(&[1.0, 2.0, 3.0], "b", "Y").unwrap();
        let w = validate(&PairedDataset::new(x, y).unwrap());
        assert_eq!(w.len(), 1);
        assert!(w[0].to_string().contains("constant column"));

        let x = SampleSet::from_column(&[1.0, 2.0, 1.0], "a", "X").unwrap();
        let y = SampleSet::from_column(&[3.0, 4.0, 3.0], "b", "Y").unwrap();
        let w = validate(&PairedDataset::new(x, y).unwrap());
        assert_eq!(w, vec![Warning::DuplicateRows { first: 0, second: 2 }]);
        assert!(w[0].to_string().contains("duplicate rows"));

        let x = SampleSet::from_column(&[0.3, -1.2, 2.5, 0.7], "a", "X").unwrap();
        let y = SampleSet::from_column(&[1.1, 0.2, -0.4, 9.0], "b", "Y").unwrap();
        assert!(validate(&PairedDataset::new(x, y).unwrap()).is_empty());
    }

    #[test]
    fn sample_set_rejects_bad_shapes() {
        assert!(SampleSet::from_column(&[1.0], "a", "X").is_err());
        assert!(SampleSet::from_column(&[1.0, f64::NAN], "a", "X").is_err());
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert!(SampleSet::new(v, vec!["a".into(), "a".into()], "X").is_err());
    }

    #[test]
    fn json_is_row_major_with_labels() {
        let s = SampleSet::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.5]], "x", "X").unwrap();
        let js = serde_json::to_value(&s).unwrap();
        assert_eq!(js["column_labels"], serde_json::json!(["x1", "x2"]));
        assert_eq!(js["values"], serde_json::json!([[1.0, 2.0], [3.0, 4.5]]));
        let back: SampleSet = serde_json::from_value(js).unwrap();
        assert_eq!(back, s);
    }
}
