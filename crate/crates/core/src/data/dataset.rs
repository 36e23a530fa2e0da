use std::collections::HashMap;
use std::fs::File;
use std::path::Path;

use super::matrix::Matrix;
use super::schema::{FeatureKind, FeatureSchema, Task};
use crate::error::{Error, Result};

/// Training data: feature rows, interned class labels, and optional real targets.
///
/// Categorical values are stored in the matrix as their interned level id, so
/// every row is a plain `&[f64]` regardless of feature kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: FeatureSchema,
    values: Matrix,
    levels: Vec<Vec<String>>,
    labels: Vec<usize>,
    classes: Vec<String>,
    targets: Option<Vec<f64>>,
}

#[derive(Default)]
struct Interner {
    ids: HashMap<String, usize>,
    names: Vec<String>,
}

impl Interner {
    fn intern(&mut self, s: &str) -> usize {
        if let Some(&id) = self.ids.get(s) {
            return id;
        }
        let id = self.names.len();
        self.ids.insert(s.to_owned(), id);
        self.names.push(s.to_owned());
        id
    }
}

impl Dataset {
    /// Builds a dataset from already-encoded rows. `labels` index into `classes`.
    pub fn new(
        schema: FeatureSchema,
        values: Matrix,
        labels: Vec<usize>,
        classes: Vec<String>,
    ) -> Result<Self> {
        if values.rows() == 0 {
            return Err(Error::EmptyDataset);
        }
        if values.cols() != schema.len() {
            return Err(Error::DimensionMismatch {
                expected: schema.len(),
                found: values.cols(),
            });
        }
        if labels.len() != values.rows() {
            return Err(Error::DimensionMismatch {
                expected: values.rows(),
                found: labels.len(),
            });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= classes.len()) {
            return Err(Error::param("labels", format!("label id {bad} has no class name")));
        }
        let mut levels = vec![Vec::new(); schema.len()];
        for (f, feature) in schema.features().iter().enumerate() {
            for (row, r) in values.iter_rows().enumerate() {
                let v = r[f];
                if !v.is_finite() {
                    return Err(Error::NonFinite { row, feature: f });
                }
                if feature.kind == FeatureKind::Categorical {
                    if v < 0.0 || v.fract() != 0.0 {
                        return Err(Error::param(
                            "values",
                            format!("categorical feature {:?} holds non-id value {v}", feature.name),
                        ));
                    }
                    let id = v as usize;
                    let lv: &mut Vec<String> = &mut levels[f];
                    while lv.len() <= id {
                        lv.push(lv.len().to_string());
                    }
                }
            }
        }
        Ok(Dataset {
            schema,
            values,
            levels,
            labels,
            classes,
            targets: None,
        })
    }

    /// All-numeric classification dataset with class names `"0".."c-1"`.
    pub fn from_numeric(values: Matrix, labels: Vec<usize>) -> Result<Self> {
        let n_classes = labels.iter().copied().max().map_or(0, |m| m + 1);
        let classes = (0..n_classes).map(|c| c.to_string()).collect();
        let schema = FeatureSchema::numeric(values.cols())?;
        Dataset::new(schema, values, labels, classes)
    }

    /// Regression dataset; every sample shares the dummy class `"_"`.
    pub fn regression(schema: FeatureSchema, values: Matrix, targets: Vec<f64>) -> Result<Self> {
        let n = values.rows();
        let mut ds = Dataset::new(schema.with_task(Task::Regression), values, vec![0; n], vec!["_".into()])?;
        if targets.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: targets.len(),
            });
        }
        ds.targets = Some(targets);
        Ok(ds)
    }

    /// Reads a CSV file whose header names exactly the schema's features plus
    /// its label column, in any order. Row `i` of the file becomes sample `i`.
    pub fn load_csv(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_csv(file, schema)
    }

    pub fn read_csv<R: std::io::Read>(reader: R, schema: &FeatureSchema) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();

        let mut expected: Vec<String> = schema.features().iter().map(|f| f.name.clone()).collect();
        expected.push(schema.label_column().to_owned());
        let column_of = |name: &str| header.iter().position(|h| h == name);
        let positions: Option<Vec<usize>> = expected.iter().map(|n| column_of(n)).collect();
        let positions = match positions {
            Some(p) if header.len() == expected.len() => p,
            _ => {
                return Err(Error::HeaderMismatch {
                    expected,
                    found: header,
                })
            }
        };
        let (feature_cols, label_col) = positions.split_at(schema.len());
        let label_col = label_col[0];

        let kinds = schema.kinds();
        let mut interners: Vec<Interner> = (0..schema.len()).map(|_| Interner::default()).collect();
        let mut classes = Interner::default();
        let mut values = Vec::new();
        let mut labels = Vec::new();
        let mut targets = Vec::new();

        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            for (f, &col) in feature_cols.iter().enumerate() {
                let cell = record.get(col).unwrap_or("");
                let name = &schema.features()[f].name;
                if cell.is_empty() {
                    return Err(Error::MissingValue {
                        row: line,
                        column: name.clone(),
                    });
                }
                let v = match kinds[f] {
                    FeatureKind::Numeric => {
                        let v: f64 = cell.parse().map_err(|_| Error::ParseCell {
                            row: line,
                            column: name.clone(),
                            value: cell.to_owned(),
                        })?;
                        if !v.is_finite() {
                            return Err(Error::ParseCell {
                                row: line,
                                column: name.clone(),
                                value: cell.to_owned(),
                            });
                        }
                        v
                    }
                    FeatureKind::Categorical => interners[f].intern(cell) as f64,
                };
                values.push(v);
            }
            let label = record.get(label_col).unwrap_or("");
            if label.is_empty() {
                return Err(Error::MissingValue {
                    row: line,
                    column: schema.label_column().to_owned(),
                });
            }
            if schema.task() == Task::Regression {
                let t: f64 = label.parse().map_err(|_| Error::ParseCell {
                    row: line,
                    column: schema.label_column().to_owned(),
                    value: label.to_owned(),
                })?;
                targets.push(t);
                labels.push(0);
            } else {
                labels.push(classes.intern(label));
            }
        }
        if labels.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let classes = if schema.task() == Task::Regression {
            vec!["_".to_owned()]
        } else {
            classes.names
        };
        let mut ds = Dataset::new(
            schema.clone(),
            Matrix::new(values, schema.len())?,
            labels,
            classes,
        )?;
        ds.levels = interners.into_iter().map(|i| i.names).collect();
        if schema.task() == Task::Regression {
            ds.targets = Some(targets);
        }
        Ok(ds)
    }

    /// Writes the dataset back out as CSV with categorical levels restored.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<&str> = self.schema.features().iter().map(|f| f.name.as_str()).collect();
        header.push(self.schema.label_column());
        wtr.write_record(&header)?;
        let kinds = self.schema.kinds();
        for i in 0..self.len() {
            let mut rec: Vec<String> = self
                .row(i)
                .iter()
                .zip(&kinds)
                .enumerate()
                .map(|(f, (v, k))| match k {
                    FeatureKind::Numeric => format!("{v}"),
                    FeatureKind::Categorical => self.levels[f][*v as usize].clone(),
                })
                .collect();
            rec.push(match &self.targets {
                Some(t) => format!("{}", t[i]),
                None => self.classes[self.labels[i]].clone(),
            });
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|source| Error::Io {
            path: "<csv writer>".into(),
            source,
        })?;
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.values.cols()
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.values.row(i)
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn targets(&self) -> Option<&[f64]> {
        self.targets.as_deref()
    }

    /// Interned categorical levels for feature `f` (empty for numeric features).
    pub fn levels(&self, f: usize) -> &[String] {
        &self.levels[f]
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.n_classes()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Numeric view; fails if any feature is categorical.
    pub fn numeric_values(&self) -> Result<&Matrix> {
        match self.schema.features().iter().find(|f| f.kind != FeatureKind::Numeric) {
            Some(f) => Err(Error::NotNumeric(f.name.clone())),
            None => Ok(&self.values),
        }
    }

    /// Samples at `indices`, in that order; class and level tables are shared.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            values: self.values.select_rows(indices),
            levels: self.levels.clone(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            classes: self.classes.clone(),
            targets: self
                .targets
                .as_ref()
                .map(|t| indices.iter().map(|&i| t[i]).collect()),
        }
    }

    /// Keeps the features where `mask` is true.
    pub fn select_features(&self, mask: &[bool]) -> Result<Dataset> {
        let schema = self.schema.select(mask)?;
        Ok(Dataset {
            values: self.values.select_cols(mask),
            levels: self
                .levels
                .iter()
                .zip(mask)
                .filter(|(_, &m)| m)
                .map(|(l, _)| l.clone())
                .collect(),
            schema,
            labels: self.labels.clone(),
            classes: self.classes.clone(),
            targets: self.targets.clone(),
        })
    }

    /// Same rows and labels with new (e.g. normalised) feature values.
    pub(crate) fn with_values(&self, values: Matrix) -> Dataset {
        debug_assert_eq!(values.rows(), self.len());
        Dataset {
            values,
            ..self.clone()
        }
    }

    /// Replaces the labels, e.g. after injecting label noise.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Dataset> {
        if labels.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: labels.len(),
            });
        }
        if labels.iter().any(|&l| l >= self.n_classes()) {
            return Err(Error::param("labels", "label id out of range"));
        }
        Ok(Dataset {
            labels,
            ..self.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::Feature;

    fn schema() -> FeatureSchema {
        FeatureSchema::new(
            vec![Feature::numeric("Monthly_Sal"), Feature::numeric("Amount")],
            "Class",
        )
        .unwrap()
    }

    #[test]
    fn parses_two_rows() {
        let csv = "Monthly_Sal,Amount,Class\n1.5,200,O\n2.0,150,X\n";
        let ds = Dataset::read_csv(csv.as_bytes(), &schema()).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.row(1), &[2.0, 150.0]);
        assert_eq!(ds.classes(), &["O".to_string(), "X".to_string()]);
        assert_eq!(ds.labels(), &[0, 1]);
    }

    #[test]
    fn header_order_may_differ() {
        let csv = "Class,Amount,Monthly_Sal\nO,200,1.5\n";
        let ds = Dataset::read_csv(csv.as_bytes(), &schema()).unwrap();
        assert_eq!(ds.row(0), &[1.5, 200.0]);
    }

    #[test]
    fn bad_numeric_cell_names_row_and_column() {
        let csv = "Monthly_Sal,Amount,Class\n1.5,200,O\n2.0,abc,X\n";
        match Dataset::read_csv(csv.as_bytes(), &schema()) {
            Err(Error::ParseCell { row, column, value }) => {
                assert_eq!(row, 3);
                assert_eq!(column, "Amount");
                assert_eq!(value, "abc");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn header_only_is_empty() {
        let csv = "Monthly_Sal,Amount,Class\n";
        assert!(matches!(
            Dataset::read_csv(csv.as_bytes(), &schema()),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn header_mismatch() {
        let csv = "Salary,Amount,Class\n1,2,O\n";
        assert!(matches!(
            Dataset::read_csv(csv.as_bytes(), &schema()),
            Err(Error::HeaderMismatch { .. })
        ));
    }

    #[test]
    fn missing_value_is_an_error() {
        let csv = "Monthly_Sal,Amount,Class\n1,,O\n";
        assert!(matches!(
            Dataset::read_csv(csv.as_bytes(), &schema()),
            Err(Error::MissingValue { row: 2, .. })
        ));
    }

    #[test]
    fn missing_file() {
        assert!(matches!(
            Dataset::load_csv("/nonexistent/data.csv", &schema()),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn categorical_interning_and_write_back() {
        let schema = FeatureSchema::new(
            vec![Feature::numeric("v"), Feature::categorical("colour")],
            "y",
        )
        .unwrap();
        let csv = "v,colour,y\n0.2,red,a\n0.5,blue,b\n0.1,red,a\n";
        let ds = Dataset::read_csv(csv.as_bytes(), &schema).unwrap();
        assert_eq!(ds.row(0)[1], ds.row(2)[1]);
        assert_ne!(ds.row(0)[1], ds.row(1)[1]);
        let mut out = Vec::new();
        ds.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), csv);
    }

    #[test]
    fn regression_targets_parse() {
        let schema = FeatureSchema::new(vec![Feature::numeric("v")], "price")
            .unwrap()
            .with_task(Task::Regression);
        let csv = "v,price\n1,2.5\n2,4.0\n";
        let ds = Dataset::read_csv(csv.as_bytes(), &schema).unwrap();
        assert_eq!(ds.targets(), Some(&[2.5, 4.0][..]));
    }
}
