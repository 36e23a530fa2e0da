use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::matrix::Matrix;
use super::schema::FeatureKind;
use crate::error::{Error, Result};

/// Per-feature min–max ranges fitted on a training partition.
///
/// Categorical features carry no range and pass through untouched. A constant
/// feature (max = min) maps to 0. Query values outside the fitted range are
/// not clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    ranges: Vec<Option<(f64, f64)>>,
}

impl Normalizer {
    pub fn fit(data: &Dataset) -> Normalizer {
        let ranges = data
            .schema()
            .features()
            .iter()
            .enumerate()
            .map(|(f, feat)| match feat.kind {
                FeatureKind::Categorical => None,
                FeatureKind::Numeric => {
                    let (lo, hi) = data
                        .values()
                        .iter_rows()
                        .map(|r| r[f])
                        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                            (lo.min(v), hi.max(v))
                        });
                    Some((lo, hi))
                }
            })
            .collect();
        Normalizer { ranges }
    }

    pub fn ranges(&self) -> &[Option<(f64, f64)>] {
        &self.ranges
    }

    #[inline]
    fn scale(range: Option<(f64, f64)>, v: f64) -> f64 {
        match range {
            None => v,
            Some((lo, hi)) if hi > lo => (v - lo) / (hi - lo),
            Some(_) => 0.0,
        }
    }

    pub fn apply_row(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.ranges.len() {
            return Err(Error::DimensionMismatch {
                expected: self.ranges.len(),
                found: row.len(),
            });
        }
        Ok(row
            .iter()
            .zip(&self.ranges)
            .map(|(&v, &r)| Self::scale(r, v))
            .collect())
    }

    pub fn apply(&self, data: &Dataset) -> Result<Dataset> {
        let kinds = data.schema().kinds();
        let compatible = kinds.len() == self.ranges.len()
            && kinds
                .iter()
                .zip(&self.ranges)
                .all(|(k, r)| (*k == FeatureKind::Numeric) == r.is_some());
        if !compatible {
            return Err(Error::DimensionMismatch {
                expected: self.ranges.len(),
                found: kinds.len(),
            });
        }
        Ok(data.with_values(self.apply_matrix(data.values())?))
    }

    pub fn apply_matrix(&self, m: &Matrix) -> Result<Matrix> {
        if m.cols() != self.ranges.len() {
            return Err(Error::DimensionMismatch {
                expected: self.ranges.len(),
                found: m.cols(),
            });
        }
        let mut out = m.clone();
        let cols = m.cols();
        for (i, v) in out.data_mut().iter_mut().enumerate() {
            *v = Self::scale(self.ranges[i % cols], *v);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::schema::{Feature, FeatureSchema};

    fn column(vals: &[f64]) -> Dataset {
        let m = Matrix::new(vals.to_vec(), 1).unwrap();
        Dataset::from_numeric(m, vec![0; vals.len()]).unwrap()
    }

    #[test]
    fn endpoints_map_to_unit_interval() {
        let ds = column(&[2.0, 4.0, 6.0]);
        let nz = Normalizer::fit(&ds);
        assert_eq!(nz.apply(&ds).unwrap().values().as_slice(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let ds = column(&[5.0, 5.0, 5.0]);
        let nz = Normalizer::fit(&ds);
        assert_eq!(nz.apply(&ds).unwrap().values().as_slice(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn query_outside_range_is_not_clamped() {
        let nz = Normalizer::fit(&column(&[2.0, 4.0, 6.0]));
        // (8 - 2) / (6 - 2)
        assert_eq!(nz.apply_row(&[8.0]).unwrap(), vec![1.5]);
    }

    #[test]
    fn mismatched_row_is_rejected() {
        let nz = Normalizer::fit(&column(&[2.0, 4.0]));
        assert!(nz.apply_row(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn categorical_passes_through() {
        let schema = FeatureSchema::new(
            vec![Feature::numeric("a"), Feature::categorical("c")],
            "y",
        )
        .unwrap();
        let m = Matrix::new(vec![0.0, 1.0, 10.0, 0.0], 2).unwrap();
        let ds = Dataset::new(schema, m, vec![0, 0], vec!["k".into()]).unwrap();
        let out = Normalizer::fit(&ds).apply(&ds).unwrap();
        assert_eq!(out.values().as_slice(), &[0.0, 1.0, 1.0, 0.0]);
    }
}
