use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix of `f64`, one row per sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    data: Vec<f64>,
    cols: usize,
}

impl Matrix {
    pub fn new(data: Vec<f64>, cols: usize) -> Result<Self> {
        if cols == 0 {
            return Err(Error::param("cols", "a matrix needs at least one column"));
        }
        if !data.len().is_multiple_of(cols) {
            return Err(Error::DimensionMismatch {
                expected: cols,
                found: data.len() % cols,
            });
        }
        Ok(Matrix { data, cols })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map(|r| r.as_ref().len()).ok_or(Error::EmptyDataset)?;
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            let row = row.as_ref();
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Matrix::new(data, cols)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.data.len() / self.cols
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn iter_rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.cols)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.iter_rows().map(|r| r[j]).collect()
    }

    /// Rows at `indices`, in that order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            data,
            cols: self.cols,
        }
    }

    /// Columns where `mask` is true. Panics if no column is kept.
    pub fn select_cols(&self, mask: &[bool]) -> Matrix {
        let cols = mask.iter().filter(|&&m| m).count();
        assert!(cols > 0, "at least one column must be selected");
        let mut data = Vec::with_capacity(self.rows() * cols);
        for row in self.iter_rows() {
            data.extend(row.iter().zip(mask).filter(|(_, &m)| m).map(|(v, _)| *v));
        }
        Matrix { data, cols }
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }
}
