use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major matrix of MCMC draws (one row per retained iteration).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DrawMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidData("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data: rows.concat(),
        })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::InvalidData(format!(
                "{} values cannot fill a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.cols.max(1)).copied()
    }

    pub fn column_vec(&self, j: usize) -> Vec<f64> {
        self.column(j).collect()
    }

    pub fn column_means(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| self.column(j).sum::<f64>() / self.rows as f64)
            .collect()
    }

    /// Rows for which `keep` holds, in order.
    pub fn select_rows(&self, mut keep: impl FnMut(&[f64]) -> bool) -> (Self, Vec<usize>) {
        let mut data = Vec::new();
        let mut idx = Vec::new();
        for i in 0..self.rows {
            if keep(self.row(i)) {
                data.extend_from_slice(self.row(i));
                idx.push(i);
            }
        }
        (
            Self {
                rows: idx.len(),
                cols: self.cols,
                data,
            },
            idx,
        )
    }

    pub fn take_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }
}
