use super::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Compressed sparse row matrix.
///
/// Column indices are strictly increasing within each row and no explicit
/// zeros are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            offsets: vec![0; rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            offsets: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Builds from `(row, col, value)` triples. Duplicates are summed in
    /// input order; entries that end up exactly zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(r, c, _) in &sorted {
            if r >= rows || c >= cols {
                return Err(Error::DimensionMismatch(format!(
                    "entry ({r}, {c}) outside {rows}x{cols}"
                )));
            }
        }
        // Stable sort keeps duplicate summation in input order.
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(sorted.len());
        for (r, c, v) in sorted {
            match merged.last_mut() {
                Some(last) if (last.0, last.1) == (r, c) => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|&(_, _, v)| v != 0.0);
        let mut offsets = vec![0usize; rows + 1];
        for &(r, _, _) in &merged {
            offsets[r + 1] += 1;
        }
        for r in 0..rows {
            offsets[r + 1] += offsets[r];
        }
        let indices = merged.iter().map(|t| t.1).collect();
        let values = merged.iter().map(|t| t.2).collect();
        Ok(Self {
            rows,
            cols,
            offsets,
            indices,
            values,
        })
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut offsets = Vec::with_capacity(m.rows() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        offsets.push(0);
        for r in 0..m.rows() {
            for (c, &v) in m.row(r).iter().enumerate() {
                if v != 0.0 {
                    indices.push(c);
                    values.push(v);
                }
            }
            offsets.push(indices.len());
        }
        Self {
            rows: m.rows(),
            cols: m.cols(),
            offsets,
            indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Position range of row `r` inside `indices()`/`values()`.
    #[inline]
    pub fn row_range(&self, r: usize) -> std::ops::Range<usize> {
        self.offsets[r]..self.offsets[r + 1]
    }

    #[inline]
    pub fn row_indices(&self, r: usize) -> &[usize] {
        &self.indices[self.row_range(r)]
    }

    #[inline]
    pub fn row_values(&self, r: usize) -> &[f64] {
        &self.values[self.row_range(r)]
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let idx = self.row_indices(r);
        match idx.binary_search(&c) {
            Ok(p) => self.values[self.offsets[r] + p],
            Err(_) => 0.0,
        }
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            self.row_range(r)
                .map(move |p| (r, self.indices[p], self.values[p]))
        })
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.rows, self.cols);
        for (r, c, v) in self.iter() {
            m.set(r, c, v);
        }
        m
    }

    pub fn transpose(&self) -> Self {
        let triplets: Vec<_> = self.iter().map(|(r, c, v)| (c, r, v)).collect();
        Self::from_triplets(self.cols, self.rows, &triplets).expect("transpose stays in bounds")
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && self.iter().all(|(r, c, v)| self.get(c, r) == v)
    }

    /// Row sums, accumulated left to right.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|r| self.row_values(r).iter().sum())
            .collect()
    }

    /// Same sparsity pattern with every value replaced by `f(row, col, value)`.
    pub fn map_values(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let values = self.iter().map(|(r, c, v)| f(r, c, v)).collect();
        Self {
            values,
            ..self.clone()
        }
    }

    /// `self · dense`, each output row accumulated over stored entries in
    /// increasing column order.
    pub fn spmm(&self, dense: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != dense.rows() {
            return Err(Error::DimensionMismatch(format!(
                "spmm {}x{} by {:?}",
                self.rows,
                self.cols,
                dense.shape()
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, dense.cols());
        for r in 0..self.rows {
            let out_row = out.row_mut(r);
            for p in self.row_range(r) {
                let a = self.values[p];
                for (o, &b) in out_row.iter_mut().zip(dense.row(self.indices[p])) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · dense` without materializing the transpose.
    pub fn spmm_transpose(&self, dense: &DenseMatrix) -> Result<DenseMatrix> {
        if self.rows != dense.rows() {
            return Err(Error::DimensionMismatch(format!(
                "spmm_transpose ({}x{})ᵀ by {:?}",
                self.rows,
                self.cols,
                dense.shape()
            )));
        }
        let mut out = DenseMatrix::zeros(self.cols, dense.cols());
        for r in 0..self.rows {
            let src = dense.row(r);
            for p in self.row_range(r) {
                let a = self.values[p];
                let out_row = out.row_mut(self.indices[p]);
                for (o, &b) in out_row.iter_mut().zip(src) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }
}
