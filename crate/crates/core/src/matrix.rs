//! Dense column-major storage and column index sets.

use nalgebra::DMatrix;

use crate::error::{CssError, Result};

/// Dense real matrix with at least one row and one column and only finite entries.
///
/// Storage is column-major so that `column(j)` is a contiguous slice; every
/// algorithm in this crate streams over columns.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    inner: DMatrix<f64>,
}

impl Matrix {
    pub fn from_dmatrix(inner: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = inner.shape();
        if rows == 0 || cols == 0 {
            return Err(CssError::EmptyMatrix { rows, cols });
        }
        if let Some(pos) = inner.iter().position(|v| !v.is_finite()) {
            return Err(CssError::NonFinite {
                row: pos % rows,
                col: pos / rows,
            });
        }
        Ok(Self { inner })
    }

    /// Builds a matrix from column-major data.
    pub fn from_column_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(CssError::Dimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                data.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_vec(rows, cols, data))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != n) {
            return Err(CssError::Dimension(format!(
                "row {i} has {} entries, expected {n}",
                r.len()
            )));
        }
        Self::from_dmatrix(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
    }

    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let n = columns.len();
        let m = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != m) {
            return Err(CssError::Dimension("columns have unequal lengths".into()));
        }
        Self::from_column_major(m, n, columns.concat())
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::from_dmatrix(DMatrix::from_fn(rows, cols, f))
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::from_dmatrix(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_dmatrix(DMatrix::identity(n, n))
    }

    pub fn nrows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.inner[(row, col)]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let m = self.nrows();
        &self.inner.as_slice()[j * m..(j + 1) * m]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> {
        self.inner.as_slice().chunks_exact(self.nrows())
    }

    /// Column-major entries.
    pub fn as_slice(&self) -> &[f64] {
        self.inner.as_slice()
    }

    pub fn as_dmatrix(&self) -> &DMatrix<f64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<f64> {
        self.inner
    }

    pub fn transpose(&self) -> Matrix {
        Matrix {
            inner: self.inner.transpose(),
        }
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.inner.iter().map(|v| v * v).sum()
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sq().sqrt()
    }

    /// Sub-matrix made of the listed columns, in list order.
    pub fn select_columns(&self, set: &ColumnSet) -> Result<Matrix> {
        set.check_bounds(self.ncols())?;
        if set.is_empty() {
            return Err(CssError::InvalidColumns("cannot extract an empty column set".into()));
        }
        let mut data = Vec::with_capacity(self.nrows() * set.len());
        for &j in set.indices() {
            data.extend_from_slice(self.column(j));
        }
        Matrix::from_column_major(self.nrows(), set.len(), data)
    }

    /// Horizontal concatenation.
    pub fn hstack(blocks: &[&Matrix]) -> Result<Matrix> {
        let first = blocks
            .first()
            .ok_or_else(|| CssError::Dimension("nothing to concatenate".into()))?;
        let m = first.nrows();
        if blocks.iter().any(|b| b.nrows() != m) {
            return Err(CssError::Dimension("blocks have different row counts".into()));
        }
        let n = blocks.iter().map(|b| b.ncols()).sum();
        let mut data = Vec::with_capacity(m * n);
        for b in blocks {
            data.extend_from_slice(b.as_slice());
        }
        Matrix::from_column_major(m, n, data)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        if self.shape() != other.shape() {
            return Err(CssError::Dimension(format!(
                "cannot subtract {:?} from {:?}",
                other.shape(),
                self.shape()
            )));
        }
        Ok(Matrix {
            inner: &self.inner - &other.inner,
        })
    }

    pub fn mul(&self, other: &Matrix) -> Result<Matrix> {
        if self.ncols() != other.nrows() {
            return Err(CssError::Dimension(format!(
                "cannot multiply {:?} by {:?}",
                self.shape(),
                other.shape()
            )));
        }
        Ok(Matrix {
            inner: &self.inner * &other.inner,
        })
    }

    pub(crate) fn wrap(inner: DMatrix<f64>) -> Matrix {
        debug_assert!(inner.nrows() > 0 && inner.ncols() > 0);
        Matrix { inner }
    }
}

/// Ordered list of distinct 0-based column positions. The order records selection order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct ColumnSet {
    indices: Vec<usize>,
}

impl ColumnSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_indices(indices: Vec<usize>) -> Result<Self> {
        let mut seen = std::collections::HashSet::with_capacity(indices.len());
        for &i in &indices {
            if !seen.insert(i) {
                return Err(CssError::InvalidColumns(format!("index {i} appears twice")));
            }
        }
        Ok(Self { indices })
    }

    pub fn all(n: usize) -> Self {
        Self {
            indices: (0..n).collect(),
        }
    }

    pub fn push(&mut self, index: usize) -> Result<()> {
        if self.contains(index) {
            return Err(CssError::InvalidColumns(format!("index {index} already present")));
        }
        self.indices.push(index);
        Ok(())
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn into_indices(self) -> Vec<usize> {
        self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.contains(&index)
    }

    /// The set with its first `len` indices.
    pub fn prefix(&self, len: usize) -> ColumnSet {
        ColumnSet {
            indices: self.indices[..len.min(self.len())].to_vec(),
        }
    }

    /// Re-expresses local positions through a lookup table (e.g. partition-local to global).
    pub fn map_through(&self, table: &[usize]) -> ColumnSet {
        ColumnSet {
            indices: self.indices.iter().map(|&i| table[i]).collect(),
        }
    }

    pub fn check_bounds(&self, cols: usize) -> Result<()> {
        match self.indices.iter().find(|&&i| i >= cols) {
            Some(i) => Err(CssError::InvalidColumns(format!(
                "index {i} out of range for {cols} columns"
            ))),
            None => Ok(()),
        }
    }
}

impl From<ColumnSet> for Vec<usize> {
    fn from(set: ColumnSet) -> Self {
        set.indices
    }
}

// Plain sequential kernels. The greedy recursions rely on these being
// bit-reproducible for identical inputs, so no reassociation here.

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        acc += x * y;
    }
    acc
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// `M v` for a column-major matrix.
pub(crate) fn mat_vec(m: &Matrix, v: &[f64]) -> Vec<f64> {
    debug_assert_eq!(m.ncols(), v.len());
    let mut out = vec![0.0; m.nrows()];
    for (col, &vj) in m.columns().zip(v) {
        axpy(vj, col, &mut out);
    }
    out
}
