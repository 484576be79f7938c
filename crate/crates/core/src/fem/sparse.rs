//! Compressed sparse row matrices and dense coefficient vectors.
//!
//! Assembly goes through [`Triplets`] (unordered scatter with duplicate
//! summation) or, on the hot path, through a reused matrix whose sparsity
//! pattern was built once per dof map.

use crate::scalar::Real;

/// Unordered `(row, col, value)` list; duplicates are summed on conversion.
#[derive(Debug, Clone)]
pub struct Triplets<T> {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Real> Triplets<T> {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(nrows: usize, ncols: usize, cap: usize) -> Self {
        Self {
            nrows,
            ncols,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn push(&mut self, row: usize, col: usize, value: T) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.entries.push((row, col, value));
    }

    pub fn to_csr(&self) -> CsrMatrix<T> {
        let mut entries = self.entries.clone();
        entries.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_counts = vec![0usize; self.nrows + 1];
        let mut col_idx = Vec::with_capacity(entries.len());
        let mut values: Vec<T> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_counts[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.nrows {
            row_counts[i + 1] += row_counts[i];
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr: row_counts,
            col_idx,
            values,
        }
    }
}

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> CsrMatrix<T> {
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    /// Entries of row `i` as `(col, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[range.clone()]
            .iter()
            .copied()
            .zip(self.values[range].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k],
            Err(_) => T::zero(),
        }
    }

    /// Build a matrix with the union sparsity pattern of per-row column sets.
    /// All values start at zero.
    pub fn from_pattern(nrows: usize, ncols: usize, rows: &[Vec<usize>]) -> Self {
        assert_eq!(rows.len(), nrows);
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for cols in rows {
            debug_assert!(cols.windows(2).all(|w| w[0] < w[1]), "pattern rows must be sorted+unique");
            col_idx.extend_from_slice(cols);
            row_ptr.push(col_idx.len());
        }
        let values = vec![T::zero(); col_idx.len()];
        Self {
            nrows,
            ncols,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn set_zero(&mut self) {
        for v in &mut self.values {
            *v = T::zero();
        }
    }

    /// Scatter-add into an existing entry; panics if `(i, j)` is outside the
    /// sparsity pattern.
    #[inline]
    pub fn add_at(&mut self, i: usize, j: usize, v: T) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[range.clone()].binary_search(&j) {
            Ok(k) => self.values[range.start + k] += v,
            Err(_) => panic!("entry ({i},{j}) not in sparsity pattern"),
        }
    }

    /// Overwrite a whole row with a single diagonal one (used for constrained
    /// rows). The remaining stored entries of the row are zeroed.
    pub fn set_row_to_identity(&mut self, i: usize) {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        let mut found = false;
        for k in range.clone() {
            self.values[k] = if self.col_idx[k] == i {
                found = true;
                T::one()
            } else {
                T::zero()
            };
        }
        assert!(found, "row {i} has no diagonal entry in the pattern");
        let _ = range;
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![T::zero(); self.nrows];
        for i in 0..self.nrows {
            let mut acc = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
        y
    }

    pub fn transpose(&self) -> CsrMatrix<T> {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_idx {
            counts[c + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let mut row_ptr = counts.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![T::zero(); self.nnz()];
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let c = self.col_idx[k];
                let slot = row_ptr[c];
                col_idx[slot] = i;
                values[slot] = self.values[k];
                row_ptr[c] += 1;
            }
        }
        CsrMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_ptr: counts,
            col_idx,
            values,
        }
    }

    /// Dense copy; intended for small matrices (analysis eigenproblems, tests).
    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut dense = vec![vec![T::zero(); self.ncols]; self.nrows];
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                dense[i][self.col_idx[k]] += self.values[k];
            }
        }
        dense
    }

    /// Plain-text dump (`row col value` per line) for debugging.
    pub fn write_plain<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "# {} {} {}", self.nrows, self.ncols, self.nnz())?;
        for i in 0..self.nrows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                writeln!(w, "{} {} {:e}", i, self.col_idx[k], self.values[k])?;
            }
        }
        Ok(())
    }
}

/// Euclidean norm of a coefficient vector.
pub fn norm2<T: Real>(x: &[T]) -> T {
    x.iter().map(|&v| v * v).sum::<T>().sqrt()
}

/// `y += alpha * x`.
pub fn axpy<T: Real>(alpha: T, x: &[T], y: &mut [T]) {
    assert_eq!(x.len(), y.len());
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
