//! Compressed sparse row storage and the sparse kernels built on it.
//!
//! All kernels accumulate in row-major, index order so results are
//! bit-reproducible across runs of the same binary.

use crate::error::{Error, Result};

/// Sparse matrix in CSR form. Within each row the column indices are strictly
/// increasing; duplicate (row, col) pairs are rejected at construction.
/// Explicitly stored zeros are allowed.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from raw CSR arrays, validating the structural invariants.
    pub fn new(
        n_rows: usize,
        n_cols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != n_rows + 1 {
            return Err(Error::InvalidStructure(format!(
                "row_ptr length {} != n_rows + 1 = {}",
                row_ptr.len(),
                n_rows + 1
            )));
        }
        if row_ptr[0] != 0 {
            return Err(Error::InvalidStructure("row_ptr[0] must be 0".into()));
        }
        if col_idx.len() != values.len() {
            return Err(Error::InvalidStructure(format!(
                "col_idx length {} != values length {}",
                col_idx.len(),
                values.len()
            )));
        }
        if row_ptr[n_rows] != col_idx.len() {
            return Err(Error::InvalidStructure(format!(
                "row_ptr[n_rows] = {} != nnz = {}",
                row_ptr[n_rows],
                col_idx.len()
            )));
        }
        for i in 0..n_rows {
            if row_ptr[i] > row_ptr[i + 1] {
                return Err(Error::InvalidStructure(format!(
                    "row_ptr not nondecreasing at row {i}"
                )));
            }
            let row = &col_idx[row_ptr[i]..row_ptr[i + 1]];
            for (k, &c) in row.iter().enumerate() {
                if c >= n_cols {
                    return Err(Error::InvalidStructure(format!(
                        "column index {c} out of bounds in row {i} (n_cols = {n_cols})"
                    )));
                }
                if k > 0 && row[k - 1] >= c {
                    return Err(Error::InvalidStructure(format!(
                        "column indices not strictly increasing in row {i}"
                    )));
                }
            }
        }
        Ok(CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Build from (row, col, value) triplets. Entries are sorted into CSR
    /// order; duplicate positions are an error.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(r, c, _) in &entries {
            if r >= n_rows || c >= n_cols {
                return Err(Error::InvalidStructure(format!(
                    "triplet ({r}, {c}) out of bounds for {n_rows}x{n_cols}"
                )));
            }
        }
        entries.sort_by_key(|e| (e.0, e.1));
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::InvalidStructure(format!(
                    "duplicate entry at ({}, {})",
                    w[0].0, w[0].1
                )));
            }
        }
        let mut row_ptr = vec![0usize; n_rows + 1];
        for &(r, _, _) in &entries {
            row_ptr[r + 1] += 1;
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = entries.iter().map(|e| e.1).collect();
        let values = entries.iter().map(|e| e.2).collect();
        Ok(CsrMatrix {
            n_rows,
            n_cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Matrix with no stored entries.
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        CsrMatrix {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        CsrMatrix {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn is_square(&self) -> bool {
        self.n_rows == self.n_cols
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

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// Stored value at (i, j), or 0 if the position is not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(k) => vals[k],
            Err(_) => 0.0,
        }
    }

    /// Sparse matrix-vector product y = A x.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(Error::DimensionMismatch {
                context: "spmv",
                expected: self.n_cols,
                found: x.len(),
            });
        }
        let mut y = vec![0.0; self.n_rows];
        self.spmv_into(x, &mut y);
        Ok(y)
    }

    /// y = A x without allocation; caller guarantees dimensions.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_cols);
        debug_assert_eq!(y.len(), self.n_rows);
        for i in 0..self.n_rows {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = acc;
        }
    }

    /// y = Aᵀ x without materializing the transpose. The accumulation order
    /// (row-major over A) is fixed, so results are reproducible.
    pub fn spmv_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_rows {
            return Err(Error::DimensionMismatch {
                context: "spmv_transpose",
                expected: self.n_rows,
                found: x.len(),
            });
        }
        let mut y = vec![0.0; self.n_cols];
        self.spmv_transpose_into(x, &mut y);
        Ok(y)
    }

    pub fn spmv_transpose_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n_rows);
        debug_assert_eq!(y.len(), self.n_cols);
        for v in y.iter_mut() {
            *v = 0.0;
        }
        for i in 0..self.n_rows {
            let xi = x[i];
            if xi == 0.0 {
                continue;
            }
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.col_idx[k]] += self.values[k] * xi;
            }
        }
    }

    /// Explicit transpose. Kept crate-private: the solvers only ever need
    /// Aᵀx, which `spmv_transpose` provides without materialization.
    pub(crate) fn transpose(&self) -> CsrMatrix {
        let mut row_ptr = vec![0usize; self.n_cols + 1];
        for &c in &self.col_idx {
            row_ptr[c + 1] += 1;
        }
        for i in 0..self.n_cols {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut next = row_ptr.clone();
        let mut col_idx = vec![0usize; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let c = self.col_idx[k];
                let dst = next[c];
                col_idx[dst] = i;
                values[dst] = self.values[k];
                next[c] += 1;
            }
        }
        CsrMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Symmetric part ½(A + Aᵀ) with merged sparsity. The result is symmetric
    /// by construction: each (i, j)/(j, i) pair is computed once and mirrored.
    pub fn symmetric_part(&self) -> Result<CsrMatrix> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                n_rows: self.n_rows,
                n_cols: self.n_cols,
            });
        }
        let at = self.transpose();
        let n = self.n_rows;
        // Merge the patterns of A and Aᵀ row by row; emit the strict upper
        // triangle plus diagonal, then mirror.
        let mut triplets: Vec<(usize, usize, f64)> = Vec::with_capacity(self.nnz() * 2);
        for i in 0..n {
            let (ca, va) = self.row(i);
            let (cb, vb) = at.row(i);
            let (mut p, mut q) = (0usize, 0usize);
            while p < ca.len() || q < cb.len() {
                let (j, s) = if q >= cb.len() || (p < ca.len() && ca[p] < cb[q]) {
                    let e = (ca[p], 0.5 * va[p]);
                    p += 1;
                    e
                } else if p >= ca.len() || cb[q] < ca[p] {
                    let e = (cb[q], 0.5 * vb[q]);
                    q += 1;
                    e
                } else {
                    let e = (ca[p], 0.5 * (va[p] + vb[q]));
                    p += 1;
                    q += 1;
                    e
                };
                if j > i {
                    triplets.push((i, j, s));
                    triplets.push((j, i, s));
                } else if j == i {
                    triplets.push((i, i, s));
                }
            }
        }
        CsrMatrix::from_triplets(n, n, &triplets)
    }

    /// Max-column-sum norm ‖A‖₁.
    pub fn norm_one(&self) -> f64 {
        let mut col_sums = vec![0.0; self.n_cols];
        for k in 0..self.nnz() {
            col_sums[self.col_idx[k]] += self.values[k].abs();
        }
        col_sums.into_iter().fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest |a_ij − a_ji| over all stored positions.
    pub fn asymmetry(&self) -> f64 {
        let at = self.transpose();
        let mut worst: f64 = 0.0;
        for i in 0..self.n_rows {
            let (ca, va) = self.row(i);
            let (cb, vb) = at.row(i);
            let (mut p, mut q) = (0usize, 0usize);
            while p < ca.len() || q < cb.len() {
                if q >= cb.len() || (p < ca.len() && ca[p] < cb[q]) {
                    worst = worst.max(va[p].abs());
                    p += 1;
                } else if p >= ca.len() || cb[q] < ca[p] {
                    worst = worst.max(vb[q].abs());
                    q += 1;
                } else {
                    worst = worst.max((va[p] - vb[q]).abs());
                    p += 1;
                    q += 1;
                }
            }
        }
        worst
    }

    pub fn is_symmetric_within(&self, tol: f64) -> bool {
        self.is_square() && self.asymmetry() <= tol
    }

    /// True when every stored entry lies on the diagonal.
    pub fn is_diagonal(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.n_rows {
            let (cols, _) = self.row(i);
            if !cols.iter().all(|&c| c == i) {
                return false;
            }
        }
        true
    }

    /// Copy of the main diagonal (zeros where not stored).
    pub fn diag(&self) -> Vec<f64> {
        let n = self.n_rows.min(self.n_cols);
        (0..n).map(|i| self.get(i, i)).collect()
    }

    /// A + shift·diag(A), used by the incomplete-factorization retry loop.
    pub(crate) fn with_shifted_diag(&self, shift: f64) -> CsrMatrix {
        let mut out = self.clone();
        for i in 0..out.n_rows.min(out.n_cols) {
            let lo = out.row_ptr[i];
            let hi = out.row_ptr[i + 1];
            if let Ok(k) = out.col_idx[lo..hi].binary_search(&i) {
                out.values[lo + k] *= 1.0 + shift;
            }
        }
        out
    }

    /// Scale all stored values by `c`.
    pub fn scaled(&self, c: f64) -> CsrMatrix {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= c;
        }
        out
    }
}
