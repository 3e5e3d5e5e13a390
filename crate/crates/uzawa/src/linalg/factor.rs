//! Exact sparse factorizations: left-looking LU with partial pivoting
//! (Gilbert-Peierls) and an envelope Cholesky for symmetric positive
//! definite matrices. Natural ordering only; adequate at desk scale.

use crate::error::{Error, Result};
use crate::linalg::csr::CsrMatrix;

/// Sparse LU of a square matrix with partial (row) pivoting.
///
/// Factors P A = L U column by column. Each column is obtained from a sparse
/// triangular solve whose nonzero pattern comes from a depth-first search
/// over the partially built L, then the largest remaining entry is chosen
/// as pivot.
#[derive(Debug, Clone)]
pub struct SparseLu {
    n: usize,
    // L columns, unit diagonal implicit; row ids are original (unpermuted).
    l_colptr: Vec<usize>,
    l_rows: Vec<usize>,
    l_vals: Vec<f64>,
    // U columns in pivot coordinates; diagonal kept separately.
    u_colptr: Vec<usize>,
    u_rows: Vec<usize>,
    u_vals: Vec<f64>,
    u_diag: Vec<f64>,
    // original row -> pivot position
    pinv: Vec<usize>,
}

pub fn sparse_lu(a: &CsrMatrix) -> Result<SparseLu> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    let n = a.n_rows();
    let acsc = a.transpose(); // rows of Aᵀ are columns of A

    let mut lu = SparseLu {
        n,
        l_colptr: vec![0],
        l_rows: Vec::new(),
        l_vals: Vec::new(),
        u_colptr: vec![0],
        u_rows: Vec::new(),
        u_vals: Vec::new(),
        u_diag: vec![0.0; n],
        pinv: vec![usize::MAX; n],
    };

    let mut x = vec![0.0; n]; // dense accumulator, indexed by original row
    let mut marked = vec![false; n];
    let mut postorder: Vec<usize> = Vec::with_capacity(n);
    let mut stack: Vec<(usize, usize)> = Vec::new();

    for k in 0..n {
        // Scatter column k of A.
        let (col_rows, col_vals) = acsc.row(k);
        postorder.clear();
        for (&i, &v) in col_rows.iter().zip(col_vals) {
            x[i] = v;
        }

        // Depth-first search over the graph of L to find the pattern of
        // L⁻¹ A(:,k). Nodes are original rows; a row already pivotal at
        // column j points to the rows of L(:,j).
        for &s in col_rows {
            if marked[s] {
                continue;
            }
            marked[s] = true;
            stack.push((s, 0));
            while let Some(top) = stack.last_mut() {
                let (node, pos) = (top.0, top.1);
                let j = lu.pinv[node];
                if j == usize::MAX {
                    postorder.push(node);
                    stack.pop();
                    continue;
                }
                let lo = lu.l_colptr[j];
                let hi = lu.l_colptr[j + 1];
                let mut descended = false;
                let mut p = pos;
                while lo + p < hi {
                    let child = lu.l_rows[lo + p];
                    p += 1;
                    if !marked[child] {
                        marked[child] = true;
                        top.1 = p;
                        stack.push((child, 0));
                        descended = true;
                        break;
                    }
                }
                if !descended {
                    postorder.push(node);
                    stack.pop();
                }
            }
        }

        // Numeric sparse triangular solve in topological (reverse post-)order.
        for &node in postorder.iter().rev() {
            let j = lu.pinv[node];
            if j == usize::MAX {
                continue;
            }
            let xj = x[node];
            if xj != 0.0 {
                for p in lu.l_colptr[j]..lu.l_colptr[j + 1] {
                    x[lu.l_rows[p]] -= lu.l_vals[p] * xj;
                }
            }
        }

        // Partial pivoting over rows not yet pivotal.
        let mut ipiv = usize::MAX;
        let mut best = -1.0;
        for &i in postorder.iter() {
            if lu.pinv[i] == usize::MAX {
                let t = x[i].abs();
                if t > best {
                    best = t;
                    ipiv = i;
                }
            } else {
                lu.u_rows.push(lu.pinv[i]);
                lu.u_vals.push(x[i]);
            }
        }
        if ipiv == usize::MAX || best <= 0.0 {
            return Err(Error::Singular { pivot: k });
        }
        let pivot = x[ipiv];
        lu.pinv[ipiv] = k;
        lu.u_diag[k] = pivot;
        lu.u_colptr.push(lu.u_rows.len());

        for &i in postorder.iter() {
            if lu.pinv[i] == usize::MAX {
                lu.l_rows.push(i);
                lu.l_vals.push(x[i] / pivot);
            }
        }
        lu.l_colptr.push(lu.l_rows.len());

        // Reset workspaces touched this column.
        for &i in postorder.iter() {
            x[i] = 0.0;
            marked[i] = false;
        }
    }

    Ok(lu)
}

impl SparseLu {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "SparseLu::solve",
                expected: self.n,
                found: b.len(),
            });
        }
        // z = L̂⁻¹ (P b) in pivot coordinates
        let mut z = vec![0.0; self.n];
        for i in 0..self.n {
            z[self.pinv[i]] = b[i];
        }
        for j in 0..self.n {
            let zj = z[j];
            if zj != 0.0 {
                for p in self.l_colptr[j]..self.l_colptr[j + 1] {
                    z[self.pinv[self.l_rows[p]]] -= self.l_vals[p] * zj;
                }
            }
        }
        // x = U⁻¹ z
        for k in (0..self.n).rev() {
            z[k] /= self.u_diag[k];
            let xk = z[k];
            if xk != 0.0 {
                for p in self.u_colptr[k]..self.u_colptr[k + 1] {
                    z[self.u_rows[p]] -= self.u_vals[p] * xk;
                }
            }
        }
        Ok(z)
    }

    /// Solve Aᵀ y = c using the same factors.
    pub fn solve_transpose(&self, c: &[f64]) -> Result<Vec<f64>> {
        if c.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "SparseLu::solve_transpose",
                expected: self.n,
                found: c.len(),
            });
        }
        // Uᵀ w = c (forward; Uᵀ is lower triangular)
        let mut w = vec![0.0; self.n];
        for k in 0..self.n {
            let mut s = c[k];
            for p in self.u_colptr[k]..self.u_colptr[k + 1] {
                s -= self.u_vals[p] * w[self.u_rows[p]];
            }
            w[k] = s / self.u_diag[k];
        }
        // L̂ᵀ s = w (backward; unit diagonal)
        for j in (0..self.n).rev() {
            let mut s = w[j];
            for p in self.l_colptr[j]..self.l_colptr[j + 1] {
                s -= self.l_vals[p] * w[self.pinv[self.l_rows[p]]];
            }
            w[j] = s;
        }
        // y = Pᵀ s
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            y[i] = w[self.pinv[i]];
        }
        Ok(y)
    }
}

/// Envelope (skyline) Cholesky A = L Lᵀ for SPD matrices. The profile of A
/// is preserved under factorization, so each row of L is stored as the
/// contiguous span from its first nonzero column to the diagonal.
#[derive(Debug, Clone)]
pub struct SparseCholesky {
    n: usize,
    first: Vec<usize>,
    row_start: Vec<usize>,
    vals: Vec<f64>,
}

const CHOL_SYM_TOL: f64 = 1e-10;

pub fn sparse_cholesky(a: &CsrMatrix) -> Result<SparseCholesky> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    let scale = a.max_abs();
    if scale > 0.0 && !a.is_symmetric_within(CHOL_SYM_TOL * scale) {
        return Err(Error::NotSymmetric {
            context: "sparse_cholesky",
        });
    }
    let n = a.n_rows();
    let mut first = vec![0usize; n];
    for i in 0..n {
        let (cols, _) = a.row(i);
        first[i] = match cols.first() {
            Some(&c) => c.min(i),
            None => i,
        };
    }
    let mut row_start = vec![0usize; n + 1];
    for i in 0..n {
        row_start[i + 1] = row_start[i] + (i - first[i] + 1);
    }
    let mut vals = vec![0.0; row_start[n]];

    let at = |f: &SparseCholesky, i: usize, j: usize| -> f64 {
        // caller guarantees first[i] <= j <= i
        f.vals[f.row_start[i] + (j - f.first[i])]
    };

    let mut fac = SparseCholesky {
        n,
        first,
        row_start,
        vals: Vec::new(),
    };

    for i in 0..n {
        let fi = fac.first[i];
        for j in fi..=i {
            let mut s = a.get(i, j);
            let lo = fac.first[j].max(fi);
            for k in lo..j {
                s -=
                    vals[fac.row_start[i] + (k - fi)] * vals[fac.row_start[j] + (k - fac.first[j])];
            }
            if j == i {
                if s <= 0.0 {
                    return Err(Error::NotPositiveDefinite { pivot: i });
                }
                vals[fac.row_start[i] + (i - fi)] = s.sqrt();
            } else {
                let d = vals[fac.row_start[j] + (j - fac.first[j])];
                vals[fac.row_start[i] + (j - fi)] = s / d;
            }
        }
    }
    fac.vals = vals;
    let _ = at;
    Ok(fac)
}

impl SparseCholesky {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn l(&self, i: usize, j: usize) -> f64 {
        self.vals[self.row_start[i] + (j - self.first[i])]
    }

    /// Solve A x = b with A = L Lᵀ.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                context: "SparseCholesky::solve",
                expected: self.n,
                found: b.len(),
            });
        }
        let mut y = b.to_vec();
        for i in 0..self.n {
            let fi = self.first[i];
            let mut s = y[i];
            for j in fi..i {
                s -= self.l(i, j) * y[j];
            }
            y[i] = s / self.l(i, i);
        }
        for i in (0..self.n).rev() {
            let fi = self.first[i];
            y[i] /= self.l(i, i);
            let xi = y[i];
            for j in fi..i {
                y[j] -= self.l(i, j) * xi;
            }
        }
        Ok(y)
    }
}
