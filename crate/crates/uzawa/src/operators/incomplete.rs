//! Threshold-dropping incomplete factorizations.
//!
//! The drop rule is row-relative: during the elimination of row i, a fill
//! entry (a position not present in the row's original pattern) is discarded
//! when its magnitude is below `droptol * ||A(i,:)||_2`. Entries of the
//! original pattern are always kept, so `droptol = 0` reproduces the exact
//! factorization on matrices that need no pivoting.
//!
//! A pivot breakdown (nonpositive pivot in IC, zero pivot in ILU) is retried
//! on A + alpha*diag(A) with alpha doubling from 1e-3, up to 20 times; the
//! shift that succeeded is reported on the returned operator.

use crate::error::{Error, Result};
use crate::linalg::csr::CsrMatrix;
use crate::operators::LinearOperator;

const SHIFT_START: f64 = 1e-3;
const MAX_SHIFT_RETRIES: usize = 20;

fn row_norms(a: &CsrMatrix) -> Vec<f64> {
    (0..a.n_rows())
        .map(|i| {
            let (_, vals) = a.row(i);
            vals.iter().map(|v| v * v).sum::<f64>().sqrt()
        })
        .collect()
}

/// Incomplete Cholesky with threshold dropping; applies (L Lᵀ)⁻¹.
pub struct IncompleteCholesky {
    n: usize,
    // strictly-lower rows, sorted by column
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
    /// Diagonal shift that made the factorization succeed (0 when none).
    pub shift: f64,
    /// Number of shift retries consumed.
    pub retries: usize,
}

pub fn build_incomplete_cholesky(a: &CsrMatrix, droptol: f64) -> Result<IncompleteCholesky> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    if !droptol.is_finite() || droptol < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "drop tolerance must be nonnegative, got {droptol}"
        )));
    }
    let scale = a.max_abs();
    if scale > 0.0 && !a.is_symmetric_within(1e-10 * scale) {
        return Err(Error::NotSymmetric {
            context: "build_incomplete_cholesky",
        });
    }
    for i in 0..a.n_rows() {
        if a.get(i, i) <= 0.0 {
            return Err(Error::NotPositiveDefinite { pivot: i });
        }
    }

    let mut shift = 0.0;
    let mut alpha = SHIFT_START;
    let mut retries = 0usize;
    loop {
        let shifted;
        let target: &CsrMatrix = if shift == 0.0 {
            a
        } else {
            shifted = a.with_shifted_diag(shift);
            &shifted
        };
        match ic_factor(target, droptol) {
            Ok(mut f) => {
                f.shift = shift;
                f.retries = retries;
                return Ok(f);
            }
            Err(e @ Error::NotPositiveDefinite { .. }) => {
                if retries >= MAX_SHIFT_RETRIES {
                    return Err(e);
                }
                shift = alpha;
                alpha *= 2.0;
                retries += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

fn ic_factor(a: &CsrMatrix, droptol: f64) -> Result<IncompleteCholesky> {
    let n = a.n_rows();
    let norms = row_norms(a);

    let mut row_ptr = vec![0usize];
    let mut cols: Vec<usize> = Vec::new();
    let mut vals: Vec<f64> = Vec::new();
    let mut diag = vec![0.0; n];

    // first[i]: leftmost column of row i's pattern (capped at i); fill stays
    // inside this profile, so candidate columns range over [first[i], i).
    let mut first = vec![0usize; n];
    for i in 0..n {
        let (c, _) = a.row(i);
        first[i] = match c.first() {
            Some(&j) => j.min(i),
            None => i,
        };
    }

    for i in 0..n {
        let threshold = droptol * norms[i];
        let row_start = row_ptr[i];
        let mut sq_sum = 0.0;
        for j in first[i]..i {
            // s = A(i,j) - sum_k L(i,k) L(j,k), sparse dot over columns < j
            let mut s = a.get(i, j);
            {
                let (ri_cols, ri_vals) = (&cols[row_start..], &vals[row_start..]);
                let (rj_cols, rj_vals) = (
                    &cols[row_ptr[j]..row_ptr[j + 1]],
                    &vals[row_ptr[j]..row_ptr[j + 1]],
                );
                let (mut p, mut q) = (0usize, 0usize);
                while p < ri_cols.len() && q < rj_cols.len() {
                    if ri_cols[p] < rj_cols[q] {
                        p += 1;
                    } else if rj_cols[q] < ri_cols[p] {
                        q += 1;
                    } else {
                        s -= ri_vals[p] * rj_vals[q];
                        p += 1;
                        q += 1;
                    }
                }
            }
            if s == 0.0 {
                continue;
            }
            let lij = s / diag[j];
            let in_pattern = a.get(i, j) != 0.0;
            if in_pattern || lij.abs() >= threshold {
                cols.push(j);
                vals.push(lij);
                sq_sum += lij * lij;
            }
        }
        let radicand = a.get(i, i) - sq_sum;
        if radicand <= 0.0 {
            return Err(Error::NotPositiveDefinite { pivot: i });
        }
        diag[i] = radicand.sqrt();
        row_ptr.push(cols.len());
    }

    Ok(IncompleteCholesky {
        n,
        row_ptr,
        cols,
        vals,
        diag,
        shift: 0.0,
        retries: 0,
    })
}

impl LinearOperator for IncompleteCholesky {
    fn dim(&self) -> usize {
        self.n
    }
    fn symmetric(&self) -> bool {
        true
    }
    fn definite(&self) -> bool {
        true
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        // forward: L y = x
        let mut y = x.to_vec();
        for i in 0..self.n {
            let mut s = y[i];
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s -= self.vals[p] * y[self.cols[p]];
            }
            y[i] = s / self.diag[i];
        }
        // backward: Lᵀ out = y
        for i in (0..self.n).rev() {
            y[i] /= self.diag[i];
            let xi = y[i];
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                y[self.cols[p]] -= self.vals[p] * xi;
            }
        }
        out.copy_from_slice(&y);
    }
}

/// Threshold incomplete LU (no pivoting); applies (L U)⁻¹.
pub struct IncompleteLu {
    n: usize,
    // unit-lower rows (diagonal implicit)
    l_row_ptr: Vec<usize>,
    l_cols: Vec<usize>,
    l_vals: Vec<f64>,
    // strictly-upper rows
    u_row_ptr: Vec<usize>,
    u_cols: Vec<usize>,
    u_vals: Vec<f64>,
    u_diag: Vec<f64>,
    pub shift: f64,
    pub retries: usize,
}

pub fn build_ilu(a: &CsrMatrix, droptol: f64) -> Result<IncompleteLu> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    if !droptol.is_finite() || droptol < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "drop tolerance must be nonnegative, got {droptol}"
        )));
    }

    let mut shift = 0.0;
    let mut alpha = SHIFT_START;
    let mut retries = 0usize;
    loop {
        let shifted;
        let target: &CsrMatrix = if shift == 0.0 {
            a
        } else {
            shifted = a.with_shifted_diag(shift);
            &shifted
        };
        match ilu_factor(target, droptol) {
            Ok(mut f) => {
                f.shift = shift;
                f.retries = retries;
                return Ok(f);
            }
            Err(e @ Error::Singular { .. }) => {
                if retries >= MAX_SHIFT_RETRIES {
                    return Err(e);
                }
                shift = alpha;
                alpha *= 2.0;
                retries += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

fn ilu_factor(a: &CsrMatrix, droptol: f64) -> Result<IncompleteLu> {
    let n = a.n_rows();
    let norms = row_norms(a);

    let mut out = IncompleteLu {
        n,
        l_row_ptr: vec![0],
        l_cols: Vec::new(),
        l_vals: Vec::new(),
        u_row_ptr: vec![0],
        u_cols: Vec::new(),
        u_vals: Vec::new(),
        u_diag: vec![0.0; n],
        shift: 0.0,
        retries: 0,
    };

    // dense workspace with occupancy stamps
    let mut w = vec![0.0; n];
    let mut stamp = vec![usize::MAX; n];
    let mut upper_cols: Vec<usize> = Vec::new();

    for i in 0..n {
        let threshold = droptol * norms[i];
        let (cols_i, vals_i) = a.row(i);
        let mut active: Vec<usize> = Vec::new(); // columns < i, kept sorted
        upper_cols.clear();
        for (&j, &v) in cols_i.iter().zip(vals_i) {
            w[j] = v;
            stamp[j] = i;
            if j < i {
                active.push(j);
            } else {
                upper_cols.push(j);
            }
        }

        let mut pos = 0;
        while pos < active.len() {
            let k = active[pos];
            pos += 1;
            let piv = out.u_diag[k];
            if piv == 0.0 {
                return Err(Error::Singular { pivot: k });
            }
            let factor = w[k] / piv;
            let in_pattern = a.get(i, k) != 0.0;
            if !in_pattern && factor.abs() < threshold {
                w[k] = 0.0;
                continue;
            }
            w[k] = factor;
            // eliminate with row k of U
            for p in out.u_row_ptr[k]..out.u_row_ptr[k + 1] {
                let j = out.u_cols[p];
                let upd = factor * out.u_vals[p];
                if stamp[j] == i {
                    w[j] -= upd;
                } else {
                    stamp[j] = i;
                    w[j] = -upd;
                    if j < i {
                        // new candidate ahead of the sweep
                        let at = match active[pos..].binary_search(&j) {
                            Ok(q) | Err(q) => pos + q,
                        };
                        active.insert(at, j);
                    } else {
                        upper_cols.push(j);
                    }
                }
            }
        }

        // commit L row
        for &k in &active {
            if stamp[k] == i && w[k] != 0.0 {
                out.l_cols.push(k);
                out.l_vals.push(w[k]);
            }
        }
        out.l_row_ptr.push(out.l_cols.len());

        // commit U row
        upper_cols.sort_unstable();
        let mut diag = 0.0;
        for &j in upper_cols.iter() {
            if stamp[j] != i {
                continue;
            }
            let v = w[j];
            if j == i {
                diag = v;
                continue;
            }
            let in_pattern = a.get(i, j) != 0.0;
            if in_pattern || v.abs() >= threshold {
                out.u_cols.push(j);
                out.u_vals.push(v);
            }
        }
        out.u_row_ptr.push(out.u_cols.len());
        if diag == 0.0 {
            return Err(Error::Singular { pivot: i });
        }
        out.u_diag[i] = diag;

        for &j in active.iter().chain(upper_cols.iter()) {
            if stamp[j] == i {
                w[j] = 0.0;
            }
        }
    }

    Ok(out)
}

impl LinearOperator for IncompleteLu {
    fn dim(&self) -> usize {
        self.n
    }
    fn symmetric(&self) -> bool {
        false
    }
    fn definite(&self) -> bool {
        false
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        // forward: L y = x with unit diagonal
        let mut y = x.to_vec();
        for i in 0..self.n {
            let mut s = y[i];
            for p in self.l_row_ptr[i]..self.l_row_ptr[i + 1] {
                s -= self.l_vals[p] * y[self.l_cols[p]];
            }
            y[i] = s;
        }
        // backward: U out = y
        for i in (0..self.n).rev() {
            let mut s = y[i];
            for p in self.u_row_ptr[i]..self.u_row_ptr[i + 1] {
                s -= self.u_vals[p] * y[self.u_cols[p]];
            }
            y[i] = s / self.u_diag[i];
        }
        out.copy_from_slice(&y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::factor::{sparse_cholesky, sparse_lu};
    use crate::linalg::vec::norm2;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// 5-point Laplacian on an n-by-n grid.
    pub(crate) fn laplacian_2d(n: usize) -> CsrMatrix {
        let dim = n * n;
        let idx = |i: usize, j: usize| i * n + j;
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let r = idx(i, j);
                t.push((r, r, 4.0));
                if i > 0 {
                    t.push((r, idx(i - 1, j), -1.0));
                }
                if i + 1 < n {
                    t.push((r, idx(i + 1, j), -1.0));
                }
                if j > 0 {
                    t.push((r, idx(i, j - 1), -1.0));
                }
                if j + 1 < n {
                    t.push((r, idx(i, j + 1), -1.0));
                }
            }
        }
        CsrMatrix::from_triplets(dim, dim, &t).unwrap()
    }

    #[test]
    fn ic_diagonal_is_exact_for_any_droptol() {
        let a = CsrMatrix::from_diag(&[4.0, 9.0, 16.0]);
        let p = build_incomplete_cholesky(&a, 10.0).unwrap();
        let x = p.apply(&[4.0, 9.0, 16.0]).unwrap();
        assert_eq!(x, vec![1.0, 1.0, 1.0]);
        assert_eq!(p.shift, 0.0);
    }

    #[test]
    fn ic_droptol_zero_matches_exact_cholesky() {
        let n = 10;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 3.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let ic = build_incomplete_cholesky(&a, 0.0).unwrap();
        let exact = sparse_cholesky(&a).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let x1 = ic.apply(&b).unwrap();
            let x2 = exact.solve(&b).unwrap();
            for i in 0..n {
                assert!((x1[i] - x2[i]).abs() <= 1e-12 * x2[i].abs().max(1.0));
            }
        }
    }

    #[test]
    fn ic_on_laplacian_is_a_contraction() {
        let a = laplacian_2d(16);
        let p = build_incomplete_cholesky(&a, 1e-1).unwrap();
        // power iteration on v -> v - P⁻¹(Av)
        let n = a.n_rows();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let nv = norm2(&v);
        for x in v.iter_mut() {
            *x /= nv;
        }
        let mut rho = 0.0;
        for _ in 0..100 {
            let av = a.spmv(&v).unwrap();
            let pav = p.apply(&av).unwrap();
            let mut next: Vec<f64> = v.iter().zip(&pav).map(|(a, b)| a - b).collect();
            rho = norm2(&next);
            if rho == 0.0 {
                break;
            }
            for x in next.iter_mut() {
                *x /= rho;
            }
            v = next;
        }
        assert!(rho < 1.0, "estimated contraction factor {rho}");
    }

    #[test]
    fn ic_breakdown_retries_with_shift() {
        // symmetric, positive diagonal, but indefinite: IC must shift
        let a =
            CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)])
                .unwrap();
        let p = build_incomplete_cholesky(&a, 0.0).unwrap();
        assert!(p.shift > 0.0);
        assert!(p.retries > 0);
        // still a usable SPD action
        let x = p.apply(&[1.0, 1.0]).unwrap();
        assert!(x.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn ilu_droptol_zero_matches_exact_lu_without_pivoting() {
        // diagonally dominant so pivoting is a no-op
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 20;
        let mut t = Vec::new();
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                if i != j && rng.gen::<f64>() < 0.2 {
                    let v: f64 = rng.gen::<f64>() * 2.0 - 1.0;
                    sum += v.abs();
                    t.push((i, j, v));
                }
            }
            t.push((i, i, sum + 1.0));
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let ilu = build_ilu(&a, 0.0).unwrap();
        let lu = sparse_lu(&a).unwrap();
        let b: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let x1 = ilu.apply(&b).unwrap();
        let x2 = lu.solve(&b).unwrap();
        for i in 0..n {
            assert!((x1[i] - x2[i]).abs() <= 1e-12 * x2[i].abs().max(1.0));
        }
    }

    #[test]
    fn ilu_zero_pivot_shifts() {
        let a =
            CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)])
                .unwrap();
        // exact elimination gives a zero second pivot; the shift must rescue it
        let p = build_ilu(&a, 0.0).unwrap();
        assert!(p.shift > 0.0);
    }

    #[test]
    fn ilu_rejects_negative_droptol() {
        let a = CsrMatrix::identity(2);
        assert!(build_ilu(&a, -1.0).is_err());
        assert!(build_incomplete_cholesky(&a, f64::NAN).is_err());
    }
}
