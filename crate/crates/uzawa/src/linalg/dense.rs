//! Dense workspace for the desk-scale spectral diagnostics: row-major
//! matrices, a cyclic Jacobi eigensolver, Cholesky, and the symmetric
//! generalized eigenproblem reduced through the Cholesky factor.

use crate::error::{Error, Result};
use crate::linalg::csr::CsrMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix {
            n_rows,
            n_cols,
            data: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n_rows = rows.len();
        let n_cols = if n_rows > 0 { rows[0].len() } else { 0 };
        let mut data = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            assert_eq!(r.len(), n_cols);
            data.extend_from_slice(r);
        }
        DenseMatrix {
            n_rows,
            n_cols,
            data,
        }
    }

    pub fn from_csr(a: &CsrMatrix) -> Self {
        let mut m = Self::zeros(a.n_rows(), a.n_cols());
        for i in 0..a.n_rows() {
            let (cols, vals) = a.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n_cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n_cols);
        let mut y = vec![0.0; self.n_rows];
        for i in 0..self.n_rows {
            let mut acc = 0.0;
            for j in 0..self.n_cols {
                acc += self.get(i, j) * x[j];
            }
            y[i] = acc;
        }
        y
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_cols, other.n_rows);
        let mut out = DenseMatrix::zeros(self.n_rows, other.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let aik = self.get(i, k);
                if aik == 0.0 {
                    continue;
                }
                for j in 0..other.n_cols {
                    out.data[i * out.n_cols + j] += aik * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.n_rows, self.n_cols);
        let mut worst: f64 = 0.0;
        for i in 0..self.n_rows {
            for j in (i + 1)..self.n_cols {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Dense Cholesky A = LLᵀ (lower factor). Fails on the first nonpositive
    /// pivot, reporting its index.
    pub fn cholesky(&self) -> Result<DenseCholesky> {
        if self.n_rows != self.n_cols {
            return Err(Error::NotSquare {
                n_rows: self.n_rows,
                n_cols: self.n_cols,
            });
        }
        let n = self.n_rows;
        let mut l = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let mut s = self.get(i, j);
                for k in 0..j {
                    s -= l.get(i, k) * l.get(j, k);
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(Error::NotPositiveDefinite { pivot: i });
                    }
                    l.set(i, i, s.sqrt());
                } else {
                    l.set(i, j, s / l.get(j, j));
                }
            }
        }
        Ok(DenseCholesky { l })
    }
}

/// Lower-triangular Cholesky factor with forward/backward solves.
#[derive(Debug, Clone)]
pub struct DenseCholesky {
    l: DenseMatrix,
}

impl DenseCholesky {
    pub fn dim(&self) -> usize {
        self.l.n_rows()
    }

    pub fn factor(&self) -> &DenseMatrix {
        &self.l
    }

    /// Solve L y = b.
    pub fn solve_lower(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                y[i] -= self.l.get(i, k) * y[k];
            }
            y[i] /= self.l.get(i, i);
        }
        y
    }

    /// Solve Lᵀ x = b.
    pub fn solve_lower_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            x[i] /= self.l.get(i, i);
            for k in 0..i {
                x[k] -= self.l.get(i, k) * x[i];
            }
        }
        x
    }

    /// Solve A x = b with A = LLᵀ.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        self.solve_lower_transpose(&self.solve_lower(b))
    }
}

/// Relative asymmetry gate used by the symmetric eigensolvers.
const SYM_TOL: f64 = 1e-10;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Eigenvalues (ascending) and eigenvectors (columns, same order) of a
/// symmetric matrix, by cyclic Jacobi rotations. Rotated entries are zeroed
/// explicitly and negligibly small ones are flushed to zero, so the sweep
/// loop terminates on an exactly zero off-diagonal sum.
pub fn dense_eig_sym(m: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    if m.n_rows() != m.n_cols() {
        return Err(Error::NotSquare {
            n_rows: m.n_rows(),
            n_cols: m.n_cols(),
        });
    }
    let scale = m.max_abs();
    if scale > 0.0 && m.asymmetry() > SYM_TOL * scale {
        return Err(Error::NotSymmetric {
            context: "dense_eig_sym",
        });
    }
    let n = m.n_rows();
    // Work on the exact symmetrization; only the upper triangle is updated.
    let mut a = m.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    let mut v = DenseMatrix::identity(n);
    let mut d: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    let mut b = d.clone();
    let mut z = vec![0.0; n];

    for sweep in 0..JACOBI_MAX_SWEEPS {
        let mut sm = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                sm += a.get(p, q).abs();
            }
        }
        if sm == 0.0 {
            let mut pairs: Vec<(f64, usize)> = d.iter().cloned().zip(0..n).collect();
            pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
            let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let mut vectors = DenseMatrix::zeros(n, n);
            for (new_col, &(_, old_col)) in pairs.iter().enumerate() {
                for r in 0..n {
                    vectors.set(r, new_col, v.get(r, old_col));
                }
            }
            return Ok((eigenvalues, vectors));
        }
        let tresh = if sweep < 3 {
            0.2 * sm / ((n * n) as f64)
        } else {
            0.0
        };
        for p in 0..(n - 1) {
            for q in (p + 1)..n {
                let g = 100.0 * a.get(p, q).abs();
                if sweep > 3 && d[p].abs() + g == d[p].abs() && d[q].abs() + g == d[q].abs() {
                    a.set(p, q, 0.0);
                    continue;
                }
                if a.get(p, q).abs() <= tresh {
                    continue;
                }
                let mut h = d[q] - d[p];
                let t = if h.abs() + g == h.abs() {
                    a.get(p, q) / h
                } else {
                    let theta = 0.5 * h / a.get(p, q);
                    let mut t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        t = -t;
                    }
                    t
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                h = t * a.get(p, q);
                z[p] -= h;
                z[q] += h;
                d[p] -= h;
                d[q] += h;
                a.set(p, q, 0.0);
                for j in 0..p {
                    let g = a.get(j, p);
                    let h = a.get(j, q);
                    a.set(j, p, g - s * (h + g * tau));
                    a.set(j, q, h + s * (g - h * tau));
                }
                for j in (p + 1)..q {
                    let g = a.get(p, j);
                    let h = a.get(j, q);
                    a.set(p, j, g - s * (h + g * tau));
                    a.set(j, q, h + s * (g - h * tau));
                }
                for j in (q + 1)..n {
                    let g = a.get(p, j);
                    let h = a.get(q, j);
                    a.set(p, j, g - s * (h + g * tau));
                    a.set(q, j, h + s * (g - h * tau));
                }
                for j in 0..n {
                    let g = v.get(j, p);
                    let h = v.get(j, q);
                    v.set(j, p, g - s * (h + g * tau));
                    v.set(j, q, h + s * (g - h * tau));
                }
            }
        }
        for p in 0..n {
            b[p] += z[p];
            z[p] = 0.0;
            d[p] = b[p];
        }
    }
    Err(Error::NoConvergence(
        "Jacobi eigensolver exceeded sweep limit".into(),
    ))
}

/// Eigenvalues (ascending) of the symmetric pencil M v = λ N v with N SPD,
/// via N = LLᵀ and the similar standard problem L⁻¹ M L⁻ᵀ.
pub fn dense_generalized_eig_sym(m: &DenseMatrix, n_mat: &DenseMatrix) -> Result<Vec<f64>> {
    if m.n_rows() != n_mat.n_rows() || m.n_cols() != n_mat.n_cols() {
        return Err(Error::DimensionMismatch {
            context: "dense_generalized_eig_sym",
            expected: m.n_rows(),
            found: n_mat.n_rows(),
        });
    }
    let scale = m.max_abs();
    if scale > 0.0 && m.asymmetry() > SYM_TOL * scale {
        return Err(Error::NotSymmetric {
            context: "dense_generalized_eig_sym",
        });
    }
    let chol = n_mat.cholesky()?;
    let dim = m.n_rows();
    // C = L⁻¹ M L⁻ᵀ, built column by column.
    let mut c = DenseMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut e = vec![0.0; dim];
        e[j] = 1.0;
        let linv_t_col = chol.solve_lower_transpose(&e);
        let m_col = m.matvec(&linv_t_col);
        let col = chol.solve_lower(&m_col);
        for i in 0..dim {
            c.set(i, j, col[i]);
        }
    }
    // Roundoff can leave C slightly asymmetric; symmetrize before Jacobi.
    for i in 0..dim {
        for j in (i + 1)..dim {
            let v = 0.5 * (c.get(i, j) + c.get(j, i));
            c.set(i, j, v);
            c.set(j, i, v);
        }
    }
    let (vals, _) = dense_eig_sym(&c)?;
    Ok(vals)
}

/// V diag(λ^(-1/2)) Vᵀ for an SPD matrix; errors if any eigenvalue is
/// nonpositive.
pub fn spd_inverse_sqrt(m: &DenseMatrix) -> Result<DenseMatrix> {
    spd_power_half(m, true)
}

/// V diag(λ^(1/2)) Vᵀ for an SPD matrix.
pub fn spd_sqrt(m: &DenseMatrix) -> Result<DenseMatrix> {
    spd_power_half(m, false)
}

fn spd_power_half(m: &DenseMatrix, inverse: bool) -> Result<DenseMatrix> {
    let (vals, vecs) = dense_eig_sym(m)?;
    let n = m.n_rows();
    if vals.iter().any(|&l| l <= 0.0) {
        return Err(Error::NotPositiveDefinite {
            pivot: vals.iter().position(|&l| l <= 0.0).unwrap(),
        });
    }
    let mut scaled = vecs.clone();
    for j in 0..n {
        let f = if inverse {
            1.0 / vals[j].sqrt()
        } else {
            vals[j].sqrt()
        };
        for i in 0..n {
            scaled.set(i, j, scaled.get(i, j) * f);
        }
    }
    Ok(scaled.matmul(&vecs.transpose()))
}
