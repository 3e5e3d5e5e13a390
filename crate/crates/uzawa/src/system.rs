//! The block saddle-point system
//!
//! ```text
//! [ A   B ] [x]   [f]
//! [ Bᵀ -D ] [y] = [g]
//! ```
//!
//! A is n-by-n and may be nonsymmetric, but its symmetric part must be
//! positive definite; B is n-by-m with m <= n; D is m-by-m symmetric
//! positive semidefinite. The second block row reads Bᵀx - Dy = g.

use crate::error::{Error, Result};
use crate::linalg::csr::CsrMatrix;
use crate::linalg::dense::{dense_eig_sym, DenseMatrix};
use crate::linalg::factor::sparse_cholesky;
use crate::linalg::vec::{all_finite, norm2};
use crate::DEFAULT_DENSE_CAP;

#[derive(Debug, Clone)]
pub struct SaddleSystem {
    a: CsrMatrix,
    b: CsrMatrix,
    d: CsrMatrix,
    f: Vec<f64>,
    g: Vec<f64>,
}

impl SaddleSystem {
    /// Validate and build. The symmetric-positive-definite check on the
    /// symmetric part of A and the PSD check on a non-diagonal D only run
    /// when the dimension is within `DEFAULT_DENSE_CAP`; above it the caller
    /// asserts those properties.
    pub fn new(a: CsrMatrix, b: CsrMatrix, d: CsrMatrix, f: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        Self::with_cap(a, b, d, f, g, DEFAULT_DENSE_CAP)
    }

    pub fn with_cap(
        a: CsrMatrix,
        b: CsrMatrix,
        d: CsrMatrix,
        f: Vec<f64>,
        g: Vec<f64>,
        cap: usize,
    ) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare {
                n_rows: a.n_rows(),
                n_cols: a.n_cols(),
            });
        }
        let n = a.n_rows();
        let m = b.n_cols();
        if b.n_rows() != n {
            return Err(Error::DimensionMismatch {
                context: "SaddleSystem: B rows",
                expected: n,
                found: b.n_rows(),
            });
        }
        if m > n {
            return Err(Error::InvalidStructure(format!(
                "constraint block wider than primal block: m = {m} > n = {n}"
            )));
        }
        if !d.is_square() || d.n_rows() != m {
            return Err(Error::DimensionMismatch {
                context: "SaddleSystem: D",
                expected: m,
                found: d.n_rows(),
            });
        }
        if f.len() != n {
            return Err(Error::DimensionMismatch {
                context: "SaddleSystem: f",
                expected: n,
                found: f.len(),
            });
        }
        if g.len() != m {
            return Err(Error::DimensionMismatch {
                context: "SaddleSystem: g",
                expected: m,
                found: g.len(),
            });
        }
        if !all_finite(&f) || !all_finite(&g) {
            return Err(Error::InvalidStructure(
                "right-hand side contains non-finite entries".into(),
            ));
        }
        if !all_finite(a.values()) || !all_finite(b.values()) || !all_finite(d.values()) {
            return Err(Error::InvalidStructure(
                "matrix contains non-finite entries".into(),
            ));
        }

        let d_scale = d.max_abs();
        if d.nnz() > 0 && d.asymmetry() > 1e-12 * d_scale.max(f64::MIN_POSITIVE) {
            return Err(Error::NotSymmetric {
                context: "SaddleSystem: D",
            });
        }
        // PSD check on D: trivial for empty or diagonal D, dense eigensolve
        // otherwise (within the cap).
        if d.nnz() > 0 {
            if d.is_diagonal() {
                for (row, &v) in d.diag().iter().enumerate() {
                    if v < -1e-10 * d_scale {
                        return Err(Error::NotPositiveDefinite { pivot: row });
                    }
                }
            } else if m <= cap {
                let dd = DenseMatrix::from_csr(&d);
                let (vals, _) = dense_eig_sym(&dd)?;
                let norm = vals.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
                if vals[0] < -1e-10 * norm {
                    return Err(Error::NotPositiveDefinite { pivot: 0 });
                }
            }
        }

        if n <= cap {
            let a_s = a.symmetric_part()?;
            sparse_cholesky(&a_s)?;
        }

        Ok(SaddleSystem { a, b, d, f, g })
    }

    pub fn a(&self) -> &CsrMatrix {
        &self.a
    }

    pub fn b(&self) -> &CsrMatrix {
        &self.b
    }

    pub fn d(&self) -> &CsrMatrix {
        &self.d
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    /// Primal dimension n.
    pub fn n(&self) -> usize {
        self.a.n_rows()
    }

    /// Multiplier dimension m.
    pub fn m(&self) -> usize {
        self.b.n_cols()
    }

    /// Block residual norms of an iterate:
    /// (‖f − Ax − By‖₂, ‖Bᵀx − Dy − g‖₂, combined).
    pub fn residuals(&self, x: &[f64], y: &[f64]) -> Result<(f64, f64, f64)> {
        let rx = self.residual_x(x, y)?;
        let ry = self.residual_y(x, y)?;
        let nx = norm2(&rx);
        let ny = norm2(&ry);
        Ok((nx, ny, (nx * nx + ny * ny).sqrt()))
    }

    /// f − Ax − By
    pub fn residual_x(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let ax = self.a.spmv(x)?;
        let by = self.b.spmv(y)?;
        Ok((0..self.n()).map(|i| self.f[i] - ax[i] - by[i]).collect())
    }

    /// Bᵀx − Dy − g
    pub fn residual_y(&self, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
        let btx = self.b.spmv_transpose(x)?;
        let dy = self.d.spmv(y)?;
        Ok((0..self.m()).map(|i| btx[i] - dy[i] - self.g[i]).collect())
    }

    /// sqrt(‖f‖² + ‖g‖²), the scale of the combined relative residual.
    pub fn rhs_norm(&self) -> f64 {
        let nf = norm2(&self.f);
        let ng = norm2(&self.g);
        (nf * nf + ng * ng).sqrt()
    }
}
