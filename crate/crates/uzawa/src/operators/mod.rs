//! Preconditioners and composite Schur-block operators.
//!
//! Everything the iterations touch only through "apply to a vector" lives
//! behind [`LinearOperator`]: preconditioner inverses (Jacobi, incomplete
//! factorizations, exact factors, scaled identity) and the composite
//! operators Bᵀ·inner·B + D used for the adaptive relaxation parameter.

mod incomplete;

pub use incomplete::{build_ilu, build_incomplete_cholesky, IncompleteCholesky, IncompleteLu};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::csr::CsrMatrix;
use crate::linalg::dense::{DenseCholesky, DenseMatrix};
use crate::linalg::factor::{sparse_cholesky, sparse_lu, SparseCholesky, SparseLu};
use crate::linalg::vec::{dot, norm2};

/// Abstract "apply to a vector" contract. `symmetric` and `definite` are
/// claims made by the constructor; the test suite spot-checks them.
pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;
    fn symmetric(&self) -> bool;
    fn definite(&self) -> bool;
    fn apply_into(&self, x: &[f64], out: &mut [f64]);

    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "LinearOperator::apply",
                expected: self.dim(),
                found: x.len(),
            });
        }
        let mut out = vec![0.0; self.dim()];
        self.apply_into(x, &mut out);
        Ok(out)
    }
}

/// ⟨M x, y⟩ for a symmetric operator M.
pub fn m_inner(m: &dyn LinearOperator, x: &[f64], y: &[f64]) -> Result<f64> {
    if !m.symmetric() {
        return Err(Error::NotSymmetric { context: "m_inner" });
    }
    let mx = m.apply(x)?;
    if y.len() != mx.len() {
        return Err(Error::DimensionMismatch {
            context: "m_inner",
            expected: mx.len(),
            found: y.len(),
        });
    }
    Ok(dot(&mx, y))
}

/// sqrt(⟨M x, x⟩). A slightly negative radicand (roundoff on a positive
/// semidefinite operator) is clamped; anything below -1e-12 relative is an
/// error.
pub fn m_norm(m: &dyn LinearOperator, x: &[f64]) -> Result<f64> {
    if !m.symmetric() {
        return Err(Error::NotSymmetric { context: "m_norm" });
    }
    let mx = m.apply(x)?;
    let r = dot(&mx, x);
    if r >= 0.0 {
        return Ok(r.sqrt());
    }
    let scale = norm2(&mx) * norm2(x);
    if r >= -1e-12 * scale.max(f64::MIN_POSITIVE) {
        Ok(0.0)
    } else {
        Err(Error::OperatorNotPositive { context: "m_norm" })
    }
}

/// Preconditioner selection, as it appears in solver configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PreconditionerSpec {
    Jacobi,
    IluDroptol { droptol: f64 },
    IcDroptol { droptol: f64 },
    ExactFactor,
    ScaledIdentity { scale: f64 },
}

impl PreconditionerSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            PreconditionerSpec::IluDroptol { droptol }
            | PreconditionerSpec::IcDroptol { droptol }
                if !droptol.is_finite() || *droptol < 0.0 =>
            {
                Err(Error::InvalidConfig(format!(
                    "drop tolerance must be nonnegative, got {droptol}"
                )))
            }
            PreconditionerSpec::ScaledIdentity { scale } if !scale.is_finite() || *scale <= 0.0 => {
                Err(Error::InvalidConfig(format!(
                    "identity scale must be positive, got {scale}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Build the inverse action this spec describes for a (symmetric
    /// positive definite) matrix.
    pub fn build(&self, a: &CsrMatrix) -> Result<Box<dyn LinearOperator>> {
        self.validate()?;
        match self {
            PreconditionerSpec::Jacobi => Ok(Box::new(build_jacobi(a)?)),
            PreconditionerSpec::IluDroptol { droptol } => Ok(Box::new(build_ilu(a, *droptol)?)),
            PreconditionerSpec::IcDroptol { droptol } => {
                Ok(Box::new(build_incomplete_cholesky(a, *droptol)?))
            }
            PreconditionerSpec::ExactFactor => Ok(Box::new(build_exact_solver(a)?)),
            PreconditionerSpec::ScaledIdentity { scale } => {
                Ok(Box::new(build_scaled_identity(a.n_rows(), *scale)?))
            }
        }
    }
}

/// diag(A)⁻¹.
#[derive(Debug, Clone)]
pub struct JacobiInverse {
    inv_diag: Vec<f64>,
    definite: bool,
}

pub fn build_jacobi(a: &CsrMatrix) -> Result<JacobiInverse> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    let diag = a.diag();
    let mut inv = Vec::with_capacity(diag.len());
    let mut definite = true;
    for (row, &d) in diag.iter().enumerate() {
        if d == 0.0 {
            return Err(Error::ZeroDiagonal { row });
        }
        if d < 0.0 {
            definite = false;
        }
        inv.push(1.0 / d);
    }
    Ok(JacobiInverse {
        inv_diag: inv,
        definite,
    })
}

impl LinearOperator for JacobiInverse {
    fn dim(&self) -> usize {
        self.inv_diag.len()
    }
    fn symmetric(&self) -> bool {
        true
    }
    fn definite(&self) -> bool {
        self.definite
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            out[i] = self.inv_diag[i] * x[i];
        }
    }
}

/// (scale·I)⁻¹.
#[derive(Debug, Clone)]
pub struct ScaledIdentityInverse {
    dim: usize,
    inv_scale: f64,
}

pub fn build_scaled_identity(m: usize, scale: f64) -> Result<ScaledIdentityInverse> {
    if !scale.is_finite() || scale <= 0.0 {
        return Err(Error::InvalidConfig(format!(
            "identity scale must be positive, got {scale}"
        )));
    }
    Ok(ScaledIdentityInverse {
        dim: m,
        inv_scale: 1.0 / scale,
    })
}

impl LinearOperator for ScaledIdentityInverse {
    fn dim(&self) -> usize {
        self.dim
    }
    fn symmetric(&self) -> bool {
        true
    }
    fn definite(&self) -> bool {
        true
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..x.len() {
            out[i] = self.inv_scale * x[i];
        }
    }
}

/// A⁻¹ through a stored exact factorization. Symmetric input goes through
/// Cholesky when possible and falls back to pivoted LU otherwise.
pub enum ExactInverse {
    Cholesky(SparseCholesky),
    Lu { lu: SparseLu, symmetric: bool },
}

pub fn build_exact_solver(a: &CsrMatrix) -> Result<ExactInverse> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    let scale = a.max_abs();
    let symmetric = a.is_symmetric_within(1e-10 * scale.max(f64::MIN_POSITIVE));
    if symmetric {
        match sparse_cholesky(a) {
            Ok(f) => return Ok(ExactInverse::Cholesky(f)),
            Err(Error::NotPositiveDefinite { .. }) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(ExactInverse::Lu {
        lu: sparse_lu(a)?,
        symmetric,
    })
}

impl ExactInverse {
    /// A⁻ᵀ action; only the LU path distinguishes it from `apply`.
    pub fn apply_transpose(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            ExactInverse::Cholesky(f) => f.solve(x),
            ExactInverse::Lu { lu, .. } => lu.solve_transpose(x),
        }
    }
}

impl LinearOperator for ExactInverse {
    fn dim(&self) -> usize {
        match self {
            ExactInverse::Cholesky(f) => f.dim(),
            ExactInverse::Lu { lu, .. } => lu.dim(),
        }
    }
    fn symmetric(&self) -> bool {
        match self {
            ExactInverse::Cholesky(_) => true,
            ExactInverse::Lu { symmetric, .. } => *symmetric,
        }
    }
    fn definite(&self) -> bool {
        matches!(self, ExactInverse::Cholesky(_))
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let y = match self {
            ExactInverse::Cholesky(f) => f.solve(x),
            ExactInverse::Lu { lu, .. } => lu.solve(x),
        }
        .expect("dimension checked by caller");
        out.copy_from_slice(&y);
    }
}

/// The symmetric part of an inverse, ½(A⁻¹ + A⁻ᵀ), applied through a shared
/// LU factorization.
pub struct SymmetrizedInverse<'a> {
    lu: &'a SparseLu,
}

impl<'a> SymmetrizedInverse<'a> {
    pub fn new(lu: &'a SparseLu) -> Self {
        SymmetrizedInverse { lu }
    }
}

impl LinearOperator for SymmetrizedInverse<'_> {
    fn dim(&self) -> usize {
        self.lu.dim()
    }
    fn symmetric(&self) -> bool {
        true
    }
    fn definite(&self) -> bool {
        // positive definiteness holds whenever the symmetric part of the
        // factored matrix is positive definite; claimed by the caller's use
        true
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let a = self.lu.solve(x).expect("dimension checked by caller");
        let b = self
            .lu
            .solve_transpose(x)
            .expect("dimension checked by caller");
        for i in 0..out.len() {
            out[i] = 0.5 * (a[i] + b[i]);
        }
    }
}

/// Which composite Schur-block operator a [`SchurOperator`] represents.
///
/// All four share the shape v ↦ Bᵀ·inner(B v) + D v and differ in what
/// `inner` is: the inverse of the symmetric part (H), of the x-block
/// preconditioner (M), of the full nonsymmetric block (S), or the symmetric
/// part of that inverse (Ss).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchurKind {
    H,
    M,
    S,
    Ss,
}

/// v ↦ Bᵀ·inner(B v) + D v.
pub struct SchurOperator<'a> {
    b: &'a CsrMatrix,
    d: &'a CsrMatrix,
    inner: &'a dyn LinearOperator,
    kind: SchurKind,
}

pub fn schur_operator<'a>(
    b: &'a CsrMatrix,
    d: &'a CsrMatrix,
    inner: &'a dyn LinearOperator,
    kind: SchurKind,
) -> Result<SchurOperator<'a>> {
    if inner.dim() != b.n_rows() {
        return Err(Error::DimensionMismatch {
            context: "schur_operator inner",
            expected: b.n_rows(),
            found: inner.dim(),
        });
    }
    if !d.is_square() || d.n_rows() != b.n_cols() {
        return Err(Error::DimensionMismatch {
            context: "schur_operator d",
            expected: b.n_cols(),
            found: d.n_rows(),
        });
    }
    Ok(SchurOperator { b, d, inner, kind })
}

impl LinearOperator for SchurOperator<'_> {
    fn dim(&self) -> usize {
        self.b.n_cols()
    }
    fn symmetric(&self) -> bool {
        self.kind != SchurKind::S
    }
    fn definite(&self) -> bool {
        self.kind != SchurKind::S && self.inner.definite()
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let bv = self.b.spmv(x).expect("dimension checked by caller");
        let inner = self
            .inner
            .apply(&bv)
            .expect("inner dimension checked at build");
        self.b.spmv_transpose_into(&inner, out);
        let (n, m) = (self.d.n_rows(), self.d.n_cols());
        debug_assert_eq!((n, m), (x.len(), x.len()));
        for i in 0..n {
            let (cols, vals) = self.d.row(i);
            let mut acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            out[i] += acc;
        }
    }
}

/// Forward application of a sparse matrix as an operator; flags are supplied
/// by the caller.
pub struct MatrixOperator<'a> {
    a: &'a CsrMatrix,
    symmetric: bool,
    definite: bool,
}

impl<'a> MatrixOperator<'a> {
    pub fn new(a: &'a CsrMatrix, symmetric: bool, definite: bool) -> Self {
        MatrixOperator {
            a,
            symmetric,
            definite,
        }
    }
}

impl LinearOperator for MatrixOperator<'_> {
    fn dim(&self) -> usize {
        self.a.n_rows()
    }
    fn symmetric(&self) -> bool {
        self.symmetric
    }
    fn definite(&self) -> bool {
        self.definite
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        self.a.spmv_into(x, out);
    }
}

/// Forward application of an owned dense matrix.
pub struct DenseMatrixOperator {
    m: DenseMatrix,
    symmetric: bool,
    definite: bool,
}

impl DenseMatrixOperator {
    pub fn new(m: DenseMatrix, symmetric: bool, definite: bool) -> Self {
        DenseMatrixOperator {
            m,
            symmetric,
            definite,
        }
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.m
    }
}

impl LinearOperator for DenseMatrixOperator {
    fn dim(&self) -> usize {
        self.m.n_rows()
    }
    fn symmetric(&self) -> bool {
        self.symmetric
    }
    fn definite(&self) -> bool {
        self.definite
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.m.matvec(x));
    }
}

/// Inverse of an SPD dense matrix through its Cholesky factor.
pub struct DenseSolveOperator {
    chol: DenseCholesky,
}

impl DenseSolveOperator {
    pub fn new(spd: &DenseMatrix) -> Result<Self> {
        Ok(DenseSolveOperator {
            chol: spd.cholesky()?,
        })
    }
}

impl LinearOperator for DenseSolveOperator {
    fn dim(&self) -> usize {
        self.chol.dim()
    }
    fn symmetric(&self) -> bool {
        true
    }
    fn definite(&self) -> bool {
        true
    }
    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.chol.solve(x));
    }
}
