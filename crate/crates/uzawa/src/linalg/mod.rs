//! Sparse and dense linear-algebra primitives shared by the whole crate.

pub mod csr;
pub mod dense;
pub mod factor;
pub mod io;
pub mod vec;

pub use csr::CsrMatrix;
pub use dense::{
    dense_eig_sym, dense_generalized_eig_sym, spd_inverse_sqrt, DenseCholesky, DenseMatrix,
};
pub use factor::{sparse_cholesky, sparse_lu, SparseCholesky, SparseLu};
