//! Seeded synthetic saddle-point systems with planted solutions and a
//! controllable departure-from-symmetry constant.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::compute_alpha;
use crate::error::{Error, Result};
use crate::linalg::csr::CsrMatrix;
use crate::linalg::dense::DenseMatrix;
use crate::system::SaddleSystem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub m: usize,
    /// Desired value of the nonsymmetry constant; the skew part is rescaled
    /// until the measured value lands within ±10 percent.
    #[serde(default = "default_target_alpha")]
    pub target_alpha: f64,
    /// Scale of the random skew-symmetric part before rescaling.
    #[serde(default = "default_skew")]
    pub skew_strength: f64,
    /// Rank of the PSD block D (0 gives D = 0 exactly).
    #[serde(default)]
    pub d_rank: usize,
    pub seed: u64,
}

fn default_target_alpha() -> f64 {
    1.0
}
fn default_skew() -> f64 {
    1.0
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.m == 0 || self.m > self.n {
            return Err(Error::InvalidConfig(format!(
                "need 1 <= m <= n, got n = {}, m = {}",
                self.n, self.m
            )));
        }
        if !(self.target_alpha.is_finite() && self.target_alpha >= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "target_alpha must be >= 1, got {}",
                self.target_alpha
            )));
        }
        if !(self.skew_strength.is_finite() && self.skew_strength >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "skew_strength must be nonnegative, got {}",
                self.skew_strength
            )));
        }
        if self.d_rank > self.m {
            return Err(Error::InvalidConfig(format!(
                "d_rank = {} exceeds m = {}",
                self.d_rank, self.m
            )));
        }
        Ok(())
    }
}

/// A generated system together with its planted exact solution.
#[derive(Debug, Clone)]
pub struct SyntheticSystem {
    pub system: SaddleSystem,
    pub x_star: Vec<f64>,
    pub y_star: Vec<f64>,
}

fn dense_to_csr(m: &DenseMatrix) -> Result<CsrMatrix> {
    let mut t = Vec::new();
    for i in 0..m.n_rows() {
        for j in 0..m.n_cols() {
            let v = m.get(i, j);
            if v != 0.0 {
                t.push((i, j, v));
            }
        }
    }
    CsrMatrix::from_triplets(m.n_rows(), m.n_cols(), &t)
}

/// Modified Gram-Schmidt orthonormalization of the columns, in place.
fn orthonormalize_columns(m: &mut DenseMatrix) -> Result<()> {
    let (rows, cols) = (m.n_rows(), m.n_cols());
    for j in 0..cols {
        for k in 0..j {
            let mut proj = 0.0;
            for i in 0..rows {
                proj += m.get(i, k) * m.get(i, j);
            }
            for i in 0..rows {
                m.set(i, j, m.get(i, j) - proj * m.get(i, k));
            }
        }
        let mut norm = 0.0;
        for i in 0..rows {
            norm += m.get(i, j) * m.get(i, j);
        }
        let norm = norm.sqrt();
        if norm < 1e-12 {
            return Err(Error::NoConvergence(
                "random matrix was numerically rank deficient".into(),
            ));
        }
        for i in 0..rows {
            m.set(i, j, m.get(i, j) / norm);
        }
    }
    Ok(())
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticSystem> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (n, m) = (spec.n, spec.m);

    // SPD part: Q diag(spectrum) Qᵀ with spectrum in [1, 3]
    let mut q = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            q.set(i, j, rng.gen::<f64>() * 2.0 - 1.0);
        }
    }
    orthonormalize_columns(&mut q)?;
    let spectrum: Vec<f64> = (0..n).map(|_| 1.0 + 2.0 * rng.gen::<f64>()).collect();
    let mut scaled = q.clone();
    for j in 0..n {
        for i in 0..n {
            scaled.set(i, j, scaled.get(i, j) * spectrum[j]);
        }
    }
    let s0 = scaled.matmul(&q.transpose());

    // skew part
    let mut k = DenseMatrix::zeros(n, n);
    if spec.skew_strength > 0.0 {
        let mut r = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                r.set(i, j, (rng.gen::<f64>() * 2.0 - 1.0) * spec.skew_strength);
            }
        }
        for i in 0..n {
            for j in 0..n {
                k.set(i, j, 0.5 * (r.get(i, j) - r.get(j, i)));
            }
        }
    }

    let assemble = |c: f64| -> Result<CsrMatrix> {
        let mut a = s0.clone();
        for i in 0..n {
            for j in 0..n {
                a.set(i, j, a.get(i, j) + c * k.get(i, j));
            }
        }
        dense_to_csr(&a)
    };

    // rescale the skew part until the measured constant is within band
    let band = |alpha: f64| alpha >= 0.9 * spec.target_alpha && alpha <= 1.1 * spec.target_alpha;
    let skew_absent = spec.skew_strength == 0.0 || k.max_abs() == 0.0;
    let mut scale = 0.0;
    if !skew_absent || spec.target_alpha > 1.0 {
        if skew_absent {
            if !band(1.0) {
                return Err(Error::NoConvergence(format!(
                    "cannot reach target_alpha = {} with zero skew part",
                    spec.target_alpha
                )));
            }
        } else {
            let alpha_of = |c: f64| -> Result<f64> { compute_alpha(&assemble(c)?, n) };
            if band(alpha_of(0.0)?) {
                scale = 0.0;
            } else {
                let mut lo = 0.0;
                let mut hi = 1.0;
                let mut grew = 0;
                while alpha_of(hi)? < spec.target_alpha {
                    hi *= 2.0;
                    grew += 1;
                    if grew > 60 {
                        return Err(Error::NoConvergence(
                            "skew rescaling failed to bracket the target".into(),
                        ));
                    }
                }
                let mut found = false;
                for _ in 0..100 {
                    let mid = 0.5 * (lo + hi);
                    let a = alpha_of(mid)?;
                    if band(a) {
                        scale = mid;
                        found = true;
                        break;
                    }
                    if a < spec.target_alpha {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                if !found {
                    return Err(Error::NoConvergence(format!(
                        "skew rescaling did not reach target_alpha = {} in 100 bisection steps",
                        spec.target_alpha
                    )));
                }
            }
        }
    }
    let a = assemble(scale)?;

    // B: orthonormal columns scaled into [1, 2] so the composite operators
    // stay moderately conditioned
    let mut b_dense = DenseMatrix::zeros(n, m);
    for i in 0..n {
        for j in 0..m {
            b_dense.set(i, j, rng.gen::<f64>() * 2.0 - 1.0);
        }
    }
    orthonormalize_columns(&mut b_dense)?;
    for j in 0..m {
        let s = 1.0 + rng.gen::<f64>();
        for i in 0..n {
            b_dense.set(i, j, b_dense.get(i, j) * s);
        }
    }
    let b = dense_to_csr(&b_dense)?;

    // D = LᵀL of the requested rank
    let d = if spec.d_rank == 0 {
        CsrMatrix::zeros(m, m)
    } else {
        let mut l = DenseMatrix::zeros(spec.d_rank, m);
        for i in 0..spec.d_rank {
            for j in 0..m {
                l.set(i, j, rng.gen::<f64>() - 0.5);
            }
        }
        dense_to_csr(&l.transpose().matmul(&l))?
    };

    let x_star: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
    let y_star: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();

    let ax = a.spmv(&x_star)?;
    let by = b.spmv(&y_star)?;
    let f: Vec<f64> = (0..n).map(|i| ax[i] + by[i]).collect();
    let btx = b.spmv_transpose(&x_star)?;
    let dy = d.spmv(&y_star)?;
    let g: Vec<f64> = (0..m).map(|i| btx[i] - dy[i]).collect();

    Ok(SyntheticSystem {
        system: SaddleSystem::new(a, b, d, f, g)?,
        x_star,
        y_star,
    })
}
