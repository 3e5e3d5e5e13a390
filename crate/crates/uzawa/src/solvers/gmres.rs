//! Restarted GMRES on the full block system, without preconditioning.
//! Used only as an external baseline in the experiment harness.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::vec::norm2;
use crate::solvers::{IterationTrace, Solution, SolveStatus, TraceMetadata, TraceRecord};
use crate::system::SaddleSystem;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GmresParams {
    #[serde(default = "default_restart")]
    pub restart: usize,
    #[serde(default = "default_gmres_tol")]
    pub tol: f64,
    #[serde(default = "default_gmres_max_iter")]
    pub max_iter: usize,
}

fn default_restart() -> usize {
    100
}
fn default_gmres_tol() -> f64 {
    1e-6
}
fn default_gmres_max_iter() -> usize {
    20_000
}

impl Default for GmresParams {
    fn default() -> Self {
        GmresParams {
            restart: default_restart(),
            tol: default_gmres_tol(),
            max_iter: default_gmres_max_iter(),
        }
    }
}

fn block_apply(sys: &SaddleSystem, z: &[f64]) -> Result<Vec<f64>> {
    let (n, m) = (sys.n(), sys.m());
    let (x, y) = z.split_at(n);
    let ax = sys.a().spmv(x)?;
    let by = sys.b().spmv(y)?;
    let btx = sys.b().spmv_transpose(x)?;
    let dy = sys.d().spmv(y)?;
    let mut out = vec![0.0; n + m];
    for i in 0..n {
        out[i] = ax[i] + by[i];
    }
    for i in 0..m {
        out[n + i] = btx[i] - dy[i];
    }
    Ok(out)
}

/// Solve the block system with restarted GMRES. The trace records the true
/// block residuals of the reconstructed iterate at every Arnoldi step.
pub fn gmres_block(
    sys: &SaddleSystem,
    params: &GmresParams,
    x0: Option<&[f64]>,
    y0: Option<&[f64]>,
) -> Result<Solution> {
    if params.restart == 0 {
        return Err(Error::InvalidConfig("gmres restart must be >= 1".into()));
    }
    if !(params.tol.is_finite() && params.tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "gmres tol must be positive, got {}",
            params.tol
        )));
    }
    let (n, m) = (sys.n(), sys.m());
    let dim = n + m;
    let mut z = vec![0.0; dim];
    if let Some(x) = x0 {
        if x.len() != n {
            return Err(Error::DimensionMismatch {
                context: "gmres: x0",
                expected: n,
                found: x.len(),
            });
        }
        z[..n].copy_from_slice(x);
    }
    if let Some(y) = y0 {
        if y.len() != m {
            return Err(Error::DimensionMismatch {
                context: "gmres: y0",
                expected: m,
                found: y.len(),
            });
        }
        z[n..].copy_from_slice(y);
    }

    let mut rhs = vec![0.0; dim];
    rhs[..n].copy_from_slice(sys.f());
    rhs[n..].copy_from_slice(sys.g());
    let threshold = params.tol * sys.rhs_norm();

    let mut records = Vec::new();
    let record = |records: &mut Vec<TraceRecord>,
                  iter: usize,
                  sys: &SaddleSystem,
                  z: &[f64],
                  wall: u64|
     -> Result<f64> {
        let (rx, ry, rc) = sys.residuals(&z[..n], &z[n..])?;
        records.push(TraceRecord {
            iter,
            res_x: rx,
            res_y: ry,
            res_combined: rc,
            tau: None,
            omega: None,
            wall_ns: wall,
        });
        Ok(rc)
    };

    let rc0 = record(&mut records, 0, sys, &z, 0)?;
    let mut status = if rc0 <= threshold {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIter
    };

    let k_max = params.restart;
    let mut total_steps = 0usize;
    'outer: while status != SolveStatus::Converged && total_steps < params.max_iter {
        // residual of the current iterate
        let az = block_apply(sys, &z)?;
        let r0: Vec<f64> = rhs.iter().zip(&az).map(|(b, a)| b - a).collect();
        let beta = norm2(&r0);
        if beta == 0.0 {
            status = SolveStatus::Converged;
            break;
        }
        let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k_max + 1);
        basis.push(r0.iter().map(|v| v / beta).collect());
        // Hessenberg columns after Givens rotations, plus rotation parts
        let mut h_cols: Vec<Vec<f64>> = Vec::with_capacity(k_max);
        let mut cs = Vec::with_capacity(k_max);
        let mut sn = Vec::with_capacity(k_max);
        let mut gvec = vec![0.0; k_max + 1];
        gvec[0] = beta;

        for k in 0..k_max {
            if total_steps >= params.max_iter {
                break 'outer;
            }
            let t0 = std::time::Instant::now();
            total_steps += 1;

            // Arnoldi step with modified Gram-Schmidt
            let mut w = block_apply(sys, &basis[k])?;
            let mut h = vec![0.0; k + 2];
            for (j, v) in basis.iter().enumerate() {
                let hjk: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
                h[j] = hjk;
                for i in 0..dim {
                    w[i] -= hjk * v[i];
                }
            }
            let hnext = norm2(&w);
            h[k + 1] = hnext;

            // apply previous rotations to the new column
            for j in 0..k {
                let (c, s): (f64, f64) = (cs[j], sn[j]);
                let tmp = c * h[j] + s * h[j + 1];
                h[j + 1] = -s * h[j] + c * h[j + 1];
                h[j] = tmp;
            }
            // new rotation to zero h[k+1]
            let denom = (h[k] * h[k] + h[k + 1] * h[k + 1]).sqrt();
            let (c, s) = if denom == 0.0 {
                (1.0, 0.0)
            } else {
                (h[k] / denom, h[k + 1] / denom)
            };
            cs.push(c);
            sn.push(s);
            h[k] = c * h[k] + s * h[k + 1];
            h[k + 1] = 0.0;
            let g_new = -s * gvec[k];
            gvec[k] *= c;
            gvec[k + 1] = g_new;
            h_cols.push(h[..=k].to_vec());

            // reconstruct the iterate: back-substitute the triangular system
            let mut yk = vec![0.0; k + 1];
            for i in (0..=k).rev() {
                let mut s = gvec[i];
                for j in (i + 1)..=k {
                    s -= h_cols[j][i] * yk[j];
                }
                yk[i] = s / h_cols[i][i];
            }
            let mut z_try = z.clone();
            for (j, v) in basis.iter().take(k + 1).enumerate() {
                for i in 0..dim {
                    z_try[i] += yk[j] * v[i];
                }
            }
            let wall = t0.elapsed().as_nanos() as u64;
            let rc = record(&mut records, total_steps, sys, &z_try, wall)?;
            if rc <= threshold {
                z = z_try;
                status = SolveStatus::Converged;
                break 'outer;
            }
            if hnext == 0.0 {
                // invariant subspace reached; restart from the best iterate
                z = z_try;
                continue 'outer;
            }
            if k + 1 == k_max {
                z = z_try;
            } else {
                basis.push(w.iter().map(|v| v / hnext).collect());
            }
        }
    }

    Ok(Solution {
        x: z[..n].to_vec(),
        y: z[n..].to_vec(),
        trace: IterationTrace {
            records,
            status,
            metadata: TraceMetadata {
                algorithm: format!("gmres({})", params.restart),
                notes: vec!["no preconditioning".into()],
            },
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::csr::CsrMatrix;

    fn tiny_system() -> SaddleSystem {
        // A = [[2,0],[0,2]], B = [1,0]ᵀ, D = [1]; planted x = (1,2), y = 3
        let a = CsrMatrix::from_diag(&[2.0, 2.0]);
        let b = CsrMatrix::from_triplets(2, 1, &[(0, 0, 1.0)]).unwrap();
        let d = CsrMatrix::from_diag(&[1.0]);
        let f = vec![2.0 + 3.0, 4.0];
        let g = vec![1.0 - 3.0];
        SaddleSystem::new(a, b, d, f, g).unwrap()
    }

    #[test]
    fn gmres_solves_tiny_system() {
        let sys = tiny_system();
        let sol = gmres_block(&sys, &GmresParams::default(), None, None).unwrap();
        assert_eq!(sol.trace.status, SolveStatus::Converged);
        assert!((sol.x[0] - 1.0).abs() < 1e-5);
        assert!((sol.x[1] - 2.0).abs() < 1e-5);
        assert!((sol.y[0] - 3.0).abs() < 1e-5);
    }

    #[test]
    fn gmres_respects_max_iter() {
        let sys = tiny_system();
        let params = GmresParams {
            restart: 2,
            tol: 1e-14,
            max_iter: 1,
        };
        let sol = gmres_block(&sys, &params, None, None).unwrap();
        assert_eq!(sol.trace.status, SolveStatus::MaxIter);
        assert_eq!(sol.trace.iterations(), 1);
    }

    #[test]
    fn gmres_converged_at_start() {
        let sys = tiny_system();
        let sol = gmres_block(
            &sys,
            &GmresParams::default(),
            Some(&[1.0, 2.0]),
            Some(&[3.0]),
        )
        .unwrap();
        assert_eq!(sol.trace.status, SolveStatus::Converged);
        assert_eq!(sol.trace.iterations(), 0);
    }
}
