//! Desk-scale spectral diagnostics.
//!
//! Everything here measures, densely and exactly (up to roundoff), the
//! constants that govern convergence of the iterations:
//!
//! - `alpha`: the smallest constant with
//!   ⟨Ax, y⟩ ≤ alpha·‖x‖_{A_s}·‖y‖_{A_s}, i.e. how far A departs from
//!   symmetry in the energy norm of its symmetric part;
//! - `kappa0..kappa3`: generalized condition numbers of the preconditioned
//!   pencils (x-block preconditioner vs A_s, and the Schur preconditioner vs
//!   the composite operators H, S_s, M);
//! - `c0`: the inf-sup constant, realized as the smallest eigenvalue of the
//!   dense m-by-m matrix BᵀA_s⁻¹B;
//! - the admissible parameter windows and contraction-rate formulas for the
//!   exact and inexact adaptive iterations.
//!
//! All entry points refuse dimensions above the dense cap instead of
//! approximating: a truncated eigenvalue estimate would silently weaken the
//! window checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::csr::CsrMatrix;
use crate::linalg::dense::{dense_eig_sym, spd_inverse_sqrt, spd_sqrt, DenseMatrix};
use crate::linalg::factor::sparse_lu;
use crate::linalg::vec::dot;
use crate::operators::{
    build_exact_solver, schur_operator, LinearOperator, MatrixOperator, SchurKind,
    SymmetrizedInverse,
};
use crate::system::SaddleSystem;
use crate::DEFAULT_DENSE_CAP;

fn check_cap(dim: usize, cap: usize) -> Result<()> {
    if dim > cap {
        Err(Error::DenseCapExceeded { dim, cap })
    } else {
        Ok(())
    }
}

/// alpha together with the pair (x*, y*) attaining the bound.
#[derive(Debug, Clone)]
pub struct AlphaResult {
    pub alpha: f64,
    pub x_star: Vec<f64>,
    pub y_star: Vec<f64>,
}

/// Largest singular value of A_s^(-1/2) A A_s^(-1/2); the smallest constant
/// bounding ⟨Ax, y⟩ against the energy norms of the symmetric part.
pub fn compute_alpha(a: &CsrMatrix, cap: usize) -> Result<f64> {
    Ok(compute_alpha_detailed(a, cap)?.alpha)
}

pub fn compute_alpha_detailed(a: &CsrMatrix, cap: usize) -> Result<AlphaResult> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            n_rows: a.n_rows(),
            n_cols: a.n_cols(),
        });
    }
    check_cap(a.n_rows(), cap)?;
    let n = a.n_rows();
    let a_dense = DenseMatrix::from_csr(a);
    let a_s = DenseMatrix::from_csr(&a.symmetric_part()?);
    let r = spd_inverse_sqrt(&a_s)?; // fails when A_s is not SPD
    let t = r.matmul(&a_dense).matmul(&r);
    let ttt = t.transpose().matmul(&t);
    let (vals, vecs) = dense_eig_sym(&ttt)?;
    let lam_max = vals[n - 1];
    let alpha = lam_max.max(0.0).sqrt();
    // right singular vector v1, left u1 = T v1 / sigma
    let v1: Vec<f64> = (0..n).map(|i| vecs.get(i, n - 1)).collect();
    let tv = t.matvec(&v1);
    let u1: Vec<f64> = tv
        .iter()
        .map(|v| v / alpha.max(f64::MIN_POSITIVE))
        .collect();
    Ok(AlphaResult {
        alpha,
        x_star: r.matvec(&v1),
        y_star: r.matvec(&u1),
    })
}

/// Materialize an operator as a dense matrix by applying it to basis vectors.
pub fn materialize(op: &dyn LinearOperator, cap: usize) -> Result<DenseMatrix> {
    let m = op.dim();
    check_cap(m, cap)?;
    let mut out = DenseMatrix::zeros(m, m);
    let mut e = vec![0.0; m];
    for j in 0..m {
        e[j] = 1.0;
        let col = op.apply(&e)?;
        e[j] = 0.0;
        for i in 0..m {
            out.set(i, j, col[i]);
        }
    }
    Ok(out)
}

fn symmetrized(mut m: DenseMatrix) -> DenseMatrix {
    let n = m.n_rows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m.get(i, j) + m.get(j, i));
            m.set(i, j, v);
            m.set(j, i, v);
        }
    }
    m
}

/// Extreme eigenvalues (min, max) of the SPD pencil Op v = λ Ŝ v, given the
/// inverse action Ŝ⁻¹. Errors when a nonpositive eigenvalue shows up.
pub fn pencil_extremes(
    schur_inv: &dyn LinearOperator,
    op: &dyn LinearOperator,
    cap: usize,
) -> Result<(f64, f64)> {
    let m = op.dim();
    if schur_inv.dim() != m {
        return Err(Error::DimensionMismatch {
            context: "pencil_extremes",
            expected: m,
            found: schur_inv.dim(),
        });
    }
    check_cap(m, cap)?;
    let sinv = symmetrized(materialize(schur_inv, cap)?);
    let opd = symmetrized(materialize(op, cap)?);
    let r = spd_sqrt(&sinv)?;
    let t = r.matmul(&opd).matmul(&r);
    let (vals, _) = dense_eig_sym(&t)?;
    let (lo, hi) = (vals[0], vals[m - 1]);
    if lo <= 0.0 {
        return Err(Error::OperatorNotPositive {
            context: "pencil eigenvalue nonpositive",
        });
    }
    Ok((lo, hi))
}

/// Generalized condition number λ_max/λ_min of the SPD pencil Op v = λ Ŝ v.
pub fn compute_kappa(
    schur_inv: &dyn LinearOperator,
    op: &dyn LinearOperator,
    cap: usize,
) -> Result<f64> {
    let (lo, hi) = pencil_extremes(schur_inv, op, cap)?;
    Ok(hi / lo)
}

/// Inf-sup constant: smallest eigenvalue of the dense m-by-m matrix
/// BᵀA_s⁻¹B. Reported as 0 (condition fails) when it falls below
/// 1e-12 times the largest eigenvalue.
pub fn compute_lbb_constant(sys: &SaddleSystem, cap: usize) -> Result<f64> {
    check_cap(sys.n(), cap)?;
    check_cap(sys.m(), cap)?;
    let a_s = sys.a().symmetric_part()?;
    let as_inv = build_exact_solver(&a_s)?;
    let m = sys.m();
    let mut h0 = DenseMatrix::zeros(m, m);
    let mut e = vec![0.0; m];
    for j in 0..m {
        e[j] = 1.0;
        let bv = sys.b().spmv(&e)?;
        e[j] = 0.0;
        let inner = as_inv.apply(&bv)?;
        let col = sys.b().spmv_transpose(&inner)?;
        for i in 0..m {
            h0.set(i, j, col[i]);
        }
    }
    let h0 = symmetrized(h0);
    let (vals, _) = dense_eig_sym(&h0)?;
    let lo = vals[0];
    let hi = vals[m - 1].abs();
    if lo < 1e-12 * hi.max(f64::MIN_POSITIVE) {
        Ok(0.0)
    } else {
        Ok(lo)
    }
}

/// Admissible step window for the exact adaptive iteration: squared-norm
/// contraction 1 - θ(1-β₁)/α² for θ below (1-β₁)/(α²(1+β₁)²).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Theorem21Window {
    pub theta_max: f64,
    alpha: f64,
    beta1: f64,
}

pub fn theorem21_window(alpha: f64, beta1: f64) -> Theorem21Window {
    let theta_max = (1.0 - beta1) / (alpha * alpha * (1.0 + beta1) * (1.0 + beta1));
    Theorem21Window {
        theta_max,
        alpha,
        beta1,
    }
}

impl Theorem21Window {
    /// Squared-norm contraction factor at step size theta; the per-step
    /// norm factor is its square root.
    pub fn rate(&self, theta: f64) -> f64 {
        1.0 - theta * (1.0 - self.beta1) / (self.alpha * self.alpha)
    }
}

/// Window and rate for the alternate relaxation strategy that minimizes in
/// the symmetrized-Schur norm: θ below (1-β₂)/(α⁴(1+β₂)²), squared-norm
/// factor 1 - θ(1-β₂).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Theorem21WindowSs {
    pub theta_max: f64,
    beta2: f64,
}

pub fn theorem21_window_ss(alpha: f64, beta2: f64) -> Theorem21WindowSs {
    let a2 = alpha * alpha;
    Theorem21WindowSs {
        theta_max: (1.0 - beta2) / (a2 * a2 * (1.0 + beta2) * (1.0 + beta2)),
        beta2,
    }
}

impl Theorem21WindowSs {
    pub fn rate(&self, theta: f64) -> f64 {
        1.0 - theta * (1.0 - self.beta2)
    }
}

/// Admissible x-relaxation window and contraction rate for the inexact
/// adaptive iteration, at a fixed multiplier damping delta in (0, 1/2).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Theorem31Window {
    /// min(1/(3α²κ₀²), (1 + κ₀(1 − δ(1+β₃)))/((α²κ₀ + 1)κ₀))
    pub omega_max: f64,
    /// Δ = δ(1-β₃)/κ₀
    pub big_delta: f64,
    alpha: f64,
    kappa0: f64,
}

pub fn theorem31_window(
    alpha: f64,
    kappa0: f64,
    beta3: f64,
    delta: f64,
) -> Result<Theorem31Window> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(Error::InvalidConfig(format!(
            "multiplier damping delta = {delta} outside (0, 1/2); window undefined"
        )));
    }
    let a2k2 = alpha * alpha * kappa0 * kappa0;
    let first = 1.0 / (3.0 * a2k2);
    let second =
        (1.0 + kappa0 * (1.0 - delta * (1.0 + beta3))) / ((alpha * alpha * kappa0 + 1.0) * kappa0);
    Ok(Theorem31Window {
        omega_max: first.min(second),
        big_delta: delta * (1.0 - beta3) / kappa0,
        alpha,
        kappa0,
    })
}

impl Theorem31Window {
    /// 1 - ω + ω²α²κ₀²/(1 - ωκ₀); requires ω < 1/κ₀.
    pub fn omega_bar(&self, omega: f64) -> f64 {
        let a2k2 = self.alpha * self.alpha * self.kappa0 * self.kappa0;
        1.0 - omega + omega * omega * a2k2 / (1.0 - omega * self.kappa0)
    }

    /// (ω/2 − ωΔ + sqrt((ω/2 − ωΔ)² + 4(1 − ω/2)))/2
    pub fn rho_bar(&self, omega: f64) -> f64 {
        let a = omega / 2.0 - omega * self.big_delta;
        (a + (a * a + 4.0 * (1.0 - omega / 2.0)).sqrt()) / 2.0
    }
}

/// Worst ratio of the two sides of the positive-definite mean inequality
/// ⟨v,v⟩² / (⟨Gv,v⟩⟨G⁻¹v,v⟩) ≥ 4λ₁λ₂/(λ₁+λ₂)² over random trial vectors;
/// the return value must be ≥ 1 up to roundoff.
pub fn kantorovich_check(m: &DenseMatrix, trials: usize, seed: u64) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    check_cap(m.n_rows(), DEFAULT_DENSE_CAP)?;
    let n = m.n_rows();
    let (vals, _) = dense_eig_sym(m)?;
    let (l1, l2) = (vals[0], vals[n - 1]);
    if l1 <= 0.0 {
        return Err(Error::NotPositiveDefinite { pivot: 0 });
    }
    let rhs = 4.0 * l1 * l2 / ((l1 + l2) * (l1 + l2));
    let chol = m.cholesky()?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let v: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let vv = dot(&v, &v);
        if vv == 0.0 {
            continue;
        }
        let gv = m.matvec(&v);
        let ginv_v = chol.solve(&v);
        let lhs = vv * vv / (dot(&gv, &v) * dot(&ginv_v, &v));
        worst = worst.min(lhs / rhs);
    }
    Ok(worst)
}

/// The full set of desk-scale constants for a system, a Schur preconditioner
/// inverse, and an x-block preconditioner inverse, evaluated at the supplied
/// relaxation parameters.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub alpha: f64,
    pub kappa0: f64,
    pub kappa1: f64,
    pub kappa2: f64,
    pub kappa3: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub beta3: f64,
    pub c0: f64,
    pub theta_max: f64,
    pub theta_max_ss: f64,
    pub omega_max: f64,
    /// Plain convergence condition on the multiplier damping.
    pub delta_max: f64,
    /// Stricter threshold under which the error-norm rate formula holds.
    pub delta_max_error_bound: f64,
    /// Threshold keeping the damped multiplier step positive in the
    /// eigenvalue bound.
    pub delta_max_step_bound: f64,
    pub omega_bar: f64,
    #[serde(rename = "Delta")]
    pub big_delta: f64,
    pub rho_bar: f64,
    /// Parameters the window quantities were evaluated at.
    pub omega: f64,
    pub delta: f64,
}

/// Build the report. All pencils are evaluated densely, so both n and m must
/// be within the cap.
pub fn build_report(
    sys: &SaddleSystem,
    schur_inv: &dyn LinearOperator,
    a0_inv: &dyn LinearOperator,
    omega: f64,
    delta: f64,
    cap: usize,
) -> Result<SpectralReport> {
    check_cap(sys.n(), cap)?;
    check_cap(sys.m(), cap)?;

    let alpha = compute_alpha(sys.a(), cap)?;

    let a_s = sys.a().symmetric_part()?;
    let as_op = MatrixOperator::new(&a_s, true, true);
    let kappa0 = compute_kappa(a0_inv, &as_op, cap)?;

    let as_inv = build_exact_solver(&a_s)?;
    let h_op = schur_operator(sys.b(), sys.d(), &as_inv, SchurKind::H)?;
    let kappa1 = compute_kappa(schur_inv, &h_op, cap)?;

    let a_lu = sparse_lu(sys.a())?;
    let sym_inv = SymmetrizedInverse::new(&a_lu);
    let ss_op = schur_operator(sys.b(), sys.d(), &sym_inv, SchurKind::Ss)?;
    let kappa2 = compute_kappa(schur_inv, &ss_op, cap)?;

    let m_op = schur_operator(sys.b(), sys.d(), a0_inv, SchurKind::M)?;
    let kappa3 = compute_kappa(schur_inv, &m_op, cap)?;

    let beta = |k: f64| (k - 1.0) / (k + 1.0);
    let (beta1, beta2, beta3) = (beta(kappa1), beta(kappa2), beta(kappa3));

    let c0 = compute_lbb_constant(sys, cap)?;

    let w21 = theorem21_window(alpha, beta1);
    let w21ss = theorem21_window_ss(alpha, beta2);
    let w31 = theorem31_window(alpha, kappa0, beta3, delta)?;

    Ok(SpectralReport {
        alpha,
        kappa0,
        kappa1,
        kappa2,
        kappa3,
        beta1,
        beta2,
        beta3,
        c0,
        theta_max: w21.theta_max,
        theta_max_ss: w21ss.theta_max,
        omega_max: w31.omega_max,
        delta_max: 0.5,
        delta_max_error_bound: 1.0 / (4.0 * alpha * alpha * kappa0 * kappa0),
        delta_max_step_bound: 1.0 / (4.0 * (1.0 + beta3)),
        omega_bar: w31.omega_bar(omega),
        big_delta: w31.big_delta,
        rho_bar: w31.rho_bar(omega),
        omega,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{build_scaled_identity, DenseMatrixOperator, DenseSolveOperator};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn alpha_is_one_for_symmetric() {
        let a =
            CsrMatrix::from_triplets(2, 2, &[(0, 0, 3.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 2.0)])
                .unwrap();
        let alpha = compute_alpha(&a, 100).unwrap();
        assert!((alpha - 1.0).abs() < 1e-10);
    }

    #[test]
    fn alpha_hand_svd_case() {
        // A = [[1,1],[-1,1]]: A_s = I, singular values sqrt(2)
        let a =
            CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, -1.0), (1, 1, 1.0)])
                .unwrap();
        let alpha = compute_alpha(&a, 100).unwrap();
        assert!((alpha - 2.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn alpha_bound_holds_and_is_tight() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let n = 10;
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    t.push((i, i, 4.0 + rng.gen::<f64>()));
                } else {
                    t.push((i, j, rng.gen::<f64>() * 2.0 - 1.0));
                }
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let res = compute_alpha_detailed(&a, 100).unwrap();
        let a_s = a.symmetric_part().unwrap();

        let energy = |v: &[f64]| {
            let sv = a_s.spmv(v).unwrap();
            dot(&sv, v).sqrt()
        };
        // sampling: the bound holds everywhere
        for _ in 0..200 {
            let x: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let y: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let ax = a.spmv(&x).unwrap();
            let lhs = dot(&ax, &y);
            assert!(lhs <= res.alpha * energy(&x) * energy(&y) * (1.0 + 1e-9));
        }
        // tightness: 0.999*alpha fails on the maximizing pair
        let ax = a.spmv(&res.x_star).unwrap();
        let lhs = dot(&ax, &res.y_star);
        assert!(lhs > 0.999 * res.alpha * energy(&res.x_star) * energy(&res.y_star));
    }

    #[test]
    fn kappa_trivial_cases() {
        // Ŝ = Op → 1
        let q = DenseMatrix::from_rows(&[&[4.0, 1.0], &[1.0, 3.0]]);
        let s_inv = DenseSolveOperator::new(&q).unwrap();
        let op = DenseMatrixOperator::new(q.clone(), true, true);
        let k = compute_kappa(&s_inv, &op, 100).unwrap();
        assert!((k - 1.0).abs() < 1e-10);

        // Ŝ = I, Op = diag(1, 4) → 4
        let s_inv = build_scaled_identity(2, 1.0).unwrap();
        let d = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, 4.0]]);
        let op = DenseMatrixOperator::new(d, true, true);
        let k = compute_kappa(&s_inv, &op, 100).unwrap();
        assert!((k - 4.0).abs() < 1e-12);
    }

    #[test]
    fn kappa_scaling_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let m = 6;
        let mut b = DenseMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                b.set(i, j, rng.gen::<f64>() * 2.0 - 1.0);
            }
        }
        let mut q = b.matmul(&b.transpose());
        for i in 0..m {
            q.set(i, i, q.get(i, i) + m as f64);
        }
        let mut p = DenseMatrix::zeros(m, m);
        for i in 0..m {
            for j in 0..m {
                p.set(i, j, rng.gen::<f64>() * 2.0 - 1.0);
            }
        }
        let mut op_mat = p.matmul(&p.transpose());
        for i in 0..m {
            op_mat.set(i, i, op_mat.get(i, i) + m as f64);
        }
        let op = DenseMatrixOperator::new(op_mat, true, true);

        let base = {
            let s_inv = DenseSolveOperator::new(&q).unwrap();
            compute_kappa(&s_inv, &op, 100).unwrap()
        };
        for c in [0.01, 100.0] {
            let mut qc = q.clone();
            for i in 0..m {
                for j in 0..m {
                    qc.set(i, j, qc.get(i, j) * c);
                }
            }
            let s_inv = DenseSolveOperator::new(&qc).unwrap();
            let k = compute_kappa(&s_inv, &op, 100).unwrap();
            assert!((k - base).abs() <= 1e-10 * base);
        }
    }

    #[test]
    fn lbb_trivial_cases() {
        // B = 0 → 0
        let a = CsrMatrix::identity(3);
        let b = CsrMatrix::zeros(3, 2);
        let d = CsrMatrix::zeros(2, 2);
        let sys = SaddleSystem::new(a, b, d, vec![0.0; 3], vec![0.0; 2]).unwrap();
        assert_eq!(compute_lbb_constant(&sys, 100).unwrap(), 0.0);

        // B = I, A = I → 1
        let a = CsrMatrix::identity(3);
        let b = CsrMatrix::identity(3);
        let d = CsrMatrix::zeros(3, 3);
        let sys = SaddleSystem::new(a, b, d, vec![0.0; 3], vec![0.0; 3]).unwrap();
        assert!((compute_lbb_constant(&sys, 100).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn window21_arithmetic() {
        let w = theorem21_window(1.0, 0.0);
        assert_eq!(w.theta_max, 1.0);
        assert_eq!(w.rate(1.0), 0.0);

        let w = theorem21_window(1.0, 1.0 / 3.0);
        assert!((w.theta_max - 3.0 / 8.0).abs() < 1e-15);

        let wss = theorem21_window_ss(1.0, 0.5);
        assert!((wss.theta_max - 0.5 / 2.25).abs() < 1e-15);
        assert!((wss.rate(0.1) - (1.0 - 0.05)).abs() < 1e-15);
    }

    #[test]
    fn window31_arithmetic() {
        let w = theorem31_window(1.0, 1.0, 0.0, 0.3).unwrap();
        assert!((w.omega_max - (1.0f64 / 3.0)).abs() < 1e-15);
        assert!(theorem31_window(1.0, 1.0, 0.0, 0.6).is_err());
        assert!(theorem31_window(1.0, 1.0, 0.0, 0.5).is_err());
    }

    #[test]
    fn omega_bar_bound_on_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let alpha = 1.0 + rng.gen::<f64>() * 2.0;
            let kappa0 = 1.0 + rng.gen::<f64>() * 9.0;
            let w = theorem31_window(alpha, kappa0, 0.0, 0.25).unwrap();
            let cap = 1.0 / (3.0 * alpha * alpha * kappa0 * kappa0);
            let omega = rng.gen::<f64>() * cap;
            if omega <= 0.0 {
                continue;
            }
            assert!(w.omega_bar(omega) <= 1.0 - omega / 2.0 + 1e-12);
        }
    }

    #[test]
    fn rho_bar_bracket_on_grid() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut tested = 0;
        while tested < 200 {
            let alpha = 1.0 + rng.gen::<f64>() * 2.0;
            let kappa0 = 1.0 + rng.gen::<f64>() * 9.0;
            let beta3 = rng.gen::<f64>() * 0.999;
            let delta = rng.gen::<f64>() * 0.499;
            if delta <= 0.0 {
                continue;
            }
            let w = match theorem31_window(alpha, kappa0, beta3, delta) {
                Ok(w) => w,
                Err(_) => continue,
            };
            if w.big_delta > 0.25 {
                continue; // bracket stated under the quarter bound
            }
            let omega = rng.gen::<f64>() * w.omega_max;
            if omega <= 0.0 {
                continue;
            }
            let rho = w.rho_bar(omega);
            let upper = 1.0 - omega * delta * (1.0 - beta3) / (2.0 * kappa0);
            assert!(1.0 - omega / 4.0 <= rho + 1e-12);
            assert!(rho <= upper + 1e-12);
            assert!(upper < 1.0);
            tested += 1;
        }
    }

    #[test]
    fn kantorovich_identity_and_extremal() {
        let id = DenseMatrix::identity(4);
        let worst = kantorovich_check(&id, 100, 1).unwrap();
        assert!((worst - 1.0).abs() < 1e-12);

        // equality case for diag(1, kappa) at v = (1,1)/sqrt(2)
        let kappa = 7.0;
        let g = DenseMatrix::from_rows(&[&[1.0, 0.0], &[0.0, kappa]]);
        let v = [1.0 / 2.0f64.sqrt(), 1.0 / 2.0f64.sqrt()];
        let chol = g.cholesky().unwrap();
        let vv = dot(&v, &v);
        let lhs = vv * vv / (dot(&g.matvec(&v), &v) * dot(&chol.solve(&v), &v));
        let rhs = 4.0 * kappa / ((1.0 + kappa) * (1.0 + kappa));
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn kantorovich_random_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 20;
        let mut b = DenseMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                b.set(i, j, rng.gen::<f64>() * 2.0 - 1.0);
            }
        }
        let mut g = b.matmul(&b.transpose());
        for i in 0..n {
            g.set(i, i, g.get(i, i) + 1.0);
        }
        let worst = kantorovich_check(&g, 1000, 11).unwrap();
        assert!(worst >= 1.0 - 1e-10);
    }

    #[test]
    fn caps_are_enforced() {
        let a = CsrMatrix::identity(10);
        assert!(matches!(
            compute_alpha(&a, 5),
            Err(Error::DenseCapExceeded { dim: 10, cap: 5 })
        ));
    }

    #[test]
    fn windows_are_scale_consistent() {
        // scaling A and the x-block preconditioner source by the same c
        // leaves alpha and kappa0 unchanged
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let n = 8;
        let mut t = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    t.push((i, i, n as f64 + rng.gen::<f64>()));
                } else {
                    t.push((i, j, rng.gen::<f64>() * 2.0 - 1.0));
                }
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t).unwrap();
        let alpha0 = compute_alpha(&a, 100).unwrap();
        let a_s = a.symmetric_part().unwrap();
        let a0 = crate::operators::build_jacobi(&a_s).unwrap();
        let as_op = MatrixOperator::new(&a_s, true, true);
        let kappa0 = compute_kappa(&a0, &as_op, 100).unwrap();

        for c in [0.01, 100.0] {
            let ac = a.scaled(c);
            let alpha_c = compute_alpha(&ac, 100).unwrap();
            assert!((alpha_c - alpha0).abs() <= 1e-10 * alpha0);
            let acs = ac.symmetric_part().unwrap();
            let a0c = crate::operators::build_jacobi(&acs).unwrap();
            let acs_op = MatrixOperator::new(&acs, true, true);
            let kappa_c = compute_kappa(&a0c, &acs_op, 100).unwrap();
            assert!((kappa_c - kappa0).abs() <= 1e-10 * kappa0);
        }
    }
}
