//! Property tests for the inequalities the convergence theory rests on,
//! at small scale; the acceptance suite repeats them at the full counts.

use uzawa::diagnostics::{compute_alpha, compute_kappa};
use uzawa::linalg::vec::dot;
use uzawa::linalg::{sparse_lu, CsrMatrix, DenseMatrix};
use uzawa::operators::{
    m_norm, schur_operator, DenseMatrixOperator, DenseSolveOperator, LinearOperator, SchurKind,
    SymmetrizedInverse,
};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_nonsymmetric_spd_part(rng: &mut ChaCha8Rng, n: usize) -> CsrMatrix {
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
    CsrMatrix::from_triplets(n, n, &t).unwrap()
}

/// ⟨(A⁻¹)ₛw, w⟩ ≤ ⟨A_s⁻¹w, w⟩ ≤ α²⟨(A⁻¹)ₛw, w⟩ for invertible A with SPD
/// symmetric part.
#[test]
fn inverse_symmetric_part_sandwich_small() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..20 {
        let n = rng.gen_range(2..=20);
        let a = random_nonsymmetric_spd_part(&mut rng, n);
        let alpha = compute_alpha(&a, 100).unwrap();
        let lu = sparse_lu(&a).unwrap();
        let ainv_s = SymmetrizedInverse::new(&lu);
        let a_s = a.symmetric_part().unwrap();
        let as_inv = uzawa::operators::build_exact_solver(&a_s).unwrap();
        for _ in 0..20 {
            let w: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let lhs = dot(&ainv_s.apply(&w).unwrap(), &w);
            let mid = dot(&as_inv.apply(&w).unwrap(), &w);
            let slack = 1e-9 * mid.abs().max(1e-30);
            assert!(lhs <= mid + slack, "lower bound: {lhs} vs {mid}");
            assert!(mid <= alpha * alpha * lhs + slack, "upper bound");
        }
    }
}

/// ‖τŜ⁻¹g − H⁻¹g‖_H ≤ β₁·‖H⁻¹g‖_H with β₁ = (κ₁−1)/(κ₁+1).
#[test]
fn one_dim_minimization_contraction_small() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..25 {
        let m = rng.gen_range(2..=12);
        let mk_spd = |rng: &mut ChaCha8Rng| {
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
            q
        };
        let s_hat = mk_spd(&mut rng);
        let h = mk_spd(&mut rng);
        let s_inv = DenseSolveOperator::new(&s_hat).unwrap();
        let h_op = DenseMatrixOperator::new(h.clone(), true, true);
        let kappa1 = compute_kappa(&s_inv, &h_op, 100).unwrap();
        let beta1 = (kappa1 - 1.0) / (kappa1 + 1.0);
        let chol = h.cholesky().unwrap();

        let g: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
        let tau = uzawa::solvers::compute_tau(&g, &s_inv, &h_op).unwrap();
        let z = s_inv.apply(&g).unwrap();
        let href = chol.solve(&g);
        let diff: Vec<f64> = z.iter().zip(&href).map(|(a, b)| tau * a - b).collect();
        let lhs = m_norm(&h_op, &diff).unwrap();
        let rhs = beta1 * m_norm(&h_op, &href).unwrap();
        assert!(
            lhs <= rhs * (1.0 + 1e-9) + 1e-14,
            "contraction violated: {lhs} vs {rhs} (kappa1 = {kappa1})"
        );
    }
}

/// The composite operators with symmetric inner actions satisfy the adjoint
/// identity and are positive on random vectors.
#[test]
fn schur_composites_are_symmetric_and_positive() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let (n, m) = (15, 6);
    let a = random_nonsymmetric_spd_part(&mut rng, n);
    let a_s = a.symmetric_part().unwrap();
    let as_inv = uzawa::operators::build_exact_solver(&a_s).unwrap();
    let lu = sparse_lu(&a).unwrap();
    let sym_inv = SymmetrizedInverse::new(&lu);
    let mut bt = Vec::new();
    for i in 0..n {
        for j in 0..m {
            if i == n - m + j {
                bt.push((i, j, 2.0)); // guarantee full column rank
            } else if rng.gen::<f64>() < 0.6 {
                bt.push((i, j, rng.gen::<f64>() * 2.0 - 1.0));
            }
        }
    }
    let b = CsrMatrix::from_triplets(n, m, &bt).unwrap();
    let d = CsrMatrix::from_diag(&vec![0.5; m]);

    let h_op = schur_operator(&b, &d, &as_inv, SchurKind::H).unwrap();
    let ss_op = schur_operator(&b, &d, &sym_inv, SchurKind::Ss).unwrap();
    for op in [&h_op as &dyn LinearOperator, &ss_op] {
        assert!(op.symmetric());
        for _ in 0..50 {
            let x: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let y: Vec<f64> = (0..m).map(|_| rng.gen::<f64>() * 2.0 - 1.0).collect();
            let lhs = dot(&op.apply(&x).unwrap(), &y);
            let rhs = dot(&x, &op.apply(&y).unwrap());
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            assert!((lhs - rhs).abs() <= 1e-10 * scale);
            let quad = dot(&op.apply(&x).unwrap(), &x);
            assert!(quad > 0.0);
        }
    }
    // the full-Schur composite is the one operator allowed to be nonsymmetric
    let lu_inv = uzawa::operators::build_exact_solver(&a).unwrap();
    let s_op = schur_operator(&b, &d, &lu_inv, SchurKind::S).unwrap();
    assert!(!s_op.symmetric());
}
