//! The Uzawa-type iterations.
//!
//! Four variants share one driver:
//!
//! - `ExactUzawa`: exact x-solve with A, multiplier update damped by θ and a
//!   self-tuning relaxation parameter τᵢ chosen to minimize the distance to
//!   the exact Schur correction in the H-norm (H = BᵀA_s⁻¹B + D), or in the
//!   symmetrized-Schur norm as an alternate strategy.
//! - `InexactUzawa`: one preconditioned Richardson step on the x-block
//!   (x += ω·A₀⁻¹·residual, A₀ built from the symmetric part of A), then the
//!   τᵢ-adaptive multiplier update damped by δ with τᵢ evaluated through
//!   M = BᵀA₀⁻¹B + D.
//! - `Bpv`: the fixed-parameter baseline of Bramble, Pasciak and Vassilev;
//!   converges only when the preconditioners are scaled correctly, which is
//!   exactly what the adaptive variants avoid.
//! - `HuZou`: experimental two-parameter variant in the style of Hu and Zou
//!   with an adaptive x-step length ωᵢ as well; effective in practice but
//!   without a complete convergence theory for nonsymmetric A.
//!
//! The relaxation parameter is scale-invariant in effect: replacing the
//! Schur preconditioner Ŝ by c·Ŝ multiplies τᵢ by c and leaves the update
//! vector unchanged, so no prior spectral scaling of Ŝ is needed.

mod gmres;

pub use gmres::{gmres_block, GmresParams};

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{compute_alpha, compute_kappa};
use crate::error::{Error, Result};
use crate::linalg::csr::CsrMatrix;
use crate::linalg::dense::DenseMatrix;
use crate::linalg::factor::sparse_lu;
use crate::linalg::vec::{axpy, dot};
use crate::operators::{
    build_exact_solver, schur_operator, LinearOperator, PreconditionerSpec, SchurKind,
    SymmetrizedInverse,
};
pub use crate::system::SaddleSystem;
use crate::DEFAULT_DENSE_CAP;

/// Denominators below this raise a breakdown instead of silently falling
/// back to the τᵢ = 1 branch, which is reserved for an exactly zero residual.
const DENOM_FLOOR: f64 = 1e-300;

/// Dense size up to which the automatic θ selection runs a spectral solve.
const AUTO_THETA_DENSE_LIMIT: usize = 600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    ExactUzawa,
    InexactUzawa,
    Bpv,
    HuZou,
}

impl Algorithm {
    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::ExactUzawa => "exact_uzawa",
            Algorithm::InexactUzawa => "inexact_uzawa",
            Algorithm::Bpv => "bpv",
            Algorithm::HuZou => "hu_zou",
        }
    }
}

/// How the multiplier relaxation parameter τᵢ is chosen each iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TauStrategy {
    /// Minimize ‖τŜ⁻¹gᵢ − H⁻¹gᵢ‖_H with H = BᵀA_s⁻¹B + D.
    AdaptiveH,
    /// Minimize in the norm of the symmetrized Schur complement
    /// Bᵀ(A⁻¹)ₛB + D; needs the exact LU of A for the transpose action.
    AdaptiveSs,
    /// Minimize through M = BᵀA₀⁻¹B + D, the form used by the inexact
    /// iteration.
    AdaptiveM,
    /// Constant τ (the fixed-parameter baseline).
    Fixed { tau: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    /// x-relaxation of the inexact iteration.
    #[serde(default = "default_omega")]
    pub omega: f64,
    /// Multiplier damping of the inexact iteration; also the x-step of the
    /// fixed-parameter baseline.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Multiplier damping of the exact and two-parameter iterations. `None`
    /// selects it from measured spectral constants at small sizes.
    #[serde(default)]
    pub theta: Option<f64>,
    /// `None` picks the algorithm's default strategy.
    #[serde(default)]
    pub tau_strategy: Option<TauStrategy>,
    #[serde(default = "default_schur_precond")]
    pub schur_precond: PreconditionerSpec,
    #[serde(default = "default_a_precond")]
    pub a_precond: PreconditionerSpec,
    /// Relative tolerance on the combined residual.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
}

fn default_omega() -> f64 {
    0.3
}
fn default_delta() -> f64 {
    0.3
}
fn default_schur_precond() -> PreconditionerSpec {
    PreconditionerSpec::ScaledIdentity { scale: 1.0 }
}
fn default_a_precond() -> PreconditionerSpec {
    PreconditionerSpec::IcDroptol { droptol: 1e-4 }
}
fn default_tol() -> f64 {
    1e-6
}
fn default_max_iter() -> usize {
    10_000
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm) -> Self {
        SolverConfig {
            algorithm,
            omega: default_omega(),
            delta: default_delta(),
            theta: None,
            tau_strategy: None,
            schur_precond: default_schur_precond(),
            a_precond: default_a_precond(),
            tol: default_tol(),
            max_iter: default_max_iter(),
        }
    }

    /// Strategy in effect after applying the algorithm default.
    pub fn strategy(&self) -> TauStrategy {
        self.tau_strategy.unwrap_or(match self.algorithm {
            Algorithm::ExactUzawa => TauStrategy::AdaptiveH,
            Algorithm::InexactUzawa | Algorithm::HuZou => TauStrategy::AdaptiveM,
            Algorithm::Bpv => TauStrategy::Fixed { tau: 0.01 },
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "omega must be positive, got {}",
                self.omega
            )));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if let Some(t) = self.theta {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "theta must be positive, got {t}"
                )));
            }
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if let TauStrategy::Fixed { tau } = self.strategy() {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "fixed tau must be positive, got {tau}"
                )));
            }
        }
        let ok = matches!(
            (self.algorithm, self.strategy()),
            (Algorithm::ExactUzawa, TauStrategy::AdaptiveH)
                | (Algorithm::ExactUzawa, TauStrategy::AdaptiveSs)
                | (Algorithm::InexactUzawa, TauStrategy::AdaptiveM)
                | (Algorithm::HuZou, TauStrategy::AdaptiveM)
                | (Algorithm::Bpv, TauStrategy::Fixed { .. })
        );
        if !ok {
            return Err(Error::InvalidConfig(format!(
                "tau strategy {:?} is not available for algorithm {:?}",
                self.strategy(),
                self.algorithm
            )));
        }
        self.schur_precond.validate()?;
        self.a_precond.validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIter,
    Breakdown,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iter: usize,
    pub res_x: f64,
    pub res_y: f64,
    pub res_combined: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    pub wall_ns: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
pub struct TraceMetadata {
    pub algorithm: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Per-iteration record of the run. Row 0 holds the residuals of the initial
/// iterate; row i the residuals after step i together with the relaxation
/// parameters that step used.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IterationTrace {
    pub records: Vec<TraceRecord>,
    pub status: SolveStatus,
    pub metadata: TraceMetadata,
}

impl IterationTrace {
    /// Number of steps taken (excludes the initial record).
    pub fn iterations(&self) -> usize {
        self.records.last().map(|r| r.iter).unwrap_or(0)
    }

    pub fn final_residual(&self) -> f64 {
        self.records
            .last()
            .map(|r| r.res_combined)
            .unwrap_or(f64::NAN)
    }

    /// Total wall time across steps, in seconds.
    pub fn wall_seconds(&self) -> f64 {
        self.records.iter().map(|r| r.wall_ns).sum::<u64>() as f64 * 1e-9
    }

    /// One JSON object per iteration record.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("trace record serializes"));
            out.push('\n');
        }
        out
    }

    /// CSV with the same columns as the JSON lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("iter,res_x,res_y,res_combined,tau,omega,wall_ns\n");
        for r in &self.records {
            let tau = r.tau.map(|v| v.to_string()).unwrap_or_default();
            let omega = r.omega.map(|v| v.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.iter, r.res_x, r.res_y, r.res_combined, tau, omega, r.wall_ns
            ));
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub trace: IterationTrace,
}

/// The closed-form relaxation parameter: τᵢ = ⟨gᵢ, Ŝ⁻¹gᵢ⟩ / ⟨Op·Ŝ⁻¹gᵢ, Ŝ⁻¹gᵢ⟩
/// with a single Ŝ⁻¹ application shared between numerator and denominator,
/// and τᵢ = 1 on an exactly zero residual.
pub fn compute_tau(
    g_i: &[f64],
    schur_inv: &dyn LinearOperator,
    numerator_op: &dyn LinearOperator,
) -> Result<f64> {
    tau_and_direction(g_i, schur_inv, numerator_op).map(|(tau, _)| tau)
}

/// As [`compute_tau`], also returning z = Ŝ⁻¹gᵢ so the caller can reuse it
/// for the update.
pub fn tau_and_direction(
    g_i: &[f64],
    schur_inv: &dyn LinearOperator,
    numerator_op: &dyn LinearOperator,
) -> Result<(f64, Vec<f64>)> {
    if g_i.iter().all(|&v| v == 0.0) {
        return Ok((1.0, vec![0.0; g_i.len()]));
    }
    let z = schur_inv.apply(g_i)?;
    let num = dot(g_i, &z);
    let opz = numerator_op.apply(&z)?;
    let den = dot(&opz, &z);
    if den.is_nan() || den <= DENOM_FLOOR {
        return Err(Error::OperatorNotPositive {
            context: "residual direction (relaxation denominator)",
        });
    }
    Ok((num / den, z))
}

struct StepInfo {
    tau: Option<f64>,
    omega: Option<f64>,
}

/// Shared iteration driver: records the initial residuals, then steps until
/// the combined relative residual passes `tol` or `max_iter` is exhausted.
fn drive<F>(
    sys: &SaddleSystem,
    tol: f64,
    max_iter: usize,
    metadata: TraceMetadata,
    mut x: Vec<f64>,
    mut y: Vec<f64>,
    mut step: F,
) -> Result<Solution>
where
    F: FnMut(&mut Vec<f64>, &mut Vec<f64>) -> Result<StepInfo>,
{
    let threshold = tol * sys.rhs_norm();
    let mut records = Vec::new();
    let (rx, ry, rc) = sys.residuals(&x, &y)?;
    records.push(TraceRecord {
        iter: 0,
        res_x: rx,
        res_y: ry,
        res_combined: rc,
        tau: None,
        omega: None,
        wall_ns: 0,
    });
    let mut status = if rc <= threshold {
        SolveStatus::Converged
    } else {
        SolveStatus::MaxIter
    };
    if status != SolveStatus::Converged {
        for it in 1..=max_iter {
            let t0 = Instant::now();
            let info = step(&mut x, &mut y).map_err(|e| e.at_iteration(it))?;
            let wall_ns = t0.elapsed().as_nanos() as u64;
            let (rx, ry, rc) = sys.residuals(&x, &y)?;
            records.push(TraceRecord {
                iter: it,
                res_x: rx,
                res_y: ry,
                res_combined: rc,
                tau: info.tau,
                omega: info.omega,
                wall_ns,
            });
            if rc <= threshold {
                status = SolveStatus::Converged;
                break;
            }
        }
    }
    Ok(Solution {
        x,
        y,
        trace: IterationTrace {
            records,
            status,
            metadata,
        },
    })
}

/// Build the Schur preconditioner inverse Ŝ⁻¹ described by `spec`. A scaled
/// identity needs no matrix; every other kind is built from the densely
/// assembled H = BᵀA_s⁻¹B + D, which requires m within the dense cap.
pub fn build_schur_inverse(
    sys: &SaddleSystem,
    spec: &PreconditionerSpec,
    cap: usize,
) -> Result<Box<dyn LinearOperator>> {
    spec.validate()?;
    if let PreconditionerSpec::ScaledIdentity { scale } = spec {
        return Ok(Box::new(crate::operators::build_scaled_identity(
            sys.m(),
            *scale,
        )?));
    }
    let m = sys.m();
    if m > cap {
        return Err(Error::DenseCapExceeded { dim: m, cap });
    }
    let a_s = sys.a().symmetric_part()?;
    let as_inv = build_exact_solver(&a_s)?;
    let mut h = DenseMatrix::zeros(m, m);
    let mut e = vec![0.0; m];
    for j in 0..m {
        e[j] = 1.0;
        let bv = sys.b().spmv(&e)?;
        let dv = sys.d().spmv(&e)?;
        e[j] = 0.0;
        let inner = as_inv.apply(&bv)?;
        let mut col = sys.b().spmv_transpose(&inner)?;
        for i in 0..m {
            col[i] += dv[i];
        }
        for i in 0..m {
            h.set(i, j, col[i]);
        }
    }
    let mut triplets = Vec::new();
    for i in 0..m {
        for j in 0..m {
            // symmetrize roundoff so the sparse factorizations see an
            // exactly symmetric matrix
            let v = 0.5 * (h.get(i, j) + h.get(j, i));
            if v != 0.0 {
                triplets.push((i, j, v));
            }
        }
    }
    let h_csr = CsrMatrix::from_triplets(m, m, &triplets)?;
    spec.build(&h_csr)
}

fn initial_vectors(
    sys: &SaddleSystem,
    x0: Option<&[f64]>,
    y0: Option<&[f64]>,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let x = match x0 {
        Some(v) => {
            if v.len() != sys.n() {
                return Err(Error::DimensionMismatch {
                    context: "solve: x0",
                    expected: sys.n(),
                    found: v.len(),
                });
            }
            v.to_vec()
        }
        None => vec![0.0; sys.n()],
    };
    let y = match y0 {
        Some(v) => {
            if v.len() != sys.m() {
                return Err(Error::DimensionMismatch {
                    context: "solve: y0",
                    expected: sys.m(),
                    found: v.len(),
                });
            }
            v.to_vec()
        }
        None => vec![0.0; sys.m()],
    };
    Ok((x, y))
}

/// θ for the exact iteration: the configured value, or the midpoint of the
/// admissible window measured on this system when it is small enough for the
/// dense spectral solves, or 0.5 with a note otherwise.
fn resolve_theta(
    sys: &SaddleSystem,
    cfg: &SolverConfig,
    s_inv: &dyn LinearOperator,
    num_op: &dyn LinearOperator,
    notes: &mut Vec<String>,
) -> Result<f64> {
    if let Some(t) = cfg.theta {
        return Ok(t);
    }
    if sys.n() <= AUTO_THETA_DENSE_LIMIT && sys.m() <= AUTO_THETA_DENSE_LIMIT {
        let alpha = compute_alpha(sys.a(), AUTO_THETA_DENSE_LIMIT)?;
        let kappa = compute_kappa(s_inv, num_op, AUTO_THETA_DENSE_LIMIT)?;
        let beta = (kappa - 1.0) / (kappa + 1.0);
        let a2 = alpha * alpha;
        let theta = match cfg.strategy() {
            TauStrategy::AdaptiveSs => 0.5 * (1.0 - beta) / (a2 * a2 * (1.0 + beta) * (1.0 + beta)),
            _ => 0.5 * (1.0 - beta) / (a2 * (1.0 + beta) * (1.0 + beta)),
        };
        notes.push(format!(
            "theta auto-selected from measured spectra: {theta:.6e}"
        ));
        Ok(theta)
    } else {
        notes.push(
            "theta defaulted to 0.5: problem too large for automatic spectral selection".into(),
        );
        Ok(0.5)
    }
}

/// Run the configured iteration from the given initial guess (zero vectors
/// by default).
pub fn solve(
    sys: &SaddleSystem,
    cfg: &SolverConfig,
    x0: Option<&[f64]>,
    y0: Option<&[f64]>,
) -> Result<Solution> {
    cfg.validate()?;
    let (x, y) = initial_vectors(sys, x0, y0)?;
    match cfg.algorithm {
        Algorithm::ExactUzawa => run_exact_uzawa(sys, cfg, x, y),
        Algorithm::InexactUzawa => run_inexact_uzawa(sys, cfg, x, y),
        Algorithm::Bpv => run_bpv(sys, cfg, x, y),
        Algorithm::HuZou => run_hu_zou(sys, cfg, x, y),
    }
}

fn run_exact_uzawa(
    sys: &SaddleSystem,
    cfg: &SolverConfig,
    x: Vec<f64>,
    y: Vec<f64>,
) -> Result<Solution> {
    let lu = sparse_lu(sys.a())?;
    let s_inv = build_schur_inverse(sys, &cfg.schur_precond, DEFAULT_DENSE_CAP)?;

    // numerator operator for the relaxation parameter
    let as_inv;
    let sym_inv;
    let num_op = match cfg.strategy() {
        TauStrategy::AdaptiveH => {
            as_inv = build_exact_solver(&sys.a().symmetric_part()?)?;
            schur_operator(sys.b(), sys.d(), &as_inv, SchurKind::H)?
        }
        TauStrategy::AdaptiveSs => {
            sym_inv = SymmetrizedInverse::new(&lu);
            schur_operator(sys.b(), sys.d(), &sym_inv, SchurKind::Ss)?
        }
        other => {
            return Err(Error::InvalidConfig(format!(
                "exact iteration cannot use strategy {other:?}"
            )))
        }
    };

    let mut notes = Vec::new();
    let theta = resolve_theta(sys, cfg, s_inv.as_ref(), &num_op, &mut notes)?;
    let metadata = TraceMetadata {
        algorithm: cfg.algorithm.name().into(),
        notes,
    };

    drive(sys, cfg.tol, cfg.max_iter, metadata, x, y, |x, y| {
        // x' = x + A⁻¹(f − Ax − By)
        let rx = sys.residual_x(x, y)?;
        let dx = lu.solve(&rx)?;
        axpy(x, 1.0, &dx);
        // y' = y + θ·τᵢ·Ŝ⁻¹(Bᵀx' − Dy − g)
        let gi = sys.residual_y(x, y)?;
        let (tau, z) = tau_and_direction(&gi, s_inv.as_ref(), &num_op)?;
        axpy(y, theta * tau, &z);
        Ok(StepInfo {
            tau: Some(tau),
            omega: None,
        })
    })
}

fn run_inexact_uzawa(
    sys: &SaddleSystem,
    cfg: &SolverConfig,
    x: Vec<f64>,
    y: Vec<f64>,
) -> Result<Solution> {
    let a_s = sys.a().symmetric_part()?;
    let a0_inv = cfg.a_precond.build(&a_s)?;
    let s_inv = build_schur_inverse(sys, &cfg.schur_precond, DEFAULT_DENSE_CAP)?;
    let m_op = schur_operator(sys.b(), sys.d(), a0_inv.as_ref(), SchurKind::M)?;
    let metadata = TraceMetadata {
        algorithm: cfg.algorithm.name().into(),
        notes: Vec::new(),
    };
    let omega = cfg.omega;
    let delta = cfg.delta;

    drive(sys, cfg.tol, cfg.max_iter, metadata, x, y, |x, y| {
        let rx = sys.residual_x(x, y)?;
        let dx = a0_inv.apply(&rx)?;
        axpy(x, omega, &dx);
        let gi = sys.residual_y(x, y)?;
        let (tau, z) = tau_and_direction(&gi, s_inv.as_ref(), &m_op)?;
        axpy(y, delta * tau, &z);
        Ok(StepInfo {
            tau: Some(tau),
            omega: None,
        })
    })
}

fn run_bpv(sys: &SaddleSystem, cfg: &SolverConfig, x: Vec<f64>, y: Vec<f64>) -> Result<Solution> {
    let a_s = sys.a().symmetric_part()?;
    let a0_inv = cfg.a_precond.build(&a_s)?;
    let q_b_inv = build_schur_inverse(sys, &cfg.schur_precond, DEFAULT_DENSE_CAP)?;
    let tau = match cfg.strategy() {
        TauStrategy::Fixed { tau } => tau,
        other => {
            return Err(Error::InvalidConfig(format!(
                "fixed-parameter baseline requires a fixed tau, got {other:?}"
            )))
        }
    };
    let mut notes = Vec::new();
    if sys.d().nnz() > 0 {
        notes.push(
            "fixed-parameter baseline extended to D != 0: multiplier residual includes -D*y".into(),
        );
    }
    let metadata = TraceMetadata {
        algorithm: cfg.algorithm.name().into(),
        notes,
    };
    let delta = cfg.delta;

    drive(sys, cfg.tol, cfg.max_iter, metadata, x, y, |x, y| {
        let rx = sys.residual_x(x, y)?;
        let dx = a0_inv.apply(&rx)?;
        axpy(x, delta, &dx);
        let gi = sys.residual_y(x, y)?;
        let z = q_b_inv.apply(&gi)?;
        axpy(y, tau, &z);
        Ok(StepInfo {
            tau: Some(tau),
            omega: None,
        })
    })
}

fn run_hu_zou(
    sys: &SaddleSystem,
    cfg: &SolverConfig,
    x: Vec<f64>,
    y: Vec<f64>,
) -> Result<Solution> {
    // x-side preconditioner built from the full (possibly nonsymmetric) A;
    // an incomplete-Cholesky request falls back to the symmetric part.
    let a_s = sys.a().symmetric_part()?;
    let a_hat: Box<dyn LinearOperator> = match &cfg.a_precond {
        PreconditionerSpec::IcDroptol { .. } => cfg.a_precond.build(&a_s)?,
        spec => spec.build(sys.a())?,
    };
    // the relaxation-parameter operator matches the inexact iteration
    let a0_inv = cfg.a_precond.build(&a_s)?;
    let s_inv = build_schur_inverse(sys, &cfg.schur_precond, DEFAULT_DENSE_CAP)?;
    let m_op = schur_operator(sys.b(), sys.d(), a0_inv.as_ref(), SchurKind::M)?;

    let mut notes = vec![
        "two-parameter adaptive variant: no convergence guarantee for nonsymmetric systems".into(),
    ];
    let theta = match cfg.theta {
        Some(t) => t,
        None => {
            notes.push(format!(
                "theta defaulted to delta = {} for the two-parameter variant",
                cfg.delta
            ));
            cfg.delta
        }
    };
    let metadata = TraceMetadata {
        algorithm: cfg.algorithm.name().into(),
        notes,
    };

    drive(sys, cfg.tol, cfg.max_iter, metadata, x, y, |x, y| {
        let fi = sys.residual_x(x, y)?;
        let omega_i = if fi.iter().all(|&v| v == 0.0) {
            1.0
        } else {
            let r = a_hat.apply(&fi)?;
            let ar = sys.a().spmv(&r)?;
            let den = dot(&ar, &r);
            if den.is_nan() || den <= DENOM_FLOOR {
                return Err(Error::OperatorNotPositive {
                    context: "x-residual direction (omega denominator)",
                });
            }
            let omega_i = dot(&fi, &r) / den;
            axpy(x, omega_i, &r);
            omega_i
        };
        let gi = sys.residual_y(x, y)?;
        let (tau, z) = tau_and_direction(&gi, s_inv.as_ref(), &m_op)?;
        axpy(y, theta * tau, &z);
        Ok(StepInfo {
            tau: Some(tau),
            omega: Some(omega_i),
        })
    })
}
