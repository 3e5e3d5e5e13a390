//! The four subcommands: generate, solve, diagnose, ns.

use std::fs::{self, File};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::json;

use uzawa::diagnostics::build_report;
use uzawa::linalg::io::{write_matrix_market_file, write_vector_text_file};
use uzawa::operators::PreconditionerSpec;
use uzawa::problems::{
    export_fields, picard_navier_stokes_with, InnerSolver, OseenSpec, StaggeredField,
};
use uzawa::solvers::{
    build_schur_inverse, gmres_block, solve, Algorithm, SaddleSystem, SolveStatus, SolverConfig,
};
use uzawa::DEFAULT_DENSE_CAP;

use crate::config::{ExperimentConfig, ProblemSpec, RunSpec, TraceFormat};
use crate::CliError;

/// Write the assembled system as Matrix Market plus vector files; returns
/// the five paths.
pub fn cmd_generate(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    cfg.validate(false)?;
    let sys = cfg.problem.build()?;
    fs::create_dir_all(out)?;
    let paths = vec![
        out.join("a.mtx"),
        out.join("b.mtx"),
        out.join("d.mtx"),
        out.join("f.vec"),
        out.join("g.vec"),
    ];
    write_matrix_market_file(&paths[0], sys.a(), false).map_err(CliError::io)?;
    write_matrix_market_file(&paths[1], sys.b(), false).map_err(CliError::io)?;
    write_matrix_market_file(&paths[2], sys.d(), true).map_err(CliError::io)?;
    write_vector_text_file(&paths[3], sys.f()).map_err(CliError::io)?;
    write_vector_text_file(&paths[4], sys.g()).map_err(CliError::io)?;
    Ok(paths)
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub label: String,
    pub status: String,
    pub iters: usize,
    pub final_residual: f64,
    pub final_rel_residual: f64,
    pub wall_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    pub rows: Vec<RunSummary>,
}

impl SolveSummary {
    pub fn any_solver_failure(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "label,status,iters,final_residual,final_rel_residual,wall_seconds,error\n",
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.label,
                r.status,
                r.iters,
                r.final_residual,
                r.final_rel_residual,
                r.wall_seconds,
                r.error.clone().unwrap_or_default()
            ));
        }
        s
    }

    pub fn render_table(&self) -> String {
        let mut s = format!(
            "{:<28} {:>8} {:>12} {:>10}\n",
            "run", "iter", "residual", "seconds"
        );
        for r in &self.rows {
            match &r.error {
                Some(e) => s.push_str(&format!("{:<28} {:>8} {e}\n", r.label, "-")),
                None => s.push_str(&format!(
                    "{:<28} {:>8} {:>12.3e} {:>10.2}\n",
                    r.label, r.iters, r.final_residual, r.wall_seconds
                )),
            }
        }
        s
    }
}

fn write_trace_files(
    out: &Path,
    label: &str,
    trace: &uzawa::solvers::IterationTrace,
    formats: &[TraceFormat],
) -> Result<(), CliError> {
    for format in formats {
        match format {
            TraceFormat::Jsonl => {
                let mut f = File::create(out.join(format!("{label}.jsonl")))?;
                f.write_all(trace.to_jsonl().as_bytes())?;
            }
            TraceFormat::Csv => {
                let mut f = File::create(out.join(format!("{label}.csv")))?;
                f.write_all(trace.to_csv().as_bytes())?;
            }
        }
    }
    Ok(())
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Converged => "converged",
        SolveStatus::MaxIter => "max_iter",
        SolveStatus::Breakdown => "breakdown",
    }
}

/// Run every configured solver against the problem, writing one trace file
/// per run and a summary table. Per-run failures are recorded in the
/// summary; the remaining runs proceed.
pub fn cmd_solve(cfg: &ExperimentConfig, out: &Path) -> Result<SolveSummary, CliError> {
    cfg.validate(true)?;
    let sys = cfg.problem.build()?;
    fs::create_dir_all(out)?;
    let mut rows = Vec::new();
    for run in &cfg.runs {
        let t0 = Instant::now();
        let outcome = run_one(&sys, run);
        let wall = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(sol) => {
                write_trace_files(out, &run.label, &sol.trace, &cfg.formats)?;
                rows.push(RunSummary {
                    label: run.label.clone(),
                    status: status_name(sol.trace.status).into(),
                    iters: sol.trace.iterations(),
                    final_residual: sol.trace.final_residual(),
                    final_rel_residual: sol.trace.final_residual()
                        / sys.rhs_norm().max(f64::MIN_POSITIVE),
                    wall_seconds: wall,
                    error: None,
                });
            }
            Err(e) => rows.push(RunSummary {
                label: run.label.clone(),
                status: "breakdown".into(),
                iters: 0,
                final_residual: f64::NAN,
                final_rel_residual: f64::NAN,
                wall_seconds: wall,
                error: Some(e.to_string()),
            }),
        }
    }
    let summary = SolveSummary { rows };
    fs::write(out.join("summary.csv"), summary.to_csv())?;
    Ok(summary)
}

fn run_one(sys: &SaddleSystem, run: &RunSpec) -> Result<uzawa::solvers::Solution, uzawa::Error> {
    match (&run.uzawa, &run.gmres) {
        (Some(cfg), None) => solve(sys, cfg, None, None),
        (None, Some(params)) => gmres_block(sys, params, None, None),
        _ => unreachable!("validated"),
    }
}

/// Spectral report plus window verdicts for the configured parameters.
pub fn cmd_diagnose(
    cfg: &ExperimentConfig,
    out: Option<&Path>,
) -> Result<serde_json::Value, CliError> {
    cfg.validate(false)?;
    let sys = cfg.problem.build()?;
    let cap = cfg.dense_cap.unwrap_or(DEFAULT_DENSE_CAP);
    let solver_cfg = cfg
        .runs
        .iter()
        .find_map(|r| r.uzawa.clone())
        .unwrap_or_else(|| SolverConfig::new(Algorithm::InexactUzawa));

    let value = match diagnose_report(&sys, &solver_cfg, cap) {
        Ok((report, verdicts)) => json!({
            "report": report,
            "verdicts": verdicts,
        }),
        Err(uzawa::Error::DenseCapExceeded { dim, cap }) => json!({
            "report": null,
            "verdicts": [],
            "explanation": format!(
                "dense workspace limit exceeded (dimension {dim} > cap {cap}); \
                 spectral constants need dense eigensolves and were not computed"
            ),
        }),
        Err(e) => return Err(CliError::solver(e)),
    };
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(
            dir.join("report.json"),
            serde_json::to_string_pretty(&value).unwrap(),
        )?;
    }
    Ok(value)
}

fn diagnose_report(
    sys: &SaddleSystem,
    solver_cfg: &SolverConfig,
    cap: usize,
) -> Result<(uzawa::diagnostics::SpectralReport, Vec<String>), uzawa::Error> {
    let s_inv = build_schur_inverse(sys, &solver_cfg.schur_precond, cap)?;
    let a_s = sys.a().symmetric_part()?;
    let a0_inv = solver_cfg.a_precond.build(&a_s)?;
    let report = build_report(
        sys,
        s_inv.as_ref(),
        a0_inv.as_ref(),
        solver_cfg.omega,
        solver_cfg.delta,
        cap,
    )?;
    let mut verdicts = Vec::new();
    verdicts.push(format!(
        "omega={} {} the inexact-iteration window (omega_max={:.6e})",
        report.omega,
        if report.omega < report.omega_max {
            "inside"
        } else {
            "outside"
        },
        report.omega_max
    ));
    verdicts.push(format!(
        "delta={} {} the convergence condition (delta_max={})",
        report.delta,
        if report.delta < report.delta_max {
            "inside"
        } else {
            "outside"
        },
        report.delta_max
    ));
    if let Some(theta) = solver_cfg.theta {
        verdicts.push(format!(
            "theta={theta} {} the exact-iteration window (theta_max={:.6e})",
            if theta < report.theta_max {
                "inside"
            } else {
                "outside"
            },
            report.theta_max
        ));
    }
    Ok((report, verdicts))
}

#[derive(Debug, Clone, Serialize)]
pub struct NsRunSummary {
    pub label: String,
    pub converged: bool,
    pub picard_iters: usize,
    pub total_inner_iters: usize,
    pub final_update_rel: f64,
    pub wall_seconds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NsSummary {
    pub rows: Vec<NsRunSummary>,
}

impl NsSummary {
    pub fn any_solver_failure(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "label,converged,picard_iters,total_inner_iters,final_update_rel,wall_seconds,error\n",
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.label,
                r.converged,
                r.picard_iters,
                r.total_inner_iters,
                r.final_update_rel,
                r.wall_seconds,
                r.error.clone().unwrap_or_default()
            ));
        }
        s
    }

    pub fn render_table(&self) -> String {
        let mut s = format!(
            "{:<28} {:>6} {:>12} {:>10}\n",
            "run", "iter", "inner total", "seconds"
        );
        for r in &self.rows {
            match &r.error {
                Some(e) => s.push_str(&format!("{:<28} {:>6} {e}\n", r.label, "-")),
                None => s.push_str(&format!(
                    "{:<28} {:>6} {:>12} {:>10.2}\n",
                    r.label, r.picard_iters, r.total_inner_iters, r.wall_seconds
                )),
            }
        }
        s
    }
}

/// Run the Navier-Stokes fixed-point loop for every configured inner
/// solver; writes one Picard summary per run and optionally the final
/// velocity/pressure fields.
pub fn cmd_ns(cfg: &ExperimentConfig, out: &Path) -> Result<NsSummary, CliError> {
    cfg.validate(true)?;
    let spec = match &cfg.problem {
        ProblemSpec::Oseen(spec) => spec.clone(),
        _ => {
            return Err(CliError::Config(
                "the ns command needs an oseen problem".into(),
            ))
        }
    };
    fs::create_dir_all(out)?;
    let mut rows = Vec::new();
    for run in &cfg.runs {
        let t0 = Instant::now();
        let inner = match (&run.uzawa, &run.gmres) {
            (Some(c), None) => InnerSolver::Uzawa(c),
            (None, Some(p)) => InnerSolver::Gmres(p),
            _ => unreachable!("validated"),
        };
        let outcome =
            picard_navier_stokes_with(&spec, &inner, cfg.picard.outer_tol, cfg.picard.max_picard);
        let wall = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(res) => {
                write_picard_csv(out, &run.label, &res.steps)?;
                if cfg.export_fields {
                    export_run_fields(out, &run.label, &res.velocity, &res.pressure, &spec)?;
                }
                rows.push(NsRunSummary {
                    label: run.label.clone(),
                    converged: res.converged,
                    picard_iters: res.outer_iterations(),
                    total_inner_iters: res.total_inner_iterations(),
                    final_update_rel: res.steps.last().map(|s| s.update_rel).unwrap_or(f64::NAN),
                    wall_seconds: wall,
                    error: None,
                });
            }
            Err(e) => rows.push(NsRunSummary {
                label: run.label.clone(),
                converged: false,
                picard_iters: 0,
                total_inner_iters: 0,
                final_update_rel: f64::NAN,
                wall_seconds: wall,
                error: Some(e.to_string()),
            }),
        }
    }
    let summary = NsSummary { rows };
    fs::write(out.join("picard_summary.csv"), summary.to_csv())?;
    Ok(summary)
}

fn write_picard_csv(
    out: &Path,
    label: &str,
    steps: &[uzawa::problems::PicardStep],
) -> Result<(), CliError> {
    let mut s = String::from("picard_iter,inner_iters,inner_status,update_rel,wall_ns\n");
    for step in steps {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            step.iteration,
            step.inner_iterations,
            status_name(step.inner_status),
            step.update_rel,
            step.wall_ns
        ));
    }
    fs::write(out.join(format!("{label}_picard.csv")), s)?;
    Ok(())
}

fn export_run_fields(
    out: &Path,
    label: &str,
    velocity: &StaggeredField,
    pressure: &[f64],
    spec: &OseenSpec,
) -> Result<(), CliError> {
    let dir = out.join(format!("{label}_fields"));
    export_fields(velocity, pressure, spec, &dir).map_err(CliError::io)?;
    Ok(())
}

/// Build the default Schur preconditioner spec used by diagnose when the
/// config has no runs.
pub fn default_schur() -> PreconditionerSpec {
    PreconditionerSpec::ScaledIdentity { scale: 1.0 }
}
