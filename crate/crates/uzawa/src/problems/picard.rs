//! Navier-Stokes driver: Picard iteration over Oseen solves, with the wind
//! set to the previous velocity iterate, plus cell-centered field export.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::vec::norm2;
use crate::problems::oseen::{assemble_oseen, WindModel};
use crate::problems::{OseenSpec, PressureFix, StaggeredField};
use crate::solvers::{gmres_block, solve, GmresParams, SolveStatus, SolverConfig};

#[derive(Debug, Clone, Serialize)]
pub struct PicardStep {
    pub iteration: usize,
    pub inner_iterations: usize,
    pub inner_status: SolveStatus,
    pub inner_final_residual: f64,
    /// ‖velocity update‖ / ‖velocity‖ after this step.
    pub update_rel: f64,
    pub wall_ns: u64,
}

#[derive(Debug, Clone)]
pub struct PicardResult {
    pub velocity: StaggeredField,
    pub pressure: Vec<f64>,
    pub steps: Vec<PicardStep>,
    pub converged: bool,
}

impl PicardResult {
    pub fn outer_iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn total_inner_iterations(&self) -> usize {
        self.steps.iter().map(|s| s.inner_iterations).sum()
    }
}

/// Inner linear solver driving each Picard step.
pub enum InnerSolver<'a> {
    Uzawa(&'a SolverConfig),
    Gmres(&'a GmresParams),
}

/// Iterate Oseen solves with the wind set to the current velocity field.
/// The first step uses a zero wind; each inner solve is warm-started from
/// the previous iterate. Stops when the relative velocity update falls
/// below `outer_tol`.
pub fn picard_navier_stokes(
    spec: &OseenSpec,
    inner_cfg: &SolverConfig,
    outer_tol: f64,
    max_picard: usize,
) -> Result<PicardResult> {
    inner_cfg.validate()?;
    picard_navier_stokes_with(spec, &InnerSolver::Uzawa(inner_cfg), outer_tol, max_picard)
}

pub fn picard_navier_stokes_with(
    spec: &OseenSpec,
    inner: &InnerSolver,
    outer_tol: f64,
    max_picard: usize,
) -> Result<PicardResult> {
    spec.validate()?;
    if !(outer_tol.is_finite() && outer_tol > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "outer_tol must be positive, got {outer_tol}"
        )));
    }
    if max_picard == 0 {
        return Err(Error::InvalidConfig("max_picard must be at least 1".into()));
    }

    let mut wind = StaggeredField::zero(spec.grid_n);
    let mut x_prev: Option<Vec<f64>> = None;
    let mut y_prev: Option<Vec<f64>> = None;
    let mut pressure = vec![0.0; spec.m_pressure()];
    let mut steps = Vec::new();
    let mut converged = false;

    for k in 1..=max_picard {
        let t0 = Instant::now();
        let sys = assemble_oseen(spec, &WindModel::Field(&wind))?;
        let sol = match inner {
            InnerSolver::Uzawa(cfg) => solve(&sys, cfg, x_prev.as_deref(), y_prev.as_deref()),
            InnerSolver::Gmres(params) => {
                gmres_block(&sys, params, x_prev.as_deref(), y_prev.as_deref())
            }
        }
        .map_err(|e| e.at_iteration(k))?;

        let old = wind.to_vec();
        let norm_new = norm2(&sol.x);
        let diff: f64 = sol
            .x
            .iter()
            .zip(&old)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let update_rel = if norm_new > 0.0 {
            diff / norm_new
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };

        wind = StaggeredField::from_solution(spec.grid_n, &sol.x)?;
        pressure = sol.y.clone();
        steps.push(PicardStep {
            iteration: k,
            inner_iterations: sol.trace.iterations(),
            inner_status: sol.trace.status,
            inner_final_residual: sol.trace.final_residual(),
            update_rel,
            wall_ns: t0.elapsed().as_nanos() as u64,
        });
        x_prev = Some(sol.x);
        y_prev = Some(sol.y);

        if update_rel <= outer_tol {
            converged = true;
            break;
        }
    }

    Ok(PicardResult {
        velocity: wind,
        pressure,
        steps,
        converged,
    })
}

/// Expand the pressure unknowns to the full cell grid (the pinned cell
/// carries its eliminated value 0).
pub fn pressure_grid(spec: &OseenSpec, y: &[f64]) -> Result<Vec<f64>> {
    let cells = spec.grid_n * spec.grid_n;
    if y.len() != spec.m_pressure() {
        return Err(Error::DimensionMismatch {
            context: "pressure_grid",
            expected: spec.m_pressure(),
            found: y.len(),
        });
    }
    Ok(match spec.pressure_fix {
        PressureFix::PinFirstDof => {
            let mut full = Vec::with_capacity(cells);
            full.push(0.0);
            full.extend_from_slice(y);
            full
        }
        PressureFix::ProjectConstants => y.to_vec(),
    })
}

/// Write cell-centered u, v, p grids as CSV files (`u.csv`, `v.csv`,
/// `p.csv`) into `dir`. Row j of each file holds the N values at height
/// y = (j + 1/2)h, bottom row first.
pub fn export_fields(
    velocity: &StaggeredField,
    pressure: &[f64],
    spec: &OseenSpec,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let n = spec.grid_n;
    if velocity.grid_n() != n {
        return Err(Error::DimensionMismatch {
            context: "export_fields",
            expected: n,
            found: velocity.grid_n(),
        });
    }
    let p_full = pressure_grid(spec, pressure)?;
    fs::create_dir_all(dir)?;

    let write_grid = |name: &str, value: &dyn Fn(usize, usize) -> f64| -> Result<PathBuf> {
        let path = dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        for j in 0..n {
            let mut line = String::new();
            for i in 0..n {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&format!("{}", value(i, j)));
            }
            writeln!(w, "{line}")?;
        }
        Ok(path)
    };

    let u_path = write_grid("u.csv", &|i, j| velocity.u_center(i, j))?;
    let v_path = write_grid("v.csv", &|i, j| velocity.v_center(i, j))?;
    let p_path = write_grid("p.csv", &|i, j| p_full[j * n + i])?;
    Ok(vec![u_path, v_path, p_path])
}
