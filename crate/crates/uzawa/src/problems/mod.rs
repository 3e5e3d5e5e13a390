//! Test-problem generators: a staggered-grid discretization of the Oseen
//! equations on the unit square (lid-driven cavity boundary conditions), a
//! Navier-Stokes driver via Picard iteration, and a seeded synthetic
//! generator with planted solutions and controllable constants.

mod oseen;
mod picard;
mod synthetic;

pub use oseen::{assemble_oseen, generate_oseen, oseen_vector_laplacian, WindModel};
pub use picard::{
    export_fields, picard_navier_stokes, picard_navier_stokes_with, pressure_grid, InnerSolver,
    PicardResult, PicardStep,
};
pub use synthetic::{generate_synthetic, SyntheticSpec, SyntheticSystem};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Staggered-grid Oseen problem on (0,1)²: x-velocities on vertical cell
/// edges, y-velocities on horizontal edges, pressure at cell centers.
/// Dirichlet walls with a unit tangential velocity on the top boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OseenSpec {
    /// Cells per side.
    pub grid_n: usize,
    /// Viscosity.
    pub nu: f64,
    #[serde(default)]
    pub wind: WindSpec,
    #[serde(default)]
    pub d_mode: DMode,
    #[serde(default)]
    pub pressure_fix: PressureFix,
}

impl OseenSpec {
    pub fn new(grid_n: usize, nu: f64) -> Self {
        OseenSpec {
            grid_n,
            nu,
            wind: WindSpec::default(),
            d_mode: DMode::default(),
            pressure_fix: PressureFix::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 4 {
            return Err(Error::InvalidConfig(format!(
                "grid_n must be at least 4, got {}",
                self.grid_n
            )));
        }
        if !(self.nu.is_finite() && self.nu > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "viscosity must be positive, got {}",
                self.nu
            )));
        }
        if let DMode::PressureStabilization { eps } = self.d_mode {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "stabilization eps must be positive, got {eps}"
                )));
            }
        }
        Ok(())
    }

    /// Velocity unknowns: 2·N·(N−1).
    pub fn n_velocity(&self) -> usize {
        2 * self.grid_n * (self.grid_n - 1)
    }

    /// Pressure unknowns after the nullspace fix.
    pub fn m_pressure(&self) -> usize {
        match self.pressure_fix {
            PressureFix::PinFirstDof => self.grid_n * self.grid_n - 1,
            PressureFix::ProjectConstants => self.grid_n * self.grid_n,
        }
    }
}

/// Convection wind: the built-in recirculating cavity field
/// w = [8x(1−x)(2y−1), −8y(1−y)(2x−1)] or a constant vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindSpec {
    #[default]
    CavityWind,
    Constant {
        wx: f64,
        wy: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DMode {
    #[default]
    None,
    /// D = eps·h²·I.
    PressureStabilization { eps: f64 },
}

/// How the constant-pressure nullspace is removed. Pinning deletes the first
/// pressure unknown (and its constraint row). The projection variant keeps
/// the full pressure space; the iterations stay orthogonal to constants as
/// long as the Schur preconditioner is a scaled identity and the initial
/// multiplier guess is mean-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureFix {
    #[default]
    PinFirstDof,
    ProjectConstants,
}

/// Velocity field on the staggered grid, stored as the interior unknowns in
/// the same layout as the solver's x vector (x-velocities first).
#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredField {
    n: usize,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl StaggeredField {
    pub fn zero(n: usize) -> Self {
        StaggeredField {
            n,
            u: vec![0.0; (n - 1) * n],
            v: vec![0.0; n * (n - 1)],
        }
    }

    pub fn from_solution(n: usize, x: &[f64]) -> Result<Self> {
        let n_u = (n - 1) * n;
        let n_v = n * (n - 1);
        if x.len() != n_u + n_v {
            return Err(Error::DimensionMismatch {
                context: "StaggeredField::from_solution",
                expected: n_u + n_v,
                found: x.len(),
            });
        }
        Ok(StaggeredField {
            n,
            u: x[..n_u].to_vec(),
            v: x[n_u..].to_vec(),
        })
    }

    pub fn grid_n(&self) -> usize {
        self.n
    }

    /// Interior unknowns concatenated, matching the solver layout.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = self.u.clone();
        out.extend_from_slice(&self.v);
        out
    }

    /// x-velocity at the vertical edge (i·h, (j+1/2)h), i in 0..=n; the
    /// side walls carry the homogeneous boundary value.
    pub fn u_edge(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i <= self.n && j < self.n);
        if i == 0 || i == self.n {
            0.0
        } else {
            self.u[j * (self.n - 1) + (i - 1)]
        }
    }

    /// y-velocity at the horizontal edge ((i+1/2)h, j·h), j in 0..=n; the
    /// bottom and top walls carry the homogeneous boundary value.
    pub fn v_edge(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.n && j <= self.n);
        if j == 0 || j == self.n {
            0.0
        } else {
            self.v[(j - 1) * self.n + i]
        }
    }

    /// Cell-centered interpolation of the x-velocity.
    pub fn u_center(&self, i: usize, j: usize) -> f64 {
        0.5 * (self.u_edge(i, j) + self.u_edge(i + 1, j))
    }

    /// Cell-centered interpolation of the y-velocity.
    pub fn v_center(&self, i: usize, j: usize) -> f64 {
        0.5 * (self.v_edge(i, j) + self.v_edge(i, j + 1))
    }
}
