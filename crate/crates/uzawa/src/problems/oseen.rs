//! Staggered-grid finite-difference assembly of the Oseen system on the
//! unit square.
//!
//! Layout: x-velocities on vertical edges (i·h, (j+1/2)h), y-velocities on
//! horizontal edges ((i+1/2)h, j·h), pressure at cell centers. Dirichlet
//! boundary conditions u = v = 0 on the side and bottom walls and u = 1,
//! v = 0 on the top boundary are folded into the right-hand side; tangential
//! values next to a wall are closed with ghost reflection.
//!
//! Convection is discretized in the split form
//! ½·w·∇u + ½·∇·(w u), with the wind sampled at the velocity points of the
//! component being transported. For interior point pairs the two halves
//! produce exactly antisymmetric coefficients, so the symmetric part of the
//! assembled A equals the scaled vector Laplacian. At a wall the ghost
//! coefficient reduces to the wall-normal wind, which vanishes for the
//! recirculating cavity wind and for any discrete no-penetration field; the
//! constant-wind option keeps the resulting symmetric diagonal terms.

use crate::error::{Error, Result};
use crate::linalg::csr::CsrMatrix;
use crate::problems::{DMode, OseenSpec, PressureFix, StaggeredField, WindSpec};
use crate::system::SaddleSystem;

/// Wind field used during assembly: an analytic spec or a discrete velocity
/// field from a previous iterate.
pub enum WindModel<'a> {
    Spec(WindSpec),
    Field(&'a StaggeredField),
}

fn cavity_w1(x: f64, y: f64) -> f64 {
    8.0 * x * (1.0 - x) * (2.0 * y - 1.0)
}

fn cavity_w2(x: f64, y: f64) -> f64 {
    -8.0 * y * (1.0 - y) * (2.0 * x - 1.0)
}

impl WindModel<'_> {
    /// w₁ at the x-velocity point (i·h, (j+1/2)h); i may be 0 or n (walls).
    fn w1_at_u(&self, n: usize, i: usize, j: usize) -> f64 {
        let h = 1.0 / n as f64;
        match self {
            WindModel::Spec(WindSpec::CavityWind) => cavity_w1(i as f64 * h, (j as f64 + 0.5) * h),
            WindModel::Spec(WindSpec::Constant { wx, .. }) => *wx,
            WindModel::Field(f) => f.u_edge(i, j),
        }
    }

    /// w₂ at the interior x-velocity point (i·h, (j+1/2)h).
    fn w2_at_u(&self, n: usize, i: usize, j: usize) -> f64 {
        let h = 1.0 / n as f64;
        match self {
            WindModel::Spec(WindSpec::CavityWind) => cavity_w2(i as f64 * h, (j as f64 + 0.5) * h),
            WindModel::Spec(WindSpec::Constant { wy, .. }) => *wy,
            WindModel::Field(f) => {
                0.25 * (f.v_edge(i - 1, j)
                    + f.v_edge(i, j)
                    + f.v_edge(i - 1, j + 1)
                    + f.v_edge(i, j + 1))
            }
        }
    }

    /// w₂ at the wall point (i·h, y_wall), y_wall in {0, 1}.
    fn w2_wall_at_u(&self, n: usize, i: usize, top: bool) -> f64 {
        let h = 1.0 / n as f64;
        let y = if top { 1.0 } else { 0.0 };
        match self {
            WindModel::Spec(WindSpec::CavityWind) => cavity_w2(i as f64 * h, y),
            WindModel::Spec(WindSpec::Constant { wy, .. }) => *wy,
            // no penetration through solid walls
            WindModel::Field(_) => 0.0,
        }
    }

    /// w₁ at the y-velocity point ((i+1/2)h, j·h).
    fn w1_at_v(&self, n: usize, i: usize, j: usize) -> f64 {
        let h = 1.0 / n as f64;
        match self {
            WindModel::Spec(WindSpec::CavityWind) => cavity_w1((i as f64 + 0.5) * h, j as f64 * h),
            WindModel::Spec(WindSpec::Constant { wx, .. }) => *wx,
            WindModel::Field(f) => {
                0.25 * (f.u_edge(i, j - 1)
                    + f.u_edge(i + 1, j - 1)
                    + f.u_edge(i, j)
                    + f.u_edge(i + 1, j))
            }
        }
    }

    /// w₂ at the y-velocity point ((i+1/2)h, j·h).
    fn w2_at_v(&self, n: usize, i: usize, j: usize) -> f64 {
        let h = 1.0 / n as f64;
        match self {
            WindModel::Spec(WindSpec::CavityWind) => cavity_w2((i as f64 + 0.5) * h, j as f64 * h),
            WindModel::Spec(WindSpec::Constant { wy, .. }) => *wy,
            WindModel::Field(f) => f.v_edge(i, j),
        }
    }

    /// w₁ at the wall point (x_wall, j·h), x_wall in {0, 1}.
    fn w1_wall_at_v(&self, n: usize, j: usize, right: bool) -> f64 {
        let h = 1.0 / n as f64;
        let x = if right { 1.0 } else { 0.0 };
        match self {
            WindModel::Spec(WindSpec::CavityWind) => cavity_w1(x, j as f64 * h),
            WindModel::Spec(WindSpec::Constant { wx, .. }) => *wx,
            WindModel::Field(_) => 0.0,
        }
    }
}

struct MacGrid {
    n: usize,
    h: f64,
}

impl MacGrid {
    fn new(n: usize) -> Self {
        MacGrid {
            n,
            h: 1.0 / n as f64,
        }
    }

    fn n_u(&self) -> usize {
        (self.n - 1) * self.n
    }

    fn n_vel(&self) -> usize {
        2 * self.n * (self.n - 1)
    }

    fn u_id(&self, i: usize, j: usize) -> usize {
        debug_assert!((1..self.n).contains(&i) && j < self.n);
        j * (self.n - 1) + (i - 1)
    }

    fn v_id(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && (1..self.n).contains(&j));
        self.n_u() + (j - 1) * self.n + i
    }

    fn cell_id(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }
}

/// Assemble only the viscous part (the scaled vector Laplacian with the
/// boundary closure), as a reference operator for the symmetric part of the
/// full assembly.
pub fn oseen_vector_laplacian(spec: &OseenSpec) -> Result<CsrMatrix> {
    spec.validate()?;
    let grid = MacGrid::new(spec.grid_n);
    let (triplets, _) = viscous_part(&grid, spec.nu);
    CsrMatrix::from_triplets(grid.n_vel(), grid.n_vel(), &triplets)
}

/// Viscous triplets and the boundary contribution to f (the lid value).
///
/// Per-side accounting of -νΔ: a side whose neighbor is a real grid point
/// (interior unknown or wall point carrying a Dirichlet value) contributes
/// ν/h² to the diagonal plus the neighbor coupling; a ghost side closed by
/// reflection contributes 2ν/h² to the diagonal and 2ν/h²·u_wall to f.
fn viscous_part(grid: &MacGrid, nu: f64) -> (Vec<(usize, usize, f64)>, Vec<f64>) {
    let n = grid.n;
    let h2 = grid.h * grid.h;
    let visc = nu / h2;
    let mut t = Vec::new();
    let mut f = vec![0.0; grid.n_vel()];

    // x-momentum rows
    for j in 0..n {
        for i in 1..n {
            let r = grid.u_id(i, j);
            // x-neighbors are grid points (the side walls hold u = 0)
            let mut diag = 2.0 * visc;
            if i > 1 {
                t.push((r, grid.u_id(i - 1, j), -visc));
            }
            if i + 1 < n {
                t.push((r, grid.u_id(i + 1, j), -visc));
            }
            // y-neighbors: ghost reflection at the bottom wall and the lid
            if j > 0 {
                t.push((r, grid.u_id(i, j - 1), -visc));
                diag += visc;
            } else {
                diag += 2.0 * visc;
            }
            if j + 1 < n {
                t.push((r, grid.u_id(i, j + 1), -visc));
                diag += visc;
            } else {
                diag += 2.0 * visc;
                f[r] += 2.0 * visc; // lid value u = 1
            }
            t.push((r, r, diag));
        }
    }

    // y-momentum rows
    for j in 1..n {
        for i in 0..n {
            let r = grid.v_id(i, j);
            // y-neighbors are grid points (bottom and top walls hold v = 0)
            let mut diag = 2.0 * visc;
            if j > 1 {
                t.push((r, grid.v_id(i, j - 1), -visc));
            }
            if j + 1 < n {
                t.push((r, grid.v_id(i, j + 1), -visc));
            }
            // x-neighbors: ghost reflection at the side walls
            if i > 0 {
                t.push((r, grid.v_id(i - 1, j), -visc));
                diag += visc;
            } else {
                diag += 2.0 * visc;
            }
            if i + 1 < n {
                t.push((r, grid.v_id(i + 1, j), -visc));
                diag += visc;
            } else {
                diag += 2.0 * visc;
            }
            t.push((r, r, diag));
        }
    }

    (t, f)
}

/// Assemble the full system for a given wind.
pub fn assemble_oseen(spec: &OseenSpec, wind: &WindModel) -> Result<SaddleSystem> {
    spec.validate()?;
    if let WindModel::Field(f) = wind {
        if f.grid_n() != spec.grid_n {
            return Err(Error::DimensionMismatch {
                context: "assemble_oseen: wind field grid",
                expected: spec.grid_n,
                found: f.grid_n(),
            });
        }
    }
    let grid = MacGrid::new(spec.grid_n);
    let n = grid.n;
    let h = grid.h;
    let quarter_h = 1.0 / (4.0 * h);
    let half_h = 1.0 / (2.0 * h);

    let (mut a_triplets, mut f) = viscous_part(&grid, spec.nu);

    // convection for the x-momentum rows
    for j in 0..n {
        for i in 1..n {
            let r = grid.u_id(i, j);
            let w1_p = wind.w1_at_u(n, i, j);
            let mut diag = 0.0;
            // transport along x: neighbors at the walls carry value 0
            if i > 1 {
                let c = -(w1_p + wind.w1_at_u(n, i - 1, j)) * quarter_h;
                a_triplets.push((r, grid.u_id(i - 1, j), c));
            }
            if i + 1 < n {
                let c = (w1_p + wind.w1_at_u(n, i + 1, j)) * quarter_h;
                a_triplets.push((r, grid.u_id(i + 1, j), c));
            }
            // transport along y: ghost closure at the bottom wall and lid
            let w2_p = wind.w2_at_u(n, i, j);
            if j > 0 {
                let c = -(w2_p + wind.w2_at_u(n, i, j - 1)) * quarter_h;
                a_triplets.push((r, grid.u_id(i, j - 1), c));
            } else {
                // ghost pair coefficient collapses to the wall-normal wind
                let w2_wall = wind.w2_wall_at_u(n, i, false);
                diag += w2_wall * half_h; // -sign * coeff on the reflection
            }
            if j + 1 < n {
                let c = (w2_p + wind.w2_at_u(n, i, j + 1)) * quarter_h;
                a_triplets.push((r, grid.u_id(i, j + 1), c));
            } else {
                let w2_wall = wind.w2_wall_at_u(n, i, true);
                diag -= w2_wall * half_h;
                f[r] -= w2_wall / h; // lid value u = 1 in the ghost
            }
            if diag != 0.0 {
                a_triplets.push((r, r, diag));
            }
        }
    }

    // convection for the y-momentum rows
    for j in 1..n {
        for i in 0..n {
            let r = grid.v_id(i, j);
            let w2_p = wind.w2_at_v(n, i, j);
            let mut diag = 0.0;
            if j > 1 {
                let c = -(w2_p + wind.w2_at_v(n, i, j - 1)) * quarter_h;
                a_triplets.push((r, grid.v_id(i, j - 1), c));
            }
            if j + 1 < n {
                let c = (w2_p + wind.w2_at_v(n, i, j + 1)) * quarter_h;
                a_triplets.push((r, grid.v_id(i, j + 1), c));
            }
            let w1_p = wind.w1_at_v(n, i, j);
            if i > 0 {
                let c = -(w1_p + wind.w1_at_v(n, i - 1, j)) * quarter_h;
                a_triplets.push((r, grid.v_id(i - 1, j), c));
            } else {
                let w1_wall = wind.w1_wall_at_v(n, j, false);
                diag += w1_wall * half_h;
            }
            if i + 1 < n {
                let c = (w1_p + wind.w1_at_v(n, i + 1, j)) * quarter_h;
                a_triplets.push((r, grid.v_id(i + 1, j), c));
            } else {
                let w1_wall = wind.w1_wall_at_v(n, j, true);
                diag -= w1_wall * half_h;
            }
            if diag != 0.0 {
                a_triplets.push((r, r, diag));
            }
        }
    }

    // merge duplicate positions (viscous + convection share neighbors)
    let a = merge_triplets(grid.n_vel(), grid.n_vel(), &a_triplets)?;

    // pressure gradient B and the pressure-column bookkeeping
    let pin = spec.pressure_fix == PressureFix::PinFirstDof;
    let m = spec.m_pressure();
    let col_of = |cell: usize| -> Option<usize> {
        if pin {
            if cell == 0 {
                None
            } else {
                Some(cell - 1)
            }
        } else {
            Some(cell)
        }
    };
    let mut b_triplets = Vec::new();
    let inv_h = 1.0 / h;
    for j in 0..n {
        for i in 1..n {
            let r = grid.u_id(i, j);
            if let Some(c) = col_of(grid.cell_id(i, j)) {
                b_triplets.push((r, c, inv_h));
            }
            if let Some(c) = col_of(grid.cell_id(i - 1, j)) {
                b_triplets.push((r, c, -inv_h));
            }
        }
    }
    for j in 1..n {
        for i in 0..n {
            let r = grid.v_id(i, j);
            if let Some(c) = col_of(grid.cell_id(i, j)) {
                b_triplets.push((r, c, inv_h));
            }
            if let Some(c) = col_of(grid.cell_id(i, j - 1)) {
                b_triplets.push((r, c, -inv_h));
            }
        }
    }
    let b = CsrMatrix::from_triplets(grid.n_vel(), m, &b_triplets)?;

    let d = match spec.d_mode {
        DMode::None => CsrMatrix::zeros(m, m),
        DMode::PressureStabilization { eps } => CsrMatrix::from_diag(&vec![eps * h * h; m]),
    };

    // every prescribed boundary velocity normal to a wall is zero, so the
    // continuity right-hand side vanishes identically
    let g = vec![0.0; m];

    SaddleSystem::new(a, b, d, f, g)
}

fn merge_triplets(
    n_rows: usize,
    n_cols: usize,
    triplets: &[(usize, usize, f64)],
) -> Result<CsrMatrix> {
    let mut sorted = triplets.to_vec();
    sorted.sort_by_key(|e| (e.0, e.1));
    let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(sorted.len());
    for (r, c, v) in sorted {
        match merged.last_mut() {
            Some(last) if last.0 == r && last.1 == c => last.2 += v,
            _ => merged.push((r, c, v)),
        }
    }
    CsrMatrix::from_triplets(n_rows, n_cols, &merged)
}

/// Generate the system described by the spec with its analytic wind.
pub fn generate_oseen(spec: &OseenSpec) -> Result<SaddleSystem> {
    assemble_oseen(spec, &WindModel::Spec(spec.wind))
}
