//! Uncondensed Newton step over all cell and face unknowns, used as an
//! oracle for the static condensation on small meshes.
//!
//! Unknown order: six cell unknowns per cell (`L_V`, `u`, `p`), then the
//! face unknowns in [`crate::dofs::DofMap`] order (multiplier last).

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::ns::{cell_blocks, Discretization, EvalOptions, N_CELL};
use crate::sparse::{solve_linear, SparseSystem};
use crate::state::SolutionState;

/// Largest monolithic dimension this oracle accepts.
pub const MONOLITHIC_CAP: usize = 20_000;

/// Full Jacobian and right-hand side `−R` at `state`.
pub fn monolithic_system(disc: &Discretization, state: &SolutionState, tau_uhat: &[Vec2]) -> Result<SparseSystem> {
    let n_cells = disc.mesh.n_cells();
    let off = N_CELL * n_cells;
    let dim = off + disc.dofs.dim();
    if dim > MONOLITHIC_CAP {
        return Err(Error::DimensionCap { dim, cap: MONOLITHIC_CAP });
    }
    let lambda = state.lambda.unwrap_or(0.0);
    let lambda_idx = disc.dofs.lambda().map(|k| off + k);
    let mut trips = Vec::new();
    let mut rhs = vec![0.0; dim];
    for e in 0..n_cells {
        let b = cell_blocks(disc, state, tau_uhat, e, EvalOptions::default());
        let (slots, ns) = disc.cell_slots(e);
        let c = b.constraint_row(disc.mesh.area(e));
        let row0 = N_CELL * e;
        for r in 0..N_CELL {
            trips.push((row0 + r, row0 + r, b.t_uu[r]));
            rhs[row0 + r] = -b.r_u[r];
            for k in 0..ns {
                if let Some(g) = slots[k] {
                    trips.push((row0 + r, off + g, b.t_ul[r][k]));
                }
            }
        }
        for a in 0..ns {
            let Some(ga) = slots[a] else { continue };
            rhs[off + ga] -= b.r_l[a];
            for r in 0..N_CELL {
                trips.push((off + ga, row0 + r, b.t_lu[a][r]));
            }
            for k in 0..ns {
                if let Some(gk) = slots[k] {
                    trips.push((off + ga, off + gk, b.t_ll[a][k]));
                }
            }
            if let Some(li) = lambda_idx {
                trips.push((off + ga, li, c[a]));
                rhs[off + ga] -= c[a] * lambda;
            }
        }
        if let Some(li) = lambda_idx {
            let area = disc.mesh.area(e);
            trips.push((li, row0 + 5, area));
            rhs[li] -= area * state.p[e];
        }
    }
    if let Some(li) = lambda_idx {
        trips.push((li, li, 0.0));
    }
    SparseSystem::from_triplets(dim, &trips, rhs)
}

/// One uncondensed Newton step: `(ΔU per cell, ΔΛ)`.
pub fn monolithic_step(
    disc: &Discretization,
    state: &SolutionState,
    tau_uhat: &[Vec2],
) -> Result<(Vec<[f64; N_CELL]>, Vec<f64>)> {
    let system = monolithic_system(disc, state, tau_uhat)?;
    let x = solve_linear(&system)?;
    let off = N_CELL * disc.mesh.n_cells();
    let cells = x[..off].chunks_exact(N_CELL).map(|c| std::array::from_fn(|i| c[i])).collect();
    Ok((cells, x[off..].to_vec()))
}
