//! The linear hybrid-pressure Stokes system, assembled directly from its
//! closed-form condensed blocks, plus cell recovery and spectra.
//!
//! This path shares no assembly code with [`crate::ns`]; the Newton
//! condensation of a Stokes case at the zero state must reproduce it.

use crate::cases::CaseDefinition;
use crate::dofs::DofMap;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mesh::Mesh;
use crate::ns::{Discretization, FaceClass, MAX_SLOTS};
use crate::sparse::{pattern_from_groups, solve_linear, spectrum, SparseSystem, Spectrum};
use crate::stabilization::{tau_diffusive, SolverConfig};
use crate::state::SolutionState;
use crate::voigt::{dn_matrix, VoigtTensor};

/// Geometric and data-only quantities of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellCondensationData {
    /// `Σ_j |Γ_j| τᵈ` (the 2×2 accumulator is this scalar times `I`).
    pub a_u: f64,
    pub a_p: f64,
    pub f_l: VoigtTensor,
    pub f_u: Vec2,
    pub f_p: f64,
}

pub fn condensation_data(disc: &Discretization, e: usize) -> CellCondensationData {
    let tau_d = tau_diffusive(disc.cfg);
    let mut d = CellCondensationData {
        a_u: 0.0,
        a_p: 0.0,
        f_l: VoigtTensor::ZERO,
        f_u: disc.s[e] * disc.mesh.area(e),
        f_p: 0.0,
    };
    for cf in disc.mesh.cell_faces(e) {
        let m = cf.measure;
        d.a_u += m * tau_d;
        d.a_p += m * disc.tau_p[cf.face];
        if disc.class(cf.face) == FaceClass::Dirichlet {
            let ud = disc.u_d[cf.face];
            let dn = dn_matrix(cf.normal);
            d.f_l += VoigtTensor(std::array::from_fn(|r| m * (dn[r][0] * ud.x + dn[r][1] * ud.y)));
            d.f_u += ud * (m * tau_d);
            d.f_p += m * cf.normal.dot(ud);
        }
    }
    d
}

/// `N_iᵀ D_V N_j` (2×2).
fn nt_d_n(ni: Vec2, nj: Vec2) -> [[f64; 2]; 2] {
    let dn = dn_matrix(nj);
    let nt = [[ni.x, 0.0, ni.y], [0.0, ni.y, ni.x]];
    std::array::from_fn(|a| std::array::from_fn(|b| (0..3).map(|k| nt[a][k] * dn[k][b]).sum()))
}

/// Dense local contribution `(K_e, f_e)` of cell `e` over its face slots.
pub fn stokes_cell_matrix(disc: &Discretization, e: usize) -> ([[f64; MAX_SLOTS]; MAX_SLOTS], [f64; MAX_SLOTS]) {
    let mesh = disc.mesh;
    let nu = disc.cfg.nu;
    let tau_d = tau_diffusive(disc.cfg);
    let area = mesh.area(e);
    let d = condensation_data(disc, e);
    let faces: Vec<_> = mesh.cell_faces(e).collect();
    let mut k = [[0.0; MAX_SLOTS]; MAX_SLOTS];
    let mut f = [0.0; MAX_SLOTS];

    for (i, fi) in faces.iter().enumerate() {
        let ci = disc.class(fi.face);
        let (mi, ni) = (fi.measure, fi.normal);
        let tpi = disc.tau_p[fi.face];
        let ri = 3 * i;

        if ci != FaceClass::Dirichlet {
            // Velocity rows in their interior/Neumann form.
            let mut kuu = vec![[[0.0; 2]; 2]; faces.len()];
            let mut kup = vec![Vec2::ZERO; faces.len()];
            for (j, fj) in faces.iter().enumerate() {
                let (mj, nj) = (fj.measure, fj.normal);
                if disc.class(fj.face) != FaceClass::Dirichlet {
                    let ndn = nt_d_n(ni, nj);
                    for a in 0..2 {
                        for b in 0..2 {
                            let stab = if a == b { tau_d * tau_d / d.a_u } else { 0.0 };
                            kuu[j][a][b] = mi * mj * (-nu / area * ndn[a][b] + stab);
                            if i == j && a == b {
                                kuu[j][a][b] -= mi * tau_d;
                            }
                        }
                    }
                }
                kup[j] = nj * (-mi * mj * tau_d / d.a_u);
                if i == j && ci == FaceClass::Neumann {
                    kup[j] += ni * mi;
                }
            }
            let nt_fl = Vec2::new(ni.x * d.f_l.0[0] + ni.y * d.f_l.0[2], ni.y * d.f_l.0[1] + ni.x * d.f_l.0[2]);
            let mut fu = (nt_fl * (nu / area) - d.f_u * (tau_d / d.a_u)) * mi;
            if ci == FaceClass::Neumann {
                fu -= disc.g[fi.face] * mi;
            }

            if ci == FaceClass::Symmetry {
                // Tangential projection of the velocity row, and n·û = 0.
                let t = fi.tangent;
                for j in 0..faces.len() {
                    for b in 0..2 {
                        k[ri][3 * j + b] = t.x * kuu[j][0][b] + t.y * kuu[j][1][b];
                    }
                    k[ri][3 * j + 2] = t.dot(kup[j]);
                }
                f[ri] = t.dot(fu);
                k[ri + 1][ri] = mi * ni.x;
                k[ri + 1][ri + 1] = mi * ni.y;
            } else {
                for j in 0..faces.len() {
                    for a in 0..2 {
                        for b in 0..2 {
                            k[ri + a][3 * j + b] = kuu[j][a][b];
                        }
                    }
                    k[ri][3 * j + 2] = kup[j].x;
                    k[ri + 1][3 * j + 2] = kup[j].y;
                }
                f[ri] = fu.x;
                f[ri + 1] = fu.y;
            }
        }

        // Pressure row.
        for (j, fj) in faces.iter().enumerate() {
            let (mj, nj) = (fj.measure, fj.normal);
            if disc.class(fj.face) != FaceClass::Dirichlet {
                let c = -mi * mj * tpi / d.a_p;
                k[ri + 2][3 * j] = c * nj.x;
                k[ri + 2][3 * j + 1] = c * nj.y;
            }
            k[ri + 2][3 * j + 2] = mi * mj * tpi * disc.tau_p[fj.face] / d.a_p;
            if i == j {
                k[ri + 2][3 * j + 2] -= mi * tpi;
            }
        }
        f[ri + 2] = mi * tpi / d.a_p * d.f_p;
    }
    (k, f)
}

/// Assembles the Stokes system over `[û; p̂]` for the discretization's
/// data, without the pressure multiplier.
pub fn assemble_stokes_unconstrained(disc: &Discretization) -> SparseSystem {
    let dofs = DofMap::new(disc.mesh, false);
    let slots = |e: usize| {
        let ids = disc.mesh.cell_face_ids(e);
        let mut out = [None; MAX_SLOTS];
        for (j, &f) in ids.iter().enumerate() {
            for comp in 0..3 {
                out[3 * j + comp] = dofs.slot(f, comp);
            }
        }
        (out, 3 * ids.len())
    };
    let groups: Vec<Vec<usize>> = (0..disc.mesh.n_cells())
        .map(|e| {
            let (s, n) = slots(e);
            s[..n].iter().flatten().copied().collect()
        })
        .collect();
    let pat = pattern_from_groups(dofs.dim(), groups.iter().map(|g| g.as_slice()), None);
    let mut sys = SparseSystem::from_pattern(pat, None);
    for e in 0..disc.mesh.n_cells() {
        let (k, f) = stokes_cell_matrix(disc, e);
        let (s, n) = slots(e);
        for a in 0..n {
            let Some(ga) = s[a] else { continue };
            sys.rhs[ga] += f[a];
            for b in 0..n {
                if let Some(gb) = s[b] {
                    sys.add(ga, gb, k[a][b]);
                }
            }
        }
    }
    sys
}

/// Borders `system` with the zero-mean pressure row `c` and column `cᵀ`
/// (zero diagonal).
pub fn append_zero_mean_constraint(system: &SparseSystem, disc: &Discretization) -> Result<SparseSystem> {
    if system.lambda.is_some() {
        return Err(Error::ConstraintAlreadyApplied);
    }
    let base = DofMap::new(disc.mesh, false);
    if system.dim() != base.dim() {
        return Err(Error::Config(format!(
            "system dimension {} does not match the mesh ({})",
            system.dim(),
            base.dim()
        )));
    }
    let n = system.dim();
    let mut c = vec![0.0; n];
    let mut f_lambda = 0.0;
    for e in 0..disc.mesh.n_cells() {
        let d = condensation_data(disc, e);
        let w = disc.mesh.area(e) / d.a_p;
        for cf in disc.mesh.cell_faces(e) {
            if let Some(i) = base.uhat(cf.face) {
                c[i] -= w * cf.measure * cf.normal.x;
                c[i + 1] -= w * cf.measure * cf.normal.y;
            }
            c[base.phat(cf.face)] += w * cf.measure * disc.tau_p[cf.face];
        }
        f_lambda += w * d.f_p;
    }
    let mut triplets = system.triplets();
    for (i, &v) in c.iter().enumerate() {
        triplets.push((n, i, v));
        triplets.push((i, n, v));
    }
    triplets.push((n, n, 0.0));
    let mut rhs = system.rhs.clone();
    rhs.push(f_lambda);
    let mut out = SparseSystem::from_triplets(n + 1, &triplets, rhs)?;
    out.lambda = Some(n);
    out.pin = Some(disc.dofs.phat(0));
    Ok(out)
}

/// Full Stokes system: bordered with the multiplier when the configuration
/// asks for it; refuses an undetermined pressure without it.
pub fn assemble_stokes(mesh: &Mesh, cfg: &SolverConfig, case: &CaseDefinition) -> Result<SparseSystem> {
    let disc = Discretization::new(mesh, cfg, case)?;
    let base = assemble_stokes_unconstrained(&disc);
    if disc.dofs.has_lambda() {
        append_zero_mean_constraint(&base, &disc)
    } else {
        Ok(base)
    }
}

/// Recovers `(L_V, u, p)` per cell from the face solution (packed in the
/// unconstrained global order; a trailing multiplier is ignored).
pub fn recover_stokes_cells(disc: &Discretization, faces: &[f64]) -> (Vec<VoigtTensor>, Vec<Vec2>, Vec<f64>) {
    let dofs = DofMap::new(disc.mesh, false);
    let tau_d = tau_diffusive(disc.cfg);
    let n = disc.mesh.n_cells();
    let (mut ls, mut us, mut ps) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for e in 0..n {
        let d = condensation_data(disc, e);
        let area = disc.mesh.area(e);
        let mut l_rhs = d.f_l;
        let mut u_rhs = d.f_u;
        let mut p_rhs = -d.f_p;
        for cf in disc.mesh.cell_faces(e) {
            let m = cf.measure;
            let p_hat = faces[dofs.phat(cf.face)];
            if let Some(i) = dofs.uhat(cf.face) {
                let uh = Vec2::new(faces[i], faces[i + 1]);
                let dn = dn_matrix(cf.normal);
                l_rhs += VoigtTensor(std::array::from_fn(|r| m * (dn[r][0] * uh.x + dn[r][1] * uh.y)));
                u_rhs += uh * (m * tau_d);
                p_rhs -= m * cf.normal.dot(uh);
            }
            u_rhs -= cf.normal * (m * p_hat);
            p_rhs += m * disc.tau_p[cf.face] * p_hat;
        }
        ls.push(l_rhs * (-1.0 / area));
        us.push(u_rhs * (1.0 / d.a_u));
        ps.push(p_rhs / d.a_p);
    }
    (ls, us, ps)
}

/// Assembles, solves and recovers the full Stokes state.
pub fn solve_stokes(mesh: &Mesh, cfg: &SolverConfig, case: &CaseDefinition) -> Result<SolutionState> {
    let disc = Discretization::new(mesh, cfg, case)?;
    let base = assemble_stokes_unconstrained(&disc);
    let system = if disc.dofs.has_lambda() { append_zero_mean_constraint(&base, &disc)? } else { base };
    let x = solve_linear(&system)?;
    let (l, u, p) = recover_stokes_cells(&disc, &x);
    let mut state = disc.zero_state();
    state.l = l;
    state.u = u;
    state.p = p;
    state.set_face_vector(&disc.dofs, &x);
    Ok(state)
}

/// Spectrum of the raw (unbordered, unreordered) Stokes matrix.
pub fn stokes_spectrum(mesh: &Mesh, cfg: &SolverConfig, case: &CaseDefinition, cap: usize) -> Result<Spectrum> {
    let disc = Discretization::without_constraint(mesh, cfg, case)?;
    let dim = disc.dofs.dim();
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    spectrum(&assemble_stokes_unconstrained(&disc), cap)
}
