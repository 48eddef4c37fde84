//! Discrete residuals, cell Jacobians and static condensation for the
//! hybrid-pressure Navier-Stokes (or, with convection off, Stokes) scheme.
//!
//! Per cell the unknowns `U = [L_V (3), u (2), p]` are coupled to the face
//! unknowns of its faces. Local face slot `j` carries three entries:
//! `[û_x, û_y, p̂]`. On Dirichlet faces the two velocity entries are
//! inactive: rows and columns stay zero and are never scattered.
//!
//! The stabilization `τ = τᵈ + τᵃ(û)` is evaluated from a separate set of
//! face velocities (`tau_uhat`), which the Newton driver sets to the current
//! iterate. The Jacobian treats these as frozen unless
//! [`JacobianMode::Exact`] is selected.

use rayon::prelude::*;

use crate::cases::CaseDefinition;
use crate::dofs::DofMap;
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mesh::{BoundaryKind, Mesh};
use crate::sparse::{pattern_from_groups, SparseSystem};
use crate::stabilization::{
    tau_convective_gradient, tau_diffusive, tau_total, JacobianMode, PressureConstraint, SolverConfig,
};
use crate::state::SolutionState;
use crate::voigt::{dn_matrix, VoigtTensor};

/// Largest number of faces per cell.
pub const MAX_FACES: usize = 4;
/// Face slots per cell (three entries per face).
pub const MAX_SLOTS: usize = 3 * MAX_FACES;
/// Cell unknowns per cell.
pub const N_CELL: usize = 6;

/// Face classification as seen from a cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FaceClass {
    Interior,
    Dirichlet,
    Neumann,
    Symmetry,
}

/// Mesh, parameters and case data sampled at the quadrature points
/// (cell centroids, face barycentres).
pub struct Discretization<'a> {
    pub mesh: &'a Mesh,
    pub cfg: &'a SolverConfig,
    pub convection: bool,
    pub dofs: DofMap,
    /// Dirichlet datum per face (zero elsewhere).
    pub u_d: Vec<Vec2>,
    /// Neumann datum per face for the owner normal (zero elsewhere).
    pub g: Vec<Vec2>,
    /// Body force per cell.
    pub s: Vec<Vec2>,
    pub tau_p: Vec<f64>,
}

impl<'a> Discretization<'a> {
    pub fn new(mesh: &'a Mesh, cfg: &'a SolverConfig, case: &CaseDefinition) -> Result<Self> {
        cfg.validate()?;
        if !mesh.is_tagged() {
            return Err(Error::InvalidMesh("mesh boundary is not fully tagged".into()));
        }
        let needs = mesh.needs_pressure_constraint();
        let has_lambda = match (cfg.pressure_constraint, needs) {
            (PressureConstraint::None, true) => return Err(Error::MissingPressureConstraint),
            (PressureConstraint::ZeroMean, false) => {
                return Err(Error::Config(
                    "zero-mean pressure constraint on a problem whose Neumann boundary already fixes the pressure"
                        .into(),
                ))
            }
            (PressureConstraint::ZeroMean, true) => true,
            (PressureConstraint::None, false) => false,
        };
        Self::build(mesh, cfg, case, has_lambda)
    }

    /// Like [`Discretization::new`] but never bordered with the pressure
    /// multiplier, even when the pressure is undetermined (used for the
    /// raw matrix in spectrum studies).
    pub fn without_constraint(mesh: &'a Mesh, cfg: &'a SolverConfig, case: &CaseDefinition) -> Result<Self> {
        cfg.validate()?;
        if !mesh.is_tagged() {
            return Err(Error::InvalidMesh("mesh boundary is not fully tagged".into()));
        }
        Self::build(mesh, cfg, case, false)
    }

    fn build(mesh: &'a Mesh, cfg: &'a SolverConfig, case: &CaseDefinition, has_lambda: bool) -> Result<Self> {
        if let Some(t) = &cfg.tau_p_faces {
            if t.len() != mesh.n_faces() {
                return Err(Error::Config(format!(
                    "per-face tau_p has {} entries for {} faces",
                    t.len(),
                    mesh.n_faces()
                )));
            }
        }
        let mut u_d = vec![Vec2::ZERO; mesh.n_faces()];
        let mut g = vec![Vec2::ZERO; mesh.n_faces()];
        for (f, face) in mesh.faces().iter().enumerate() {
            match mesh.boundary_tag(f) {
                Some(BoundaryKind::Dirichlet) => u_d[f] = (case.dirichlet)(face.barycentre),
                Some(BoundaryKind::Neumann) => g[f] = (case.neumann)(face.barycentre, face.normal),
                _ => {}
            }
        }
        let s = (0..mesh.n_cells()).map(|e| (case.source)(mesh.centroid(e))).collect();
        let tau_p = (0..mesh.n_faces()).map(|f| cfg.tau_p_at(f)).collect();
        Ok(Discretization {
            mesh,
            cfg,
            convection: case.convection,
            dofs: DofMap::new(mesh, has_lambda),
            u_d,
            g,
            s,
            tau_p,
        })
    }

    pub fn class(&self, f: usize) -> FaceClass {
        match self.mesh.boundary_tag(f) {
            None => FaceClass::Interior,
            Some(BoundaryKind::Dirichlet) => FaceClass::Dirichlet,
            Some(BoundaryKind::Neumann) => FaceClass::Neumann,
            Some(BoundaryKind::Symmetry) => FaceClass::Symmetry,
        }
    }

    /// Zero state with the Dirichlet data copied into `u_hat`.
    pub fn zero_state(&self) -> SolutionState {
        let mut s = SolutionState::zeros(self.mesh, self.dofs.has_lambda());
        self.impose_dirichlet(&mut s);
        s
    }

    pub fn impose_dirichlet(&self, state: &mut SolutionState) {
        for f in 0..self.mesh.n_faces() {
            if self.mesh.is_dirichlet(f) {
                state.u_hat[f] = self.u_d[f];
            }
        }
    }

    /// Global indices of the local slots of cell `e` (`None` = inactive).
    pub fn cell_slots(&self, e: usize) -> ([Option<usize>; MAX_SLOTS], usize) {
        let mut out = [None; MAX_SLOTS];
        let ids = self.mesh.cell_face_ids(e);
        for (j, &f) in ids.iter().enumerate() {
            for comp in 0..3 {
                out[3 * j + comp] = self.dofs.slot(f, comp);
            }
        }
        (out, 3 * ids.len())
    }

    /// Sparsity pattern of the condensed face system.
    pub fn pattern(&self) -> SparseSystem {
        let groups: Vec<Vec<usize>> = (0..self.mesh.n_cells())
            .map(|e| {
                let (slots, n) = self.cell_slots(e);
                slots[..n].iter().flatten().copied().collect()
            })
            .collect();
        let lambda = self.dofs.lambda();
        let pat = pattern_from_groups(self.dofs.dim(), groups.iter().map(|g| g.as_slice()), lambda);
        let mut system = SparseSystem::from_pattern(pat, lambda);
        system.pin = lambda.map(|_| self.dofs.phat(0));
        system
    }
}

/// Options for one cell evaluation.
#[derive(Debug, Clone, Copy)]
pub struct EvalOptions {
    pub jacobian: bool,
    /// Adds the interior-face physical flux `p̂ n + (n·û) û` to the face
    /// momentum rows. The two cells of an interior face contribute equal
    /// and opposite amounts, so the assembled residual is unchanged.
    pub physical_flux: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions { jacobian: true, physical_flux: false }
    }
}

/// Residuals and derivatives of one cell.
#[derive(Debug, Clone)]
pub struct CellBlocks {
    pub n_slots: usize,
    /// `T_UU` is diagonal: `[|Ω|, |Ω|, |Ω|, Σ|Γ|τ, Σ|Γ|τ, Σ|Γ|τᵖ]`.
    pub t_uu: [f64; N_CELL],
    pub t_ul: [[f64; MAX_SLOTS]; N_CELL],
    pub t_lu: [[f64; N_CELL]; MAX_SLOTS],
    pub t_ll: [[f64; MAX_SLOTS]; MAX_SLOTS],
    /// `[R_L (3), R_u (2), R_p]`.
    pub r_u: [f64; N_CELL],
    /// Face residual contributions per slot.
    pub r_l: [f64; MAX_SLOTS],
    /// Which slots are unknowns.
    pub active: [bool; MAX_SLOTS],
}

impl CellBlocks {
    fn new(n_slots: usize) -> Self {
        CellBlocks {
            n_slots,
            t_uu: [0.0; N_CELL],
            t_ul: [[0.0; MAX_SLOTS]; N_CELL],
            t_lu: [[0.0; N_CELL]; MAX_SLOTS],
            t_ll: [[0.0; MAX_SLOTS]; MAX_SLOTS],
            r_u: [0.0; N_CELL],
            r_l: [0.0; MAX_SLOTS],
            active: [false; MAX_SLOTS],
        }
    }

    /// This cell's part of the condensed zero-mean constraint row,
    /// `c = −|Ω| a_p⁻¹ T_pΛ`, per slot.
    pub fn constraint_row(&self, area: f64) -> [f64; MAX_SLOTS] {
        let w = area / self.t_uu[5];
        let mut c = [0.0; MAX_SLOTS];
        for (k, ck) in c.iter_mut().enumerate().take(self.n_slots) {
            *ck = -w * self.t_ul[5][k];
        }
        c
    }
}

/// `N_Vᵀ L`, i.e. `L n`.
#[inline]
fn nt_l(n: Vec2, l: VoigtTensor) -> Vec2 {
    let [a, b, c] = l.0;
    Vec2::new(n.x * a + n.y * c, n.y * b + n.x * c)
}

/// `N_Vᵀ` as a 2×3 matrix.
#[inline]
fn nt(n: Vec2) -> [[f64; 3]; 2] {
    [[n.x, 0.0, n.y], [0.0, n.y, n.x]]
}

/// Residuals (and, if requested, Jacobian blocks) of cell `e`.
pub fn cell_blocks(
    disc: &Discretization,
    state: &SolutionState,
    tau_uhat: &[Vec2],
    e: usize,
    opts: EvalOptions,
) -> CellBlocks {
    let mesh = disc.mesh;
    let cfg = disc.cfg;
    let nu = cfg.nu;
    let conv = if disc.convection { 1.0 } else { 0.0 };
    let exact = disc.convection && cfg.jacobian == JacobianMode::Exact;
    let advecting = if cfg.jacobian == JacobianMode::Picard { 0.0 } else { conv };
    let tau_d = tau_diffusive(cfg);
    let area = mesh.area(e);
    let l = state.l[e];
    let u = state.u[e];
    let p = state.p[e];

    let n_faces = mesh.cell_face_ids(e).len();
    let mut b = CellBlocks::new(3 * n_faces);

    let mut a_u = 0.0;
    let mut a_p = 0.0;
    let mut r_l = [area * l.0[0], area * l.0[1], area * l.0[2]];
    let mut r_mom = disc.s[e] * (-area);
    let mut r_p = 0.0;

    for (j, cf) in mesh.cell_faces(e).enumerate() {
        let f = cf.face;
        let m = cf.measure;
        let n = cf.normal;
        let t = cf.tangent;
        let class = disc.class(f);
        let dirichlet = class == FaceClass::Dirichlet;
        let w = if dirichlet { disc.u_d[f] } else { state.u_hat[f] };
        let w_tau = if dirichlet { disc.u_d[f] } else { tau_uhat[f] };
        let tau = tau_total(cfg, w_tau, n, disc.convection);
        let dtau = if exact && !dirichlet { tau_convective_gradient(cfg, w_tau, n) } else { Vec2::ZERO };
        let tau_p = disc.tau_p[f];
        let p_hat = state.p_hat[f];
        let wn = n.dot(w);
        let s0 = 3 * j;

        a_u += m * tau;
        a_p += m * tau_p;

        // Local residuals.
        let dn = dn_matrix(n);
        for (r, row) in r_l.iter_mut().zip(&dn) {
            *r += m * (row[0] * w.x + row[1] * w.y);
        }
        r_mom -= w * (m * (tau - conv * wn));
        r_mom += n * (m * p_hat);
        r_p += m * wn - m * tau_p * p_hat;

        // Face residual contributions.
        let traction = nt_l(n, l) * nu;
        match class {
            FaceClass::Interior => {
                let mut r = (traction + (u - w) * tau) * m;
                if opts.physical_flux {
                    r += (n * p_hat + w * (conv * wn)) * m;
                }
                b.r_l[s0] = r.x;
                b.r_l[s0 + 1] = r.y;
            }
            FaceClass::Neumann => {
                let r = (n * p_hat + traction + (u - w) * tau_d + disc.g[f]) * m;
                b.r_l[s0] = r.x;
                b.r_l[s0 + 1] = r.y;
            }
            FaceClass::Symmetry => {
                b.r_l[s0] = m * t.dot(traction + (u - w) * tau_d);
                b.r_l[s0 + 1] = m * n.dot(w);
            }
            FaceClass::Dirichlet => {}
        }
        b.r_l[s0 + 2] = m * tau_p * (p - p_hat);
        b.active[s0] = !dirichlet;
        b.active[s0 + 1] = !dirichlet;
        b.active[s0 + 2] = true;

        // The mass row of T_UΛ is constant and also defines the pressure
        // constraint, so it is always filled.
        if !dirichlet {
            b.t_ul[5][s0] = m * n.x;
            b.t_ul[5][s0 + 1] = m * n.y;
        }
        b.t_ul[5][s0 + 2] = -m * tau_p;

        if !opts.jacobian {
            continue;
        }

        // T_UΛ columns of this face.
        let nt_m = nt(n);
        if !dirichlet {
            for k in 0..2 {
                for (row, dn_row) in dn.iter().enumerate() {
                    b.t_ul[row][s0 + k] = m * dn_row[k];
                }
            }
            let uw = u - w;
            let wa = [w.x, w.y];
            let na = [n.x, n.y];
            let ua = [uw.x, uw.y];
            let dt = [dtau.x, dtau.y];
            for a in 0..2 {
                for k in 0..2 {
                    let delta = if a == k { 1.0 } else { 0.0 };
                    b.t_ul[3 + a][s0 + k] =
                        -m * ((tau - conv * wn) * delta - advecting * wa[a] * na[k]) + m * ua[a] * dt[k];
                }
            }
        }
        b.t_ul[3][s0 + 2] = m * n.x;
        b.t_ul[4][s0 + 2] = m * n.y;

        // Face rows.
        match class {
            FaceClass::Interior | FaceClass::Neumann => {
                let tf = if class == FaceClass::Interior { tau } else { tau_d };
                for a in 0..2 {
                    for c in 0..3 {
                        b.t_lu[s0 + a][c] = m * nu * nt_m[a][c];
                    }
                    b.t_lu[s0 + a][3 + a] = m * tf;
                    b.t_ll[s0 + a][s0 + a] = -m * tf;
                }
                if class == FaceClass::Interior {
                    let uw = u - w;
                    let ua = [uw.x, uw.y];
                    let dt = [dtau.x, dtau.y];
                    for a in 0..2 {
                        for k in 0..2 {
                            b.t_ll[s0 + a][s0 + k] += m * ua[a] * dt[k];
                        }
                    }
                } else {
                    b.t_ll[s0][s0 + 2] = m * n.x;
                    b.t_ll[s0 + 1][s0 + 2] = m * n.y;
                }
            }
            FaceClass::Symmetry => {
                for c in 0..3 {
                    b.t_lu[s0][c] = m * nu * (t.x * nt_m[0][c] + t.y * nt_m[1][c]);
                }
                b.t_lu[s0][3] = m * tau_d * t.x;
                b.t_lu[s0][4] = m * tau_d * t.y;
                b.t_ll[s0][s0] = -m * tau_d * t.x;
                b.t_ll[s0][s0 + 1] = -m * tau_d * t.y;
                b.t_ll[s0 + 1][s0] = m * n.x;
                b.t_ll[s0 + 1][s0 + 1] = m * n.y;
            }
            FaceClass::Dirichlet => {}
        }
        b.t_lu[s0 + 2][5] = m * tau_p;
        b.t_ll[s0 + 2][s0 + 2] = -m * tau_p;
    }

    let r_u = r_mom + u * a_u;
    b.r_u = [r_l[0], r_l[1], r_l[2], r_u.x, r_u.y, a_p * p + r_p];
    b.t_uu = [area, area, area, a_u, a_u, a_p];
    b
}

/// Local residuals `(R_L, R_u, R_p)` of cell `e`.
pub fn local_residuals(
    disc: &Discretization,
    state: &SolutionState,
    tau_uhat: &[Vec2],
    e: usize,
) -> (VoigtTensor, Vec2, f64) {
    let b = cell_blocks(disc, state, tau_uhat, e, EvalOptions { jacobian: false, physical_flux: false });
    (VoigtTensor([b.r_u[0], b.r_u[1], b.r_u[2]]), Vec2::new(b.r_u[3], b.r_u[4]), b.r_u[5])
}

/// Schur complement of one cell: `K_e = T_ΛΛ − T_ΛU T_UU⁻¹ T_UΛ` and
/// `F_e = −R_Λ + T_ΛU T_UU⁻¹ R_U`.
pub fn condense(b: &CellBlocks) -> ([[f64; MAX_SLOTS]; MAX_SLOTS], [f64; MAX_SLOTS]) {
    let ns = b.n_slots;
    let mut k = [[0.0; MAX_SLOTS]; MAX_SLOTS];
    let mut f = [0.0; MAX_SLOTS];
    let inv: [f64; N_CELL] = std::array::from_fn(|i| 1.0 / b.t_uu[i]);
    for a in 0..ns {
        if !b.active[a] {
            continue;
        }
        let mut row_scaled = [0.0; N_CELL];
        for c in 0..N_CELL {
            row_scaled[c] = b.t_lu[a][c] * inv[c];
        }
        for bb in 0..ns {
            if !b.active[bb] {
                continue;
            }
            let mut s = b.t_ll[a][bb];
            for c in 0..N_CELL {
                s -= row_scaled[c] * b.t_ul[c][bb];
            }
            k[a][bb] = s;
        }
        let mut s = -b.r_l[a];
        for c in 0..N_CELL {
            s += row_scaled[c] * b.r_u[c];
        }
        f[a] = s;
    }
    (k, f)
}

/// `ΔU = T_UU⁻¹ (−R_U − T_UΛ ΔΛ)` from the local face increments.
pub fn recover_cell_increments(b: &CellBlocks, d_lambda: &[f64; MAX_SLOTS]) -> [f64; N_CELL] {
    std::array::from_fn(|c| {
        let mut s = -b.r_u[c];
        for k in 0..b.n_slots {
            if b.active[k] {
                s -= b.t_ul[c][k] * d_lambda[k];
            }
        }
        s / b.t_uu[c]
    })
}

/// Full discrete residual, split by family.
#[derive(Debug, Clone)]
pub struct Residual {
    /// `[R_L, R_u, R_p]` per cell.
    pub cells: Vec<[f64; N_CELL]>,
    /// Assembled face rows in global order, including the multiplier
    /// term `cᵀλ`; the last entry is `Σ|Ω_e| p_e` when constrained.
    pub faces: Vec<f64>,
}

impl Residual {
    /// Euclidean norm over all families.
    pub fn norm(&self) -> f64 {
        let c: f64 = self.cells.iter().flat_map(|r| r.iter()).map(|v| v * v).sum();
        let f: f64 = self.faces.iter().map(|v| v * v).sum();
        (c + f).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.cells.iter().flat_map(|r| r.iter()).all(|v| v.is_finite()) && self.faces.iter().all(|v| v.is_finite())
    }
}

const CHUNK: usize = 2048;

/// Evaluates all residual families at `state`, with `τ` from `tau_uhat`.
pub fn residual(disc: &Discretization, state: &SolutionState, tau_uhat: &[Vec2], physical_flux: bool) -> Residual {
    let n_cells = disc.mesh.n_cells();
    let opts = EvalOptions { jacobian: false, physical_flux };
    let mut faces = vec![0.0; disc.dofs.dim()];
    let mut cells = Vec::with_capacity(n_cells);
    let lambda = state.lambda.unwrap_or(0.0);
    let mut mean = 0.0;
    for start in (0..n_cells).step_by(CHUNK) {
        let end = (start + CHUNK).min(n_cells);
        let blocks: Vec<CellBlocks> =
            (start..end).into_par_iter().map(|e| cell_blocks(disc, state, tau_uhat, e, opts)).collect();
        for (off, b) in blocks.iter().enumerate() {
            let e = start + off;
            let (slots, ns) = disc.cell_slots(e);
            let c = b.constraint_row(disc.mesh.area(e));
            for k in 0..ns {
                if let Some(g) = slots[k] {
                    faces[g] += b.r_l[k];
                    if disc.dofs.has_lambda() {
                        faces[g] += c[k] * lambda;
                    }
                }
            }
            mean += disc.mesh.area(e) * state.p[e];
            cells.push(b.r_u);
        }
    }
    if let Some(k) = disc.dofs.lambda() {
        faces[k] = mean;
    }
    Residual { cells, faces }
}

/// Assembles the condensed Newton system `K ΔΛ = F` at `state` into
/// `system` (which must carry [`Discretization::pattern`]).
pub fn assemble_newton(disc: &Discretization, state: &SolutionState, tau_uhat: &[Vec2], system: &mut SparseSystem) {
    system.clear();
    let n_cells = disc.mesh.n_cells();
    let lambda_idx = disc.dofs.lambda();
    let lambda = state.lambda.unwrap_or(0.0);
    let mut f_lambda = 0.0;
    for start in (0..n_cells).step_by(CHUNK) {
        let end = (start + CHUNK).min(n_cells);
        let parts: Vec<_> = (start..end)
            .into_par_iter()
            .map(|e| {
                let b = cell_blocks(disc, state, tau_uhat, e, EvalOptions::default());
                let (k, f) = condense(&b);
                let c = b.constraint_row(disc.mesh.area(e));
                let fl = -disc.mesh.area(e) * state.p[e] + disc.mesh.area(e) / b.t_uu[5] * b.r_u[5];
                (k, f, c, fl)
            })
            .collect();
        for (off, (k, f, c, fl)) in parts.iter().enumerate() {
            let e = start + off;
            let (slots, ns) = disc.cell_slots(e);
            for a in 0..ns {
                let Some(ga) = slots[a] else { continue };
                system.rhs[ga] += f[a];
                for bb in 0..ns {
                    if let Some(gb) = slots[bb] {
                        system.add(ga, gb, k[a][bb]);
                    }
                }
                if let Some(li) = lambda_idx {
                    system.add(li, ga, c[a]);
                    system.add(ga, li, c[a]);
                    system.rhs[ga] -= c[a] * lambda;
                }
            }
            f_lambda += fl;
        }
    }
    if let Some(li) = lambda_idx {
        system.rhs[li] = f_lambda;
    }
}

/// Cell increments recovered from the face increment `dx`.
pub fn cell_increments(
    disc: &Discretization,
    state: &SolutionState,
    tau_uhat: &[Vec2],
    dx: &[f64],
) -> Vec<[f64; N_CELL]> {
    (0..disc.mesh.n_cells())
        .into_par_iter()
        .map(|e| {
            let b = cell_blocks(disc, state, tau_uhat, e, EvalOptions::default());
            let (slots, ns) = disc.cell_slots(e);
            let mut dl = [0.0; MAX_SLOTS];
            for k in 0..ns {
                if let Some(g) = slots[k] {
                    dl[k] = dx[g];
                }
            }
            recover_cell_increments(&b, &dl)
        })
        .collect()
}

/// Adds `scale` times the increments `(cell_dx, dx)` to `state`.
pub fn add_scaled(disc: &Discretization, state: &mut SolutionState, cell_dx: &[[f64; N_CELL]], dx: &[f64], scale: f64) {
    for (e, d) in cell_dx.iter().enumerate() {
        state.l[e] += VoigtTensor([d[0], d[1], d[2]]) * scale;
        state.u[e] += Vec2::new(d[3], d[4]) * scale;
        state.p[e] += d[5] * scale;
    }
    let scaled: Vec<f64> = dx.iter().map(|v| v * scale).collect();
    state.add_face_vector(&disc.dofs, &scaled);
}

/// Applies a face increment and recovers the cell increments.
pub fn apply_increment(disc: &Discretization, state: &mut SolutionState, tau_uhat: &[Vec2], dx: &[f64]) {
    let cell_dx = cell_increments(disc, state, tau_uhat, dx);
    add_scaled(disc, state, &cell_dx, dx, 1.0);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases;
    use crate::mesh::{generate_structured_quads, Rect};

    fn setup() -> (Mesh, CaseDefinition) {
        let case = cases::synthetic_stokes();
        let mesh = case.tag(&generate_structured_quads(2, 2, Rect::UNIT).unwrap()).unwrap();
        (mesh, case)
    }

    #[test]
    fn zero_state_zero_data_has_zero_residual() {
        let (mesh, mut case) = setup();
        case.dirichlet = std::sync::Arc::new(|_| Vec2::ZERO);
        case.neumann = std::sync::Arc::new(|_, _| Vec2::ZERO);
        case.source = std::sync::Arc::new(|_| Vec2::ZERO);
        let cfg = case.config(&mesh);
        let disc = Discretization::new(&mesh, &cfg, &case).unwrap();
        let s = disc.zero_state();
        let r = residual(&disc, &s, &s.u_hat, false);
        assert_eq!(r.norm(), 0.0);
        let b = cell_blocks(&disc, &s, &s.u_hat, 0, EvalOptions::default());
        let (_, f) = condense(&b);
        assert!(f.iter().all(|v| *v == 0.0));
        let d = recover_cell_increments(&b, &[0.0; MAX_SLOTS]);
        assert!(d.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn tuu_determinant() {
        let (mesh, case) = setup();
        let cfg = case.config(&mesh);
        let disc = Discretization::new(&mesh, &cfg, &case).unwrap();
        let s = disc.zero_state();
        let b = cell_blocks(&disc, &s, &s.u_hat, 3, EvalOptions::default());
        let area = mesh.area(3);
        let a_u: f64 = mesh.cell_faces(3).map(|cf| cf.measure * 10.0).sum();
        let a_p: f64 = mesh.cell_faces(3).map(|cf| cf.measure * 0.1).sum();
        let det: f64 = b.t_uu.iter().product();
        assert!((det - area.powi(3) * a_u * a_u * a_p).abs() < 1e-12 * det.abs());
        assert!(det != 0.0);
    }

    #[test]
    fn missing_constraint_refused() {
        let case = cases::cavity(100.0).unwrap();
        let mesh = case.tag(&generate_structured_quads(2, 2, Rect::UNIT).unwrap()).unwrap();
        let cfg = SolverConfig { nu: case.nu, ..SolverConfig::default() };
        assert!(matches!(Discretization::new(&mesh, &cfg, &case), Err(Error::MissingPressureConstraint)));
    }
}
