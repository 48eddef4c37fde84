#![allow(dead_code)]

pub mod oracle;

use hpfcfv::cases::{self, CaseDefinition};
use hpfcfv::mesh::{self, generate_annulus, generate_structured_quads, generate_structured_tris, CellType, Rect};
use hpfcfv::ns::{self, Discretization, N_CELL};
use hpfcfv::postprocess::level_config;
use hpfcfv::voigt::VoigtTensor;
use hpfcfv::{Mesh, SolutionState, SolverConfig, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small tagged problem: a case on a mesh of at most nine cells.
pub struct Problem {
    pub name: &'static str,
    pub case: CaseDefinition,
    pub mesh: Mesh,
}

impl Problem {
    pub fn config(&self) -> SolverConfig {
        level_config(&SolverConfig::default(), &self.case, &self.mesh)
    }
}

fn tagged(name: &'static str, case: CaseDefinition, raw: Mesh) -> Problem {
    let mesh = case.tag(&raw).unwrap();
    Problem { name, case, mesh }
}

/// Mixed-boundary Stokes and Navier-Stokes, an all-Dirichlet cavity (with
/// the pressure multiplier) and an annulus, on quads and triangles.
pub fn small_problems() -> Vec<Problem> {
    let unit = Rect::UNIT;
    let quads = generate_structured_quads(3, 3, unit).unwrap();
    let tris = mesh::distort(&generate_structured_tris(2, 2, unit).unwrap(), 0.3, 5).unwrap();
    let distorted_quads = mesh::distort(&quads, 0.3, 11).unwrap();
    vec![
        tagged("stokes quads", cases::synthetic_stokes(), quads.clone()),
        tagged("navier-stokes tris", cases::synthetic_stokes().with_convection(true), tris.clone()),
        tagged("cavity quads", cases::cavity(100.0).unwrap(), distorted_quads),
        tagged("cavity tris", cases::cavity(400.0).unwrap(), tris),
        tagged("couette annulus", cases::couette_default(), generate_annulus(4, 2, 1.0, 2.0, CellType::Quad).unwrap()),
    ]
}

/// A state with every unknown uniform in `[-amp, amp]` (Dirichlet `û` set
/// to the data).
pub fn random_state(disc: &Discretization, seed: u64, amp: f64) -> SolutionState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = || rng.gen_range(-amp..amp);
    let mut s = disc.zero_state();
    for e in 0..disc.mesh.n_cells() {
        s.l[e] = VoigtTensor([r(), r(), r()]);
        s.u[e] = Vec2::new(r(), r());
        s.p[e] = r();
    }
    for f in 0..disc.mesh.n_faces() {
        if !disc.mesh.is_dirichlet(f) {
            s.u_hat[f] = Vec2::new(r(), r());
        }
        s.p_hat[f] = r();
    }
    if s.lambda.is_some() {
        s.lambda = Some(r());
    }
    s
}

/// All residual families in the monolithic unknown order: six entries per
/// cell, then the face rows.
pub fn residual_vector(disc: &Discretization, state: &SolutionState, tau_uhat: &[Vec2]) -> Vec<f64> {
    let r = ns::residual(disc, state, tau_uhat, false);
    r.cells.iter().flat_map(|c| c.iter().copied()).chain(r.faces.iter().copied()).collect()
}

/// Adds `h` to unknown `i` of the monolithic ordering.
pub fn perturb(disc: &Discretization, state: &mut SolutionState, i: usize, h: f64) {
    let off = N_CELL * disc.mesh.n_cells();
    if i < off {
        let (e, r) = (i / N_CELL, i % N_CELL);
        match r {
            0..=2 => state.l[e].0[r] += h,
            3 => state.u[e].x += h,
            4 => state.u[e].y += h,
            _ => state.p[e] += h,
        }
    } else {
        let mut dx = vec![0.0; disc.dofs.dim()];
        dx[i - off] = h;
        state.add_face_vector(&disc.dofs, &dx);
    }
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}
