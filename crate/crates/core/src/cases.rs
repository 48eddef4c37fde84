//! Benchmark problems: boundary tagging, data and (where known) exact fields.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mesh::{self, BoundaryKind, BoundaryRule, CellType, Mesh, Rect, GEOM_TOL};
use crate::stabilization::{PressureConstraint, SolverConfig};
use crate::voigt::VoigtTensor;

pub type VectorField = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;
pub type ScalarField = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;
pub type TensorField = Arc<dyn Fn(Vec2) -> VoigtTensor + Send + Sync>;
/// Neumann datum as a function of position and outward unit normal.
pub type TractionField = Arc<dyn Fn(Vec2, Vec2) -> Vec2 + Send + Sync>;

/// Closed-form solution: velocity, pressure and the mixed variable
/// `L = -ε^d` (Voigt).
#[derive(Clone)]
pub struct ExactSolution {
    pub u: VectorField,
    pub p: ScalarField,
    pub l: TensorField,
}

#[derive(Clone)]
pub struct CaseDefinition {
    pub name: String,
    pub nu: f64,
    /// Navier-Stokes when true, Stokes otherwise.
    pub convection: bool,
    pub rules: Vec<BoundaryRule>,
    pub dirichlet: VectorField,
    pub neumann: TractionField,
    pub source: VectorField,
    pub exact: Option<ExactSolution>,
}

impl fmt::Debug for CaseDefinition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CaseDefinition")
            .field("name", &self.name)
            .field("nu", &self.nu)
            .field("convection", &self.convection)
            .field("rules", &self.rules)
            .field("exact", &self.exact.is_some())
            .finish()
    }
}

impl CaseDefinition {
    /// Tags the boundary of `mesh` with this case's rules.
    pub fn tag(&self, mesh: &Mesh) -> Result<Mesh> {
        mesh.tag_boundaries(&self.rules)
    }

    /// Default solver settings for the case: its viscosity, and a zero-mean
    /// pressure constraint when no Neumann boundary fixes the pressure.
    pub fn config(&self, mesh: &Mesh) -> SolverConfig {
        SolverConfig {
            nu: self.nu,
            pressure_constraint: if mesh.needs_pressure_constraint() {
                PressureConstraint::ZeroMean
            } else {
                PressureConstraint::None
            },
            ..SolverConfig::default()
        }
    }

    pub fn with_convection(mut self, convection: bool) -> Self {
        self.convection = convection;
        self
    }
}

/// Trigonometric Stokes flow on the unit square, `ν = 1`: Neumann on
/// `x2 = 0`, Dirichlet elsewhere.
pub fn synthetic_stokes() -> CaseDefinition {
    let nu = 1.0;
    let tp = 2.0 * PI;
    let u = move |x: Vec2| {
        let (sx, cx) = (tp * x.x).sin_cos();
        let (sy, cy) = (tp * x.y).sin_cos();
        Vec2::new((1.0 - cx) * sy, -sx * (1.0 - cy))
    };
    let p = |x: Vec2| (PI * x.x).cos() + (PI * x.y).cos();
    // L = -(∇u + ∇uᵀ); the velocity is solenoidal.
    let l = move |x: Vec2| {
        let (sx, cx) = (tp * x.x).sin_cos();
        let (sy, cy) = (tp * x.y).sin_cos();
        let e11 = 2.0 * tp * sx * sy;
        let e12 = tp * (1.0 - cx) * cy - tp * cx * (1.0 - cy);
        VoigtTensor([-e11, e11, -e12])
    };
    let source = move |x: Vec2| {
        let (sx, cx) = (tp * x.x).sin_cos();
        let (sy, cy) = (tp * x.y).sin_cos();
        let lap1 = tp * tp * (2.0 * cx - 1.0) * sy;
        let lap2 = tp * tp * sx * (1.0 - 2.0 * cy);
        let grad_p = Vec2::new(-PI * (PI * x.x).sin(), -PI * (PI * x.y).sin());
        grad_p - Vec2::new(lap1, lap2) * nu
    };
    let neumann = move |x: Vec2, n: Vec2| -> Vec2 {
        // σ n = -p n - ν L n
        n * (-p(x)) - l(x).apply(n) * nu
    };
    CaseDefinition {
        name: "stokes-synthetic".into(),
        nu,
        convection: false,
        rules: vec![
            BoundaryRule::new(BoundaryKind::Neumann, |x| x.y.abs() < GEOM_TOL),
            BoundaryRule::new(BoundaryKind::Dirichlet, |x| x.y.abs() >= GEOM_TOL),
        ],
        dirichlet: Arc::new(u),
        neumann: Arc::new(neumann),
        source: Arc::new(source),
        exact: Some(ExactSolution { u: Arc::new(u), p: Arc::new(p), l: Arc::new(l) }),
    }
}

/// Couette constants `(C1, C2)`.
pub fn couette_constants(r_i: f64, r_o: f64, omega_i: f64, omega_o: f64) -> (f64, f64) {
    let d = r_o * r_o - r_i * r_i;
    ((omega_o * r_o * r_o - omega_i * r_i * r_i) / d, (omega_i - omega_o) * r_i * r_i * r_o * r_o / d)
}

/// Flow between co-axial cylinders of radii `r_i < r_o` rotating with
/// angular velocities `omega_i`, `omega_o`; `ν = 1`, Dirichlet on both
/// circles, pressure equal to 1 on the outer circle. The exact fields solve
/// the steady Navier-Stokes equations without body force.
pub fn couette(r_i: f64, r_o: f64, omega_i: f64, omega_o: f64) -> Result<CaseDefinition> {
    if !(r_i > 0.0 && r_i < r_o) {
        return Err(Error::Config(format!("Couette radii must satisfy 0 < R_i < R_o, got {r_i}, {r_o}")));
    }
    let (c1, c2) = couette_constants(r_i, r_o, omega_i, omega_o);
    let p_raw = move |r: f64| c1 * c1 * r * r / 2.0 + 2.0 * c1 * c2 * r.ln() - c2 * c2 / (2.0 * r * r);
    let c = 1.0 - p_raw(r_o);
    let u = move |x: Vec2| {
        let r2 = x.dot(x);
        x.perp() * (c1 + c2 / r2)
    };
    let p = move |x: Vec2| p_raw(x.norm()) + c;
    let l = move |x: Vec2| {
        let r2 = x.dot(x);
        let r4 = r2 * r2;
        let e11 = 4.0 * c2 * x.x * x.y / r4;
        let e12 = 2.0 * c2 * (x.y * x.y - x.x * x.x) / r4;
        VoigtTensor([-e11, e11, -e12])
    };
    let nu = 1.0;
    let neumann = move |x: Vec2, n: Vec2| n * (-p(x)) - l(x).apply(n) * nu;
    Ok(CaseDefinition {
        name: "couette".into(),
        nu,
        convection: true,
        rules: vec![BoundaryRule::new(BoundaryKind::Dirichlet, |_| true)],
        dirichlet: Arc::new(u),
        neumann: Arc::new(neumann),
        source: Arc::new(|_| Vec2::ZERO),
        exact: Some(ExactSolution { u: Arc::new(u), p: Arc::new(p), l: Arc::new(l) }),
    })
}

/// The default Couette setup: `R_i = 1`, `R_o = 2`, `ω_i = 0`, `ω_o = 0.5`.
pub fn couette_default() -> CaseDefinition {
    couette(1.0, 2.0, 0.0, 0.5).expect("valid default radii")
}

/// Lid-driven cavity on the unit square: `u = (1, 0)` on `x2 = 1`, no-slip
/// elsewhere, `ν = 1/Re`.
pub fn cavity(re: f64) -> Result<CaseDefinition> {
    if !(re > 0.0 && re.is_finite()) {
        return Err(Error::Config(format!("Reynolds number must be positive, got {re}")));
    }
    let lid = |x: Vec2| {
        if x.y > 1.0 - GEOM_TOL {
            Vec2::new(1.0, 0.0)
        } else {
            Vec2::ZERO
        }
    };
    Ok(CaseDefinition {
        name: "cavity".into(),
        nu: 1.0 / re,
        convection: true,
        rules: vec![BoundaryRule::new(BoundaryKind::Dirichlet, |_| true)],
        dirichlet: Arc::new(lid),
        neumann: Arc::new(|_, _| Vec2::ZERO),
        source: Arc::new(|_| Vec2::ZERO),
        exact: None,
    })
}

/// Cells per side of the synthetic Stokes quad family at `level` (1-based).
pub fn square_cells_per_side(level: u32) -> usize {
    8 << level
}

/// `(n_theta, n_r)` of the Couette annulus family at `level` (1-based):
/// 32 × 8 at level 1, doubled in both directions per level.
pub fn annulus_divisions(level: u32) -> (usize, usize) {
    (16 << level, 4 << level)
}

pub fn couette_mesh(level: u32, cell_type: CellType) -> Result<Mesh> {
    if level == 0 {
        return Err(Error::Config("levels start at 1".into()));
    }
    let (nt, nr) = annulus_divisions(level);
    mesh::generate_annulus(nt, nr, 1.0, 2.0, cell_type)
}

/// Geometric grading ratio `r` with `h1 (r^n - 1)/(r - 1) = length`.
pub fn grading_ratio(h1: f64, n: usize, length: f64) -> Result<f64> {
    let sum = |r: f64| {
        if (r - 1.0).abs() < 1e-14 {
            h1 * n as f64
        } else {
            h1 * (r.powi(n as i32) - 1.0) / (r - 1.0)
        }
    };
    let (mut lo, mut hi) = (1.0, 1.5);
    if !(sum(lo) < length && sum(hi) > length) {
        return Err(Error::Config(format!(
            "infeasible grading: {n} layers starting at {h1} cannot fill {length} with a ratio in (1, 1.5)"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sum(mid) < length {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Node coordinates of the symmetric, wall-graded cavity grid.
pub fn graded_cavity_lines(level: u32) -> Result<(Vec<f64>, f64)> {
    if level == 0 {
        return Err(Error::Config("levels start at 1".into()));
    }
    let n = 24usize << level;
    let half = n / 2;
    let h1 = 1e-2 / level as f64;
    let r = grading_ratio(h1, half, 0.5)?;
    let mut xs = vec![0.0; n + 1];
    let mut h = h1;
    for k in 1..half {
        xs[k] = xs[k - 1] + h;
        h *= r;
    }
    xs[half] = 0.5;
    for k in 0..half {
        xs[n - k] = 1.0 - xs[k];
    }
    Ok((xs, r))
}

/// `(24·2^level)²·2` triangles, geometrically graded toward all walls with
/// first-layer height `1e-2/level`.
pub fn graded_cavity_mesh(level: u32) -> Result<Mesh> {
    cavity_mesh(level, CellType::Tri)
}

/// The graded cavity grid with either cell type.
pub fn cavity_mesh(level: u32, cell_type: CellType) -> Result<Mesh> {
    let (xs, _) = graded_cavity_lines(level)?;
    mesh::tensor_grid(&xs, &xs, cell_type)
}

/// Synthetic Stokes mesh at `level` with optional distortion.
pub fn square_mesh(level: u32, cell_type: CellType, distortion: f64, seed: u64) -> Result<Mesh> {
    if level == 0 {
        return Err(Error::Config("levels start at 1".into()));
    }
    let n = square_cells_per_side(level);
    let m = match cell_type {
        CellType::Quad => mesh::generate_structured_quads(n, n, Rect::UNIT)?,
        CellType::Tri => mesh::generate_structured_tris(n, n, Rect::UNIT)?,
    };
    mesh::distort(&m, distortion, seed)
}
