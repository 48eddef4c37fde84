//! Hybrid-pressure face-centred finite volume (FCFV) method for steady,
//! viscous, laminar incompressible flows in two dimensions.
//!
//! Cell unknowns are piecewise constant: the mixed variable `L = -ε^d`
//! (stored in Voigt form), the velocity `u` and the pressure `p`. Face
//! unknowns are the hybrid velocity `û` (on every non-Dirichlet face) and
//! the hybrid pressure `p̂` (on every face). Cell unknowns are eliminated
//! cell by cell, so the global Newton system only involves `(û, p̂)`.
//!
//! Module map:
//!
//! - [`mesh`]: quadrilateral/triangular meshes, face tables, boundary tags
//! - [`voigt`]: Voigt kernels (`N_V`, `D_V`, tractions)
//! - [`stabilization`]: solver configuration and the `τ^d`, `τ^a`, `τ^p` coefficients
//! - [`stokes`]: the linear hybrid-pressure Stokes system and its spectrum
//! - [`ns`]: Navier-Stokes residuals, cell Jacobians and static condensation
//! - [`newton`]: the Newton-Raphson driver
//! - [`sparse`], [`multifrontal`]: global systems and their direct solvers
//! - [`cases`]: synthetic Stokes, Couette and lid-driven cavity benchmarks
//! - [`postprocess`]: error norms, mass-flux audits, profiles, CSV/VTK output

// Dense local kernels index several arrays with one counter, and bound
// checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cases;
pub mod dofs;
pub mod error;
pub mod geom;
pub mod locate;
pub mod mesh;
pub mod mesh_io;
pub mod monolithic;
pub mod multifrontal;
pub mod newton;
pub mod ns;
pub mod postprocess;
pub mod sparse;
pub mod stabilization;
pub mod state;
pub mod stokes;
pub mod voigt;

pub use cases::CaseDefinition;
pub use error::{Error, Result};
pub use geom::Vec2;
pub use mesh::{BoundaryKind, CellType, Mesh};
pub use newton::{newton_solve, NewtonReport};
pub use stabilization::{PressureConstraint, RiemannSolver, SolverConfig};
pub use state::SolutionState;
