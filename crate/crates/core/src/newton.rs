//! Newton-Raphson driver on the condensed face system.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::cases::CaseDefinition;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::ns::{add_scaled, assemble_newton, cell_increments, residual, Discretization};
use crate::sparse::{norm2, LinearSolver};
use crate::stabilization::{JacobianMode, SolverConfig};
use crate::state::SolutionState;
use crate::stokes::solve_stokes;

/// Most step halvings tried after a non-finite residual.
const MAX_HALVINGS: usize = 10;

/// Convergence history of one Newton run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NewtonReport {
    /// Number of linear solves performed.
    pub iterations: usize,
    /// Full residual norm, one entry per evaluation (initial state first).
    pub residuals: Vec<f64>,
    /// `‖K ΔΛ − F‖₂` of each linear solve.
    pub linear_residuals: Vec<f64>,
    pub converged: bool,
    pub wall_time: Duration,
}

/// Residuals below this fraction of the initial one are round-off and do
/// not enter [`NewtonReport::tail_order`].
pub const ROUND_OFF_FLOOR: f64 = 1e-12;

impl NewtonReport {
    /// Exponent `q` in `r_{k+1} ≈ C r_k^q` estimated from the last three
    /// residuals at or above [`ROUND_OFF_FLOOR`] times the initial one.
    pub fn tail_order(&self) -> Option<f64> {
        let floor = ROUND_OFF_FLOOR * self.residuals.first()?;
        let r: Vec<f64> = self.residuals.iter().copied().filter(|&v| v >= floor).collect();
        if r.len() < 3 {
            return None;
        }
        let (a, b, c) = (r[r.len() - 3], r[r.len() - 2], r[r.len() - 1]);
        let q = (c / b).ln() / (b / a).ln();
        q.is_finite().then_some(q)
    }

    /// Writes the history as `iter,residual_norm` lines.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        let mut body = String::from("iter,residual_norm\n");
        for (i, r) in self.residuals.iter().enumerate() {
            body.push_str(&format!("{i},{r:e}\n"));
        }
        w.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// A failed Newton run: the cause, the last state with a finite residual
/// and the history so far.
#[derive(Debug, thiserror::Error)]
#[error("{error}")]
pub struct NewtonFailure {
    #[source]
    pub error: Error,
    pub state: Box<SolutionState>,
    pub report: Box<NewtonReport>,
}

impl From<NewtonFailure> for Error {
    fn from(f: NewtonFailure) -> Self {
        f.error
    }
}

/// How the first Newton iterate is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialGuess {
    /// All unknowns zero (Dirichlet data enters through the residuals).
    Zero,
    /// The Stokes solution with the same boundary data.
    StokesSolve,
    /// [`PICARD_SWEEPS`] Oseen steps from the zero state.
    Picard,
}

/// Oseen steps taken by [`InitialGuess::Picard`].
pub const PICARD_SWEEPS: usize = 5;

impl InitialGuess {
    /// Picard start from `Re ≥ 100`, zero otherwise.
    pub fn default_for(case: &CaseDefinition) -> Self {
        if case.convection && 1.0 / case.nu >= 100.0 {
            InitialGuess::Picard
        } else {
            InitialGuess::Zero
        }
    }
}

impl fmt::Display for InitialGuess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InitialGuess::Zero => "zero",
            InitialGuess::StokesSolve => "stokes",
            InitialGuess::Picard => "picard",
        })
    }
}

impl FromStr for InitialGuess {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "zero" => Ok(InitialGuess::Zero),
            "stokes" | "stokes_solve" | "stokessolve" => Ok(InitialGuess::StokesSolve),
            "picard" => Ok(InitialGuess::Picard),
            other => Err(Error::Config(format!("unknown initial guess '{other}'"))),
        }
    }
}

pub fn initial_guess(
    mesh: &Mesh,
    cfg: &SolverConfig,
    case: &CaseDefinition,
    strategy: InitialGuess,
) -> Result<SolutionState> {
    match strategy {
        InitialGuess::Zero => Ok(SolutionState::zeros(mesh, cfg.pressure_constraint.is_active())),
        InitialGuess::StokesSolve => solve_stokes(mesh, cfg, &case.clone().with_convection(false)),
        InitialGuess::Picard => {
            let zero = SolutionState::zeros(mesh, cfg.pressure_constraint.is_active());
            if !case.convection {
                return Ok(zero);
            }
            let picard = SolverConfig { jacobian: JacobianMode::Picard, newton_max_iter: PICARD_SWEEPS, ..cfg.clone() };
            Ok(newton_solve(mesh, &picard, case, &zero)?.0)
        }
    }
}

/// Runs Newton from `initial` until the full residual norm drops to
/// `cfg.newton_tol` or `cfg.newton_max_iter` solves have been made. An
/// unconverged run is returned with `converged = false`.
pub fn newton_solve(
    mesh: &Mesh,
    cfg: &SolverConfig,
    case: &CaseDefinition,
    initial: &SolutionState,
) -> std::result::Result<(SolutionState, NewtonReport), NewtonFailure> {
    let start = Instant::now();
    let mut report = NewtonReport::default();
    let fail = |error: Error, state: &SolutionState, report: &NewtonReport| NewtonFailure {
        error,
        state: Box::new(state.clone()),
        report: Box::new(NewtonReport { wall_time: start.elapsed(), ..report.clone() }),
    };

    let disc = match Discretization::new(mesh, cfg, case) {
        Ok(d) => d,
        Err(e) => return Err(fail(e, initial, &report)),
    };
    if !initial.matches(mesh) {
        return Err(fail(Error::Config("initial state is not sized for the mesh".into()), initial, &report));
    }
    let mut state = initial.clone();
    disc.impose_dirichlet(&mut state);
    state.lambda = disc.dofs.has_lambda().then_some(initial.lambda.unwrap_or(0.0));

    let mut system = disc.pattern();
    let mut solver = LinearSolver::new();
    let mut norm = residual(&disc, &state, &state.u_hat, false).norm();
    if !norm.is_finite() {
        return Err(fail(Error::NonFiniteResidual { iteration: 0 }, &state, &report));
    }
    report.residuals.push(norm);

    while norm > cfg.newton_tol && report.iterations < cfg.newton_max_iter {
        let tau_uhat = state.u_hat.clone();
        assemble_newton(&disc, &state, &tau_uhat, &mut system);
        let dx = match solver.solve(&system) {
            Ok(x) => x,
            Err(e) => return Err(fail(e, &state, &report)),
        };
        let kx = system.matvec(&dx);
        let lin: Vec<f64> = kx.iter().zip(&system.rhs).map(|(a, b)| a - b).collect();
        report.linear_residuals.push(norm2(&lin));
        report.iterations += 1;

        let cell_dx = cell_increments(&disc, &state, &tau_uhat, &dx);
        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let mut trial = state.clone();
            add_scaled(&disc, &mut trial, &cell_dx, &dx, scale);
            let r = residual(&disc, &trial, &trial.u_hat, false).norm();
            if r.is_finite() && trial.is_finite() {
                accepted = Some((trial, r));
                break;
            }
            scale *= 0.5;
        }
        let Some((next, r)) = accepted else {
            return Err(fail(Error::NonFiniteResidual { iteration: report.iterations }, &state, &report));
        };
        state = next;
        norm = r;
        report.residuals.push(norm);
    }
    report.converged = norm <= cfg.newton_tol;
    report.wall_time = start.elapsed();
    Ok((state, report))
}

/// Newton from the case's default initial guess.
pub fn solve_case(
    mesh: &Mesh,
    cfg: &SolverConfig,
    case: &CaseDefinition,
    strategy: Option<InitialGuess>,
) -> std::result::Result<(SolutionState, NewtonReport), NewtonFailure> {
    let strategy = strategy.unwrap_or_else(|| InitialGuess::default_for(case));
    let initial = initial_guess(mesh, cfg, case, strategy).map_err(|error| NewtonFailure {
        error,
        state: Box::new(SolutionState::zeros(mesh, cfg.pressure_constraint.is_active())),
        report: Box::default(),
    })?;
    newton_solve(mesh, cfg, case, &initial)
}
