//! Oracle checks shared by the property tests and the acceptance gate.

use std::sync::Arc;

use hpfcfv::cases::CaseDefinition;
use hpfcfv::mesh::{BoundaryKind, BoundaryRule, GEOM_TOL};
use hpfcfv::monolithic::{monolithic_step, monolithic_system};
use hpfcfv::ns::{self, Discretization, N_CELL};
use hpfcfv::sparse::LinearSolver;
use hpfcfv::stabilization::JacobianMode;
use hpfcfv::voigt::VoigtTensor;
use hpfcfv::{Mesh, RiemannSolver, SolutionState, SolverConfig, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{max_abs, perturb, residual_vector, Problem};

/// The problem's configuration under both Riemann solvers and both
/// treatments of the convective stabilization in the Jacobian.
pub fn configs(p: &Problem) -> Vec<SolverConfig> {
    let base = p.config();
    let mut out = Vec::new();
    for riemann in [RiemannSolver::Lf, RiemannSolver::Hll] {
        for jacobian in [JacobianMode::Exact, JacobianMode::Lagged] {
            out.push(SolverConfig { riemann, jacobian, ..base.clone() });
        }
    }
    out
}

/// Every column of the full Jacobian against central differences of the
/// residual.
pub fn check_jacobian(disc: &Discretization, state: &SolutionState) -> Result<(), String> {
    let frozen = disc.cfg.jacobian != JacobianMode::Exact;
    let jac = monolithic_system(disc, state, &state.u_hat).map_err(|e| e.to_string())?;
    let r0 = residual_vector(disc, state, &state.u_hat);
    for (a, b) in jac.rhs.iter().zip(&r0) {
        if (a + b).abs() > 1e-12 * (1.0 + b.abs()) {
            return Err(format!("right-hand side {a} is not minus the residual {b}"));
        }
    }
    let n = jac.dim();
    let h = 1e-6;
    for i in 0..n {
        let mut plus = state.clone();
        perturb(disc, &mut plus, i, h);
        let mut minus = state.clone();
        perturb(disc, &mut minus, i, -h);
        let (tp, tm) =
            if frozen { (state.u_hat.clone(), state.u_hat.clone()) } else { (plus.u_hat.clone(), minus.u_hat.clone()) };
        let rp = residual_vector(disc, &plus, &tp);
        let rm = residual_vector(disc, &minus, &tm);
        let fd: Vec<f64> = rp.iter().zip(&rm).map(|(p, m)| (p - m) / (2.0 * h)).collect();
        let col: Vec<f64> = (0..n).map(|r| jac.get(r, i)).collect();
        let scale = max_abs(&col).max(1.0);
        for r in 0..n {
            if (col[r] - fd[r]).abs() > 1e-6 * scale {
                return Err(format!("column {i} row {r}: analytic {} vs difference {}", col[r], fd[r]));
            }
        }
    }
    Ok(())
}

/// Condensed Newton step (global solve plus cell recovery) against the
/// monolithic step, within `1e-10` relative to the largest face increment.
pub fn check_condensed_step(disc: &Discretization, state: &SolutionState) -> Result<(), String> {
    let (cells_m, faces_m) = monolithic_step(disc, state, &state.u_hat).map_err(|e| e.to_string())?;
    let mut system = disc.pattern();
    ns::assemble_newton(disc, state, &state.u_hat, &mut system);
    let faces_c = LinearSolver::new().solve(&system).map_err(|e| e.to_string())?;
    let cells_c = ns::cell_increments(disc, state, &state.u_hat, &faces_c);
    let scale = max_abs(&faces_m).max(1.0);
    for (a, b) in faces_c.iter().zip(&faces_m) {
        if (a - b).abs() > 1e-10 * scale {
            return Err(format!("face increment {a} vs {b}"));
        }
    }
    for (ca, cb) in cells_c.iter().zip(&cells_m) {
        for k in 0..N_CELL {
            if (ca[k] - cb[k]).abs() > 1e-10 * scale {
                return Err(format!("cell increment {} vs {}", ca[k], cb[k]));
            }
        }
    }
    Ok(())
}

/// Adding the interior physical fluxes to the face rows changes nothing
/// beyond `1e-12` relative: they cancel between neighbours.
pub fn check_flux_cancellation(disc: &Discretization, state: &SolutionState) -> Result<(), String> {
    let without = ns::residual(disc, state, &state.u_hat, false);
    let with = ns::residual(disc, state, &state.u_hat, true);
    for (a, b) in without.faces.iter().zip(&with.faces) {
        if (a - b).abs() > 1e-12 * (1.0 + a.abs()) {
            return Err(format!("face row {a} vs {b}"));
        }
    }
    if without.cells != with.cells {
        return Err("cell rows changed".into());
    }
    Ok(())
}

/// Uniform flow `c` with pressure `p0`: Dirichlet everywhere except a
/// Neumann bottom carrying the traction `-p0 n`.
pub fn constant_case(c: Vec2, p0: f64, convection: bool) -> CaseDefinition {
    CaseDefinition {
        name: "constant".into(),
        nu: 0.01,
        convection,
        rules: vec![
            BoundaryRule::new(BoundaryKind::Neumann, |x| x.y.abs() < GEOM_TOL),
            BoundaryRule::new(BoundaryKind::Dirichlet, |x| x.y.abs() >= GEOM_TOL),
        ],
        dirichlet: Arc::new(move |_| c),
        neumann: Arc::new(move |_, n| n * (-p0)),
        source: Arc::new(|_| Vec2::ZERO),
        exact: None,
    }
}

pub fn constant_state(mesh: &Mesh, c: Vec2, p0: f64) -> SolutionState {
    let mut s = SolutionState::zeros(mesh, false);
    s.u.fill(c);
    s.u_hat.fill(c);
    s.p.fill(p0);
    s.p_hat.fill(p0);
    s.l.fill(VoigtTensor::ZERO);
    s
}

/// Fourth-order central difference of `f` along `dir`.
fn d4<T>(f: &(impl Fn(Vec2) -> T + ?Sized), x: Vec2, dir: Vec2, h: f64, get: impl Fn(T) -> f64) -> f64 {
    let at = |k: f64| get(f(x + dir * (k * h)));
    (-at(2.0) + 8.0 * at(1.0) - 8.0 * at(-1.0) + at(-2.0)) / (12.0 * h)
}

/// Checks `L = -(∇u + ∇uᵀ - (2/3)(∇·u) I)`, `∇·u = 0` and the momentum
/// balance `∇p + ν ∇·L + (convection) ∇·(u⊗u) = s` at random points of
/// `sample`.
pub fn audit_exact(case: &CaseDefinition, sample: impl Fn(&mut ChaCha8Rng) -> Vec2) -> (f64, f64, f64) {
    let ex = case.exact.as_ref().expect("exact fields");
    let (u, p, l) = (ex.u.clone(), ex.p.clone(), ex.l.clone());
    let nu = case.nu;
    let conv = if case.convection { 1.0 } else { 0.0 };
    let h = 1e-3;
    let (e1, e2) = (Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0));
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_l, mut worst_div, mut worst_mom) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let x = sample(&mut rng);
        let du1dx = d4(&*u, x, e1, h, |v| v.x);
        let du1dy = d4(&*u, x, e2, h, |v| v.x);
        let du2dx = d4(&*u, x, e1, h, |v| v.y);
        let du2dy = d4(&*u, x, e2, h, |v| v.y);
        let div = du1dx + du2dy;
        let lx = l(x);
        let expect = [-(2.0 * du1dx - 2.0 / 3.0 * div), -(2.0 * du2dy - 2.0 / 3.0 * div), -(du1dy + du2dx)];
        for (got, want) in lx.0.iter().zip(expect) {
            worst_l = worst_l.max((got - want).abs());
        }
        worst_div = worst_div.max(div.abs());

        let dpdx = d4(&*p, x, e1, h, |v| v);
        let dpdy = d4(&*p, x, e2, h, |v| v);
        let div_l1 = d4(&*l, x, e1, h, |t| t.0[0]) + d4(&*l, x, e2, h, |t| t.0[2]);
        let div_l2 = d4(&*l, x, e1, h, |t| t.0[2]) + d4(&*l, x, e2, h, |t| t.0[1]);
        let uu = |y: Vec2| {
            let v = u(y);
            [v.x * v.x, v.x * v.y, v.y * v.y]
        };
        let conv1 = d4(&uu, x, e1, h, |t| t[0]) + d4(&uu, x, e2, h, |t| t[1]);
        let conv2 = d4(&uu, x, e1, h, |t| t[1]) + d4(&uu, x, e2, h, |t| t[2]);
        let s = (case.source)(x);
        let m1 = dpdx + nu * div_l1 + conv * conv1 - s.x;
        let m2 = dpdy + nu * div_l2 + conv * conv2 - s.y;
        worst_mom = worst_mom.max(m1.abs()).max(m2.abs());
    }
    (worst_l, worst_div, worst_mom)
}

pub fn in_square(rng: &mut ChaCha8Rng) -> Vec2 {
    Vec2::new(rng.gen_range(0.01..0.99), rng.gen_range(0.01..0.99))
}

pub fn in_annulus(rng: &mut ChaCha8Rng) -> Vec2 {
    let r = rng.gen_range(1.01..1.99f64);
    let t = rng.gen_range(0.0..std::f64::consts::TAU);
    Vec2::new(r * t.cos(), r * t.sin())
}
