use hpfcfv::cases::{self, graded_cavity_mesh};
use hpfcfv::mesh::{generate_structured_quads, CellType, Rect};
use hpfcfv::newton::{initial_guess, newton_solve, solve_case, InitialGuess, NewtonReport};
use hpfcfv::ns::{self, Discretization};
use hpfcfv::postprocess::level_config;
use hpfcfv::stabilization::JacobianMode;
use hpfcfv::{RiemannSolver, SolverConfig};

fn assert_monotone_tail(report: &NewtonReport) {
    let r = &report.residuals;
    let tail = &r[r.len().saturating_sub(3)..];
    assert!(tail.windows(2).all(|w| w[1] < w[0]), "tail not decreasing: {r:?}");
}

#[test]
fn stokes_case_converges_in_one_iteration_from_zero() {
    let case = cases::synthetic_stokes();
    let mesh = case.tag(&generate_structured_quads(8, 8, Rect::UNIT).unwrap()).unwrap();
    let cfg = level_config(&SolverConfig::default(), &case, &mesh);
    let (_, report) = solve_case(&mesh, &cfg, &case, Some(InitialGuess::Zero)).unwrap();
    assert!(report.converged);
    assert_eq!(report.iterations, 1);
}

#[test]
fn stokes_start_on_a_stokes_case_is_already_a_root() {
    let case = cases::synthetic_stokes();
    let mesh = case.tag(&generate_structured_quads(8, 8, Rect::UNIT).unwrap()).unwrap();
    let cfg = level_config(&SolverConfig::default(), &case, &mesh);
    let init = initial_guess(&mesh, &cfg, &case, InitialGuess::StokesSolve).unwrap();
    let (_, report) = newton_solve(&mesh, &cfg, &case, &init).unwrap();
    assert!(report.converged);
    assert!(report.iterations <= 1, "{:?}", report.residuals);
}

#[test]
fn zero_initial_guess_is_all_zeros() {
    let case = cases::cavity(100.0).unwrap();
    let mesh = case.tag(&cases::cavity_mesh(1, CellType::Quad).unwrap()).unwrap();
    let cfg = level_config(&SolverConfig::default(), &case, &mesh);
    let s = initial_guess(&mesh, &cfg, &case, InitialGuess::Zero).unwrap();
    assert!(s.u.iter().all(|u| u.x == 0.0 && u.y == 0.0));
    assert!(s.u_hat.iter().all(|u| u.x == 0.0 && u.y == 0.0));
    assert!(s.p.iter().chain(&s.p_hat).all(|p| *p == 0.0));
    assert_eq!(s.lambda, Some(0.0));
}

#[test]
fn couette_level_one_converges_quadratically() {
    let case = cases::couette_default();
    let mesh = case.tag(&cases::couette_mesh(1, CellType::Quad).unwrap()).unwrap();
    let cfg = SolverConfig {
        riemann: RiemannSolver::Hll,
        newton_tol: 1e-10,
        ..level_config(&SolverConfig::default(), &case, &mesh)
    };
    let (state, report) = solve_case(&mesh, &cfg, &case, None).unwrap();
    assert!(report.converged);
    assert_monotone_tail(&report);
    let r = &report.residuals;
    // The log-residual gap at least doubles over the last two steps.
    let n = r.len();
    let (g1, g2) = ((r[n - 3] / r[n - 2]).log10(), (r[n - 2] / r[n - 1]).log10());
    assert!(g2 >= 2.0 * g1 * 0.85 || r[n - 1] < 1e-13, "residuals {r:?}");

    // The converged state re-evaluated from scratch.
    let disc = Discretization::new(&mesh, &cfg, &case).unwrap();
    assert!(ns::residual(&disc, &state, &state.u_hat, false).norm() <= cfg.newton_tol);
}

#[test]
fn newton_is_deterministic() {
    let case = cases::cavity(400.0).unwrap();
    let mesh = case.tag(&graded_cavity_mesh(1).unwrap()).unwrap();
    let cfg = level_config(&SolverConfig::default(), &case, &mesh);
    let (a, ra) = solve_case(&mesh, &cfg, &case, None).unwrap();
    let (b, rb) = solve_case(&mesh, &cfg, &case, None).unwrap();
    assert!(ra.converged);
    assert_eq!(a, b);
    assert_eq!(ra.residuals, rb.residuals);
    assert_monotone_tail(&ra);
}

#[test]
fn initial_guesses_reach_the_same_cavity_solution() {
    let case = cases::cavity(1000.0).unwrap();
    let mesh = case.tag(&graded_cavity_mesh(1).unwrap()).unwrap();
    let cfg = level_config(&SolverConfig::default(), &case, &mesh);
    let (a, ra) = solve_case(&mesh, &cfg, &case, Some(InitialGuess::Picard)).unwrap();
    let (b, rb) = solve_case(&mesh, &cfg, &case, Some(InitialGuess::Zero)).unwrap();
    assert!(ra.converged && rb.converged);
    let diff = a.u.iter().zip(&b.u).map(|(x, y)| (*x - *y).norm()).fold(0.0, f64::max);
    let pdiff = a.p.iter().zip(&b.p).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff <= 1e-8 && pdiff <= 1e-8, "velocity {diff:e}, pressure {pdiff:e}");
}

#[test]
fn lagged_and_exact_jacobians_share_the_root() {
    let case = cases::couette_default();
    let mesh = case.tag(&cases::couette_mesh(1, CellType::Tri).unwrap()).unwrap();
    let base = level_config(&SolverConfig::default(), &case, &mesh);
    let lagged = SolverConfig { jacobian: JacobianMode::Lagged, newton_max_iter: 60, ..base.clone() };
    let (a, ra) = solve_case(&mesh, &base, &case, None).unwrap();
    let (b, rb) = solve_case(&mesh, &lagged, &case, None).unwrap();
    assert!(ra.converged && rb.converged);
    assert!(ra.iterations <= rb.iterations);
    let diff = a.u_hat.iter().zip(&b.u_hat).map(|(x, y)| (*x - *y).norm()).fold(0.0, f64::max);
    assert!(diff <= 1e-9, "{diff:e}");
}

#[test]
fn unconverged_run_reports_its_history() {
    let case = cases::cavity(400.0).unwrap();
    let mesh = case.tag(&graded_cavity_mesh(1).unwrap()).unwrap();
    let cfg = SolverConfig { newton_max_iter: 2, ..level_config(&SolverConfig::default(), &case, &mesh) };
    let (_, report) = solve_case(&mesh, &cfg, &case, Some(InitialGuess::Zero)).unwrap();
    assert!(!report.converged);
    assert_eq!(report.iterations, 2);
    assert_eq!(report.residuals.len(), 3);
    assert_eq!(report.linear_residuals.len(), 2);
}

#[test]
fn newton_history_csv() {
    let report = NewtonReport { iterations: 1, residuals: vec![1.0, 0.25], ..NewtonReport::default() };
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("newton.csv");
    report.write_csv(&path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "iter,residual_norm\n0,1e0\n1,2.5e-1\n");
}

fn report(residuals: &[f64]) -> NewtonReport {
    NewtonReport {
        iterations: residuals.len() - 1,
        residuals: residuals.to_vec(),
        linear_residuals: vec![],
        converged: true,
        wall_time: std::time::Duration::ZERO,
    }
}

#[test]
fn tail_order_ignores_round_off_residuals() {
    let quadratic = report(&[1.0, 1e-1, 1e-2, 1e-4]);
    assert!((quadratic.tail_order().unwrap() - 2.0).abs() < 1e-12);
    // The last entry sits below the round-off floor and must not flatten the estimate.
    let stalled = report(&[1.0, 1e-1, 1e-2, 1e-4, 3e-15]);
    assert!((stalled.tail_order().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(report(&[1.0, 1e-1]).tail_order(), None);
}
