//! Acceptance gate: one PASS/FAIL line per criterion, run sequentially
//! (the cavity self-reference alone needs several GB of memory).

mod common;

use std::fmt::Write as _;
use std::time::Instant;

use common::oracle::{
    audit_exact, check_condensed_step, check_flux_cancellation, check_jacobian, configs, constant_case, constant_state,
    in_annulus, in_square,
};
use common::{random_state, small_problems};
use hpfcfv::cases::{self, couette_mesh, graded_cavity_mesh, square_mesh};
use hpfcfv::mesh::{generate_structured_quads, generate_structured_tris, Rect};
use hpfcfv::newton::solve_case;
use hpfcfv::ns::{self, Discretization};
use hpfcfv::postprocess::{
    cell_mass_flux, centreline_profiles, convergence_study, level_config, observed_rate, profile_rms_difference,
    solution_errors, tau_p_sweep, Centreline, ConvergenceReport, ErrorField, ErrorSet, CAVITY_CORNERS, TAU_P_SWEEP,
};
use hpfcfv::sparse::SPECTRUM_CAP;
use hpfcfv::stokes::{assemble_stokes, stokes_spectrum};
use hpfcfv::{CaseDefinition, CellType, Mesh, RiemannSolver, SolutionState, SolverConfig, Vec2};

/// Seed of the distorted mesh families.
const SEED: u64 = 7;
const DISTORTION: f64 = 0.3;

/// Reference maximum cell mass flux on the regular quad levels 1-5.
const MAX_JE_REFERENCE: [f64; 5] = [0.80e-3, 0.12e-3, 0.14e-4, 0.16e-5, 0.21e-6];

const FIELD_NAMES: [(ErrorField, &str); 5] = [
    (ErrorField::U, "u"),
    (ErrorField::UHat, "uhat"),
    (ErrorField::P, "p"),
    (ErrorField::PHat, "phat"),
    (ErrorField::L, "stress"),
];

/// Outcome of one criterion: overall verdict and a log of what was checked.
struct Verdict {
    pass: bool,
    log: String,
}

impl Verdict {
    fn new() -> Self {
        Verdict { pass: true, log: String::new() }
    }

    fn check(&mut self, ok: bool, what: impl AsRef<str>) {
        let _ = writeln!(self.log, "    [{}] {}", if ok { "ok" } else { "FAILED" }, what.as_ref());
        self.pass &= ok;
    }

    fn note(&mut self, what: impl AsRef<str>) {
        let _ = writeln!(self.log, "    {}", what.as_ref());
    }
}

fn synthetic_quads(distortion: f64) -> ConvergenceReport {
    let case = cases::synthetic_stokes();
    convergence_study(
        &case,
        &[1, 2, 3, 4, 5],
        |l| square_mesh(l, CellType::Quad, distortion, SEED),
        &SolverConfig::default(),
    )
    .expect("synthetic Stokes study")
}

fn log_report(v: &mut Verdict, label: &str, r: &ConvergenceReport) {
    for (i, l) in r.levels.iter().enumerate() {
        let e = &l.errors;
        let rates: Vec<String> =
            FIELD_NAMES.iter().map(|(f, n)| r.rate(i, *f).map(|x| format!("{n} {x:.3}")).unwrap_or_default()).collect();
        v.note(format!(
            "{label} L{} h={:.4e}: u {:.3e} uhat {:.3e} p {:.3e} phat {:.3e} stress {:.3e} maxJe {:.2e} sumJe {:.1e} {}",
            l.level,
            l.h,
            e.u,
            e.u_hat,
            e.p,
            e.p_hat,
            e.l,
            l.max_je,
            l.sum_je,
            rates.join(" ")
        ));
    }
}

fn check_rates(v: &mut Verdict, label: &str, r: &ConvergenceReport) {
    for (f, name) in FIELD_NAMES {
        let decreasing = r.levels.windows(2).all(|w| f.of(&w[1].errors) < f.of(&w[0].errors));
        let rate = r.final_rate(f).unwrap_or(f64::NAN);
        v.check(decreasing && rate >= 0.9, format!("{label} {name}: errors decrease, final rate {rate:.3} >= 0.9"));
    }
}

fn criterion_1(regular: &ConvergenceReport, distorted: &ConvergenceReport) -> Verdict {
    let mut v = Verdict::new();
    log_report(&mut v, "regular", regular);
    log_report(&mut v, "distorted", distorted);
    check_rates(&mut v, "regular", regular);
    check_rates(&mut v, "distorted", distorted);
    for (a, b) in regular.levels.iter().zip(&distorted.levels) {
        let worst = FIELD_NAMES.iter().map(|(f, _)| f.of(&b.errors) / f.of(&a.errors)).fold(0.0f64, f64::max);
        v.check(worst <= 2.0, format!("level {}: distorted/regular error ratio {worst:.3} <= 2", a.level));
    }
    v
}

fn criterion_2(regular: &ConvergenceReport, distorted: &ConvergenceReport) -> Verdict {
    let mut v = Verdict::new();
    for (l, reference) in regular.levels.iter().zip(MAX_JE_REFERENCE) {
        let ratio = l.max_je / reference;
        v.check(
            (1.0 / 3.0..=3.0).contains(&ratio),
            format!("level {}: max|J_e| {:.3e} vs {reference:.2e} (ratio {ratio:.2}) within 3x", l.level, l.max_je),
        );
    }
    let worst_sum = regular.levels.iter().chain(&distorted.levels).map(|l| l.sum_je.abs()).fold(0.0, f64::max);
    v.check(worst_sum <= 1e-10, format!("max |sum J_e| over all runs {worst_sum:.2e} <= 1e-10"));
    v
}

fn criterion_3() -> Verdict {
    let mut v = Verdict::new();
    let case = cases::synthetic_stokes();
    let mesh = square_mesh(2, CellType::Quad, 0.0, SEED).unwrap();
    let rows = tau_p_sweep(&case, &mesh, &SolverConfig::default(), &TAU_P_SWEEP).expect("tau_p sweep");
    for r in &rows {
        v.note(format!(
            "tau_p {:.0e}: u {:.4e} uhat {:.4e} stress {:.4e} maxJe {:.3e}",
            r.tau_p, r.errors.u, r.errors.u_hat, r.errors.l, r.max_je
        ));
    }
    let spread = |f: fn(&ErrorSet) -> f64| {
        let vals: Vec<f64> = rows.iter().map(|r| f(&r.errors)).collect();
        let (lo, hi) = (vals.iter().copied().fold(f64::INFINITY, f64::min), vals.iter().copied().fold(0.0, f64::max));
        (hi - lo) / lo
    };
    for (name, f) in [("u", (|e: &ErrorSet| e.u) as fn(&ErrorSet) -> f64), ("uhat", |e| e.u_hat), ("stress", |e| e.l)] {
        let s = spread(f);
        v.check(s <= 0.10, format!("{name} error varies by {:.2}% <= 10%", 100.0 * s));
    }
    let monotone = rows.windows(2).all(|w| w[1].max_je >= w[0].max_je);
    v.check(monotone, "max|J_e| non-decreasing in tau_p");
    let worst_sum = rows.iter().map(|r| r.sum_je.abs()).fold(0.0, f64::max);
    v.check(worst_sum <= 1e-10, format!("max |sum J_e| {worst_sum:.2e} <= 1e-10"));
    v
}

fn tagged(case: &CaseDefinition, raw: Mesh) -> (Mesh, SolverConfig) {
    let mesh = case.tag(&raw).unwrap();
    let cfg = level_config(&SolverConfig::default(), case, &mesh);
    (mesh, cfg)
}

fn criterion_4() -> Verdict {
    let mut v = Verdict::new();
    let case = cases::synthetic_stokes();
    let (mesh, cfg) = tagged(&case, generate_structured_quads(16, 16, Rect::UNIT).unwrap());
    let sys = assemble_stokes(&mesh, &cfg, &case).unwrap();
    v.check(sys.dim() == 1536, format!("dimension {} == 1536", sys.dim()));
    v.check(sys.pattern_nnz() == 30448, format!("nonzeros {} == 30448", sys.pattern_nnz()));
    let s = stokes_spectrum(&mesh, &cfg, &case, SPECTRUM_CAP).expect("spectrum");
    v.note(format!(
        "regular quads: Re in [{:.4e}, {:.4e}], complex {:.2}%, max|Im| {:.2e}",
        s.min_re,
        s.max_re,
        100.0 * s.complex_fraction,
        s.max_abs_im
    ));
    v.check(s.max_re < 0.0, "all real parts negative");
    v.check((-3.2e-4..=-0.8e-4).contains(&s.max_re), format!("max Re {:.4e} in [-3.2e-4, -0.8e-4]", s.max_re));
    v.check(s.complex_fraction < 0.07, format!("complex fraction {:.2}% < 7%", 100.0 * s.complex_fraction));
    v.check(s.max_abs_im <= 1e-4, format!("max |Im| {:.2e} <= 1e-4", s.max_abs_im));

    let distorted = |raw: Mesh| hpfcfv::mesh::distort(&raw, DISTORTION, SEED).unwrap();
    for (name, raw) in [
        ("distorted quads", distorted(generate_structured_quads(16, 16, Rect::UNIT).unwrap())),
        ("regular tris", generate_structured_tris(16, 16, Rect::UNIT).unwrap()),
        ("distorted tris", distorted(generate_structured_tris(16, 16, Rect::UNIT).unwrap())),
    ] {
        let (mesh, cfg) = tagged(&case, raw);
        let s = stokes_spectrum(&mesh, &cfg, &case, SPECTRUM_CAP).expect("spectrum");
        v.check(
            s.max_re < 0.0,
            format!(
                "{name} (n = {}): all real parts negative (max Re {:.4e}, complex {:.2}%)",
                s.eigenvalues.len(),
                s.max_re,
                100.0 * s.complex_fraction
            ),
        );
    }
    v
}

/// `value` is of the order of `10^exponent`: its base-10 logarithm rounds to
/// `exponent`.
fn of_order(value: f64, exponent: i32) -> bool {
    value.log10().round() as i32 == exponent
}

fn criterion_5() -> Verdict {
    let mut v = Verdict::new();
    let case = cases::couette_default();
    let exact = case.exact.clone().unwrap();
    let base = SolverConfig { riemann: RiemannSolver::Hll, newton_tol: 1e-10, ..SolverConfig::default() };
    let mut levels: Vec<(f64, ErrorSet, f64)> = Vec::new();
    for level in 1..=4 {
        let mesh = case.tag(&couette_mesh(level, CellType::Quad).unwrap()).unwrap();
        let cfg = level_config(&base, &case, &mesh);
        let (state, report) = match solve_case(&mesh, &cfg, &case, None) {
            Ok(x) => x,
            Err(f) => {
                v.check(false, format!("level {level}: {}", f.error));
                return v;
            }
        };
        v.check(report.converged, format!("level {level}: Newton converged to {:.1e}", cfg.newton_tol));
        let errors = solution_errors(&mesh, &state, &exact);
        let flux = cell_mass_flux(&mesh, &state, &case);
        let residuals: Vec<String> = report.residuals.iter().map(|r| format!("{r:.2e}")).collect();
        v.note(format!(
            "level {level} ({} cells): u {:.3e} uhat {:.3e} p {:.3e} phat {:.3e} stress {:.3e} maxJe {:.2e} residuals [{}]",
            mesh.n_cells(),
            errors.u,
            errors.u_hat,
            errors.p,
            errors.p_hat,
            errors.l,
            flux.max_abs,
            residuals.join(", ")
        ));
        match report.tail_order() {
            Some(q) => v.check(q >= 1.7, format!("level {level}: Newton tail order {q:.2} >= 1.7")),
            None => v.check(false, format!("level {level}: too few residuals above round-off for a tail order")),
        }
        levels.push((mesh.characteristic_size(), errors, flux.max_abs));
    }
    for (f, name) in FIELD_NAMES {
        let rates: Vec<f64> =
            levels.windows(2).map(|w| observed_rate(f.of(&w[0].1), f.of(&w[1].1), w[0].0, w[1].0)).collect();
        let last = *rates.last().unwrap();
        let shown: Vec<String> = rates.iter().map(|r| format!("{r:.3}")).collect();
        v.check(last >= 0.9, format!("{name}: rates [{}], final {last:.3} >= 0.9", shown.join(", ")));
    }
    let je: Vec<f64> = levels.iter().map(|l| l.2).collect();
    v.check(je.windows(2).all(|w| w[1] < w[0]), "max|J_e| decreases with refinement");
    v.check(of_order(je[0], -3), format!("level 1 max|J_e| {:.2e} is O(1e-3)", je[0]));
    v.check(of_order(je[3], -6), format!("level 4 max|J_e| {:.2e} is O(1e-6)", je[3]));
    v
}

fn cavity_run(re: f64, level: u32, riemann: RiemannSolver) -> Result<(Mesh, SolutionState, String), String> {
    let case = cases::cavity(re).unwrap();
    let mesh = case.tag(&graded_cavity_mesh(level).unwrap()).unwrap();
    let base = SolverConfig { riemann, newton_tol: 1e-10, ..SolverConfig::default() };
    let cfg = level_config(&base, &case, &mesh);
    let start = Instant::now();
    let (state, report) = solve_case(&mesh, &cfg, &case, None).map_err(|f| f.error.to_string())?;
    let residuals: Vec<String> = report.residuals.iter().map(|r| format!("{r:.2e}")).collect();
    let summary = format!(
        "Re {re} level {level} {riemann:?} ({} cells): converged {} in {} iterations, {:.0} s, residuals [{}]",
        mesh.n_cells(),
        report.converged,
        report.iterations,
        start.elapsed().as_secs_f64(),
        residuals.join(", ")
    );
    if report.converged {
        Ok((mesh, state, summary))
    } else {
        Err(summary)
    }
}

/// RMS differences of the u1 (vertical centreline) and u2 (horizontal
/// centreline) profiles from the reference.
fn profile_distance(mesh: &Mesh, state: &SolutionState, ref_mesh: &Mesh, reference: &SolutionState) -> (f64, f64) {
    let rms = |line| {
        profile_rms_difference(&centreline_profiles(mesh, state, line), line, ref_mesh, reference, &CAVITY_CORNERS)
            .expect("profile comparison")
    };
    (rms(Centreline::Vertical).0, rms(Centreline::Horizontal).1)
}

fn criterion_6() -> Verdict {
    let mut v = Verdict::new();
    let hll = cavity_run(1000.0, 2, RiemannSolver::Hll);
    let lf = cavity_run(1000.0, 2, RiemannSolver::Lf);
    for (name, r) in [("HLL level 2", &hll), ("LF level 2", &lf)] {
        match r {
            Ok((_, _, s)) => v.check(true, format!("{name}: {s}")),
            Err(s) => v.check(false, format!("{name} did not converge: {s}")),
        }
    }
    let reference = cavity_run(1000.0, 4, RiemannSolver::Hll);
    let (ref_mesh, ref_state) = match &reference {
        Ok((m, s, summary)) => {
            v.note(format!("self-reference: {summary}"));
            (m, s)
        }
        Err(s) => {
            v.check(false, format!("self-reference did not converge: {s}"));
            return v;
        }
    };
    let (Ok((hm, hs, _)), Ok((lm, ls, _))) = (&hll, &lf) else {
        return v;
    };
    let (h1, h2) = profile_distance(hm, hs, ref_mesh, ref_state);
    let (l1, l2) = profile_distance(lm, ls, ref_mesh, ref_state);
    v.check(h1 <= 0.05, format!("HLL u1 profile RMS {h1:.4} <= 0.05"));
    v.check(h2 <= 0.05, format!("HLL u2 profile RMS {h2:.4} <= 0.05"));
    v.note(format!("LF u1 profile RMS {l1:.4}, u2 profile RMS {l2:.4}"));
    let (dh, dl) = (h1.hypot(h2), l1.hypot(l2));
    v.check(dh < dl, format!("HLL combined RMS {dh:.4} < LF combined RMS {dl:.4}"));
    v
}

fn criterion_7() -> Verdict {
    let mut v = Verdict::new();
    match cavity_run(3200.0, 2, RiemannSolver::Hll) {
        Ok((_, _, s)) => v.check(true, s),
        Err(s) => v.check(false, format!("did not converge: {s}")),
    }
    v
}

fn criterion_8() -> Verdict {
    let mut v = Verdict::new();
    let seeds = [1u64, 2, 3];
    let (mut jac, mut step, mut flux, mut runs) = (Ok(()), Ok(()), Ok(()), 0);
    for p in small_problems() {
        for cfg in configs(&p) {
            let disc = Discretization::new(&p.mesh, &cfg, &p.case).unwrap();
            for seed in seeds {
                let state = random_state(&disc, seed, 1.0);
                let tag = |e: String| format!("{} {:?} {:?} seed {seed}: {e}", p.name, cfg.riemann, cfg.jacobian);
                jac = jac.and(check_jacobian(&disc, &state).map_err(tag));
                step = step.and(check_condensed_step(&disc, &state).map_err(tag));
                flux = flux.and(check_flux_cancellation(&disc, &state).map_err(tag));
                runs += 1;
            }
        }
    }
    let describe =
        |r: &Result<(), String>| r.as_ref().err().cloned().unwrap_or_else(|| format!("{runs} random states"));
    v.check(step.is_ok(), format!("(a) condensed vs monolithic step within 1e-10: {}", describe(&step)));
    v.check(jac.is_ok(), format!("(b) Jacobian vs central differences within 1e-6: {}", describe(&jac)));
    v.check(flux.is_ok(), format!("(c) interior flux cancellation within 1e-12: {}", describe(&flux)));

    let mut worst = 0.0f64;
    for (i, raw) in [
        generate_structured_quads(4, 3, Rect::UNIT).unwrap(),
        hpfcfv::mesh::distort(&generate_structured_tris(4, 3, Rect::UNIT).unwrap(), DISTORTION, SEED).unwrap(),
    ]
    .into_iter()
    .enumerate()
    {
        for convection in [false, true] {
            let (c, p0) = (Vec2::new(0.8, -1.3), 0.4 + i as f64);
            let case = constant_case(c, p0, convection);
            let mesh = case.tag(&raw).unwrap();
            let cfg = SolverConfig { nu: case.nu, ..SolverConfig::default() };
            let disc = Discretization::new(&mesh, &cfg, &case).unwrap();
            let state = constant_state(&mesh, c, p0);
            worst = worst.max(ns::residual(&disc, &state, &state.u_hat, false).norm());
        }
    }
    v.check(worst <= 1e-12, format!("(d) constant states are roots: residual {worst:.2e} <= 1e-12"));

    for (name, case, on_annulus) in [
        ("synthetic Stokes", cases::synthetic_stokes(), false),
        ("Couette", cases::couette_default(), true),
        ("Couette (1, 2, 0.3, -0.4)", cases::couette(1.0, 2.0, 0.3, -0.4).unwrap(), true),
    ] {
        let (l, div, mom) = if on_annulus { audit_exact(&case, in_annulus) } else { audit_exact(&case, in_square) };
        let worst = l.max(div).max(mom);
        v.check(worst <= 1e-6, format!("(e) {name} exact fields: PDE residual {worst:.2e} <= 1e-6"));
    }
    v
}

#[test]
fn acceptance() {
    let mut results: Vec<(u32, &str, Verdict, f64)> = Vec::new();
    let mut run = |n: u32, name: &'static str, f: &mut dyn FnMut() -> Verdict| {
        let start = Instant::now();
        let verdict = f();
        let secs = start.elapsed().as_secs_f64();
        println!("criterion {n} ({name}): {} [{secs:.0} s]", if verdict.pass { "PASS" } else { "FAIL" });
        print!("{}", verdict.log);
        results.push((n, name, verdict, secs));
    };

    let regular = synthetic_quads(0.0);
    let distorted = synthetic_quads(DISTORTION);
    run(1, "synthetic Stokes convergence", &mut || criterion_1(&regular, &distorted));
    run(2, "mass conservation", &mut || criterion_2(&regular, &distorted));
    run(3, "tau_p sensitivity", &mut criterion_3);
    run(4, "Stokes spectrum", &mut criterion_4);
    run(5, "Couette convergence", &mut criterion_5);
    run(6, "cavity Re 1000", &mut criterion_6);
    run(7, "cavity Re 3200", &mut criterion_7);
    run(8, "oracle equivalences", &mut criterion_8);

    println!("\nacceptance summary:");
    for (n, name, v, _) in &results {
        println!("  criterion {n} ({name}): {}", if v.pass { "PASS" } else { "FAIL" });
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    assert!(failed.is_empty(), "acceptance criteria failed: {failed:?}");
}
