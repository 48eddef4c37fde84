//! Command-line front end: mesh generation, solves, convergence studies and
//! spectra.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hpfcfv::cases::{self, CaseDefinition};
use hpfcfv::mesh::{self, CellType, Mesh, Rect};
use hpfcfv::mesh_io;
use hpfcfv::newton::{solve_case, InitialGuess, NewtonReport};
use hpfcfv::postprocess::{self, Centreline};
use hpfcfv::sparse::SPECTRUM_CAP;
use hpfcfv::stabilization::{JacobianMode, RiemannSolver, SolverConfig};
use hpfcfv::stokes;

#[derive(Debug, Parser)]
#[command(name = "hpfcfv", version, about = "Hybrid-pressure face-centred finite volume flow solver")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// `key = value` solver settings applied after the flags.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate, distort and tag a mesh and write it in the ASCII format.
    Mesh(MeshArgs),
    /// Solve one case and write fields, Newton history and a manifest.
    Solve(SolveArgs),
    /// Run a mesh-refinement study or a tau_p sweep.
    Converge(ConvergeArgs),
    /// Eigenvalues of the Stokes global matrix.
    Spectrum(SpectrumArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum CaseName {
    StokesSynthetic,
    Couette,
    Cavity,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Cells {
    Quad,
    Tri,
}

impl From<Cells> for CellType {
    fn from(c: Cells) -> Self {
        match c {
            Cells::Quad => CellType::Quad,
            Cells::Tri => CellType::Tri,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Riemann {
    Lf,
    Hll,
}

impl From<Riemann> for RiemannSolver {
    fn from(r: Riemann) -> Self {
        match r {
            Riemann::Lf => RiemannSolver::Lf,
            Riemann::Hll => RiemannSolver::Hll,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Jacobian {
    Lagged,
    Exact,
    Picard,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Initial {
    Zero,
    Stokes,
    Picard,
}

#[derive(Debug, Args)]
struct MeshArgs {
    /// Structured quadrilaterals, NX × NY.
    #[arg(long, num_args = 2, value_names = ["NX", "NY"], conflicts_with_all = ["tri", "annulus"])]
    quad: Option<Vec<usize>>,
    /// Structured triangles, NX × NY × 2.
    #[arg(long, num_args = 2, value_names = ["NX", "NY"], conflicts_with = "annulus")]
    tri: Option<Vec<usize>>,
    /// Annulus between radii 1 and 2, N_THETA × N_R quadrilaterals.
    #[arg(long, num_args = 2, value_names = ["N_THETA", "N_R"])]
    annulus: Option<Vec<usize>>,
    /// `unit` or `x0,x1,y0,y1`.
    #[arg(long, default_value = "unit")]
    domain: String,
    /// Random interior node displacement as a fraction of the shortest edge.
    #[arg(long, default_value_t = 0.0)]
    distort: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tag the boundary with this case's rules.
    #[arg(long, value_enum)]
    case: Option<CaseName>,
    #[arg(short, long, default_value = "mesh.txt")]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SolverFlags {
    #[arg(long, value_enum, default_value = "hll")]
    riemann: Riemann,
    /// Reynolds number (cavity only).
    #[arg(long, default_value_t = 1000.0)]
    re: f64,
    #[arg(long)]
    tau_p: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, value_enum, default_value = "exact")]
    jacobian: Jacobian,
}

#[derive(Debug, Args)]
struct MeshChoice {
    #[arg(long, value_enum, default_value = "quad")]
    cells: Cells,
    #[arg(long, default_value_t = 0.0)]
    distort: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, value_enum)]
    case: CaseName,
    /// Mesh file or spec (`quad:16x16`, `tri:16x16`, `annulus:32x8`,
    /// `annulus-tri:32x8`, `graded:2`).
    #[arg(long, conflicts_with = "level")]
    mesh: Option<String>,
    /// Level of the case's mesh family.
    #[arg(long)]
    level: Option<u32>,
    #[command(flatten)]
    family: MeshChoice,
    #[command(flatten)]
    solver: SolverFlags,
    #[arg(long, value_enum)]
    initial: Option<Initial>,
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ConvergeArgs {
    #[arg(long, value_enum)]
    case: CaseName,
    /// Levels 1..=LEVELS.
    #[arg(long, default_value_t = 4)]
    levels: u32,
    #[command(flatten)]
    family: MeshChoice,
    #[command(flatten)]
    solver: SolverFlags,
    /// Sweep tau_p over 1e-4 … 10 on one level instead.
    #[arg(long)]
    sweep_tau_p: bool,
    #[arg(long, default_value_t = 2)]
    sweep_level: u32,
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SpectrumArgs {
    #[command(flatten)]
    family: MeshChoice,
    /// Cells per side of the unit square.
    #[arg(long, default_value_t = 16)]
    n: usize,
    #[arg(long)]
    tau_p: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Largest dimension accepted by the dense eigensolver.
    #[arg(long, default_value_t = SPECTRUM_CAP)]
    cap: usize,
    /// Also write the matrix as `row col value` lines.
    #[arg(long)]
    dump_matrix: bool,
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
}

/// Bad input rather than a solver failure (exit code 2).
#[derive(Debug)]
struct Usage(String);

impl fmt::Display for Usage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(Usage(msg.into()))
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    command: Vec<String>,
    version: &'a str,
    config: Option<&'a SolverConfig>,
    mesh: Option<MeshDescriptor>,
    seed: Option<u64>,
    outputs: Vec<String>,
    started_unix: f64,
    finished_unix: f64,
}

#[derive(Debug, Serialize)]
struct MeshDescriptor {
    spec: String,
    cell_type: String,
    n_cells: usize,
    n_faces: usize,
}

impl MeshDescriptor {
    fn new(spec: String, mesh: &Mesh) -> Self {
        MeshDescriptor {
            spec,
            cell_type: mesh.cell_type().to_string(),
            n_cells: mesh.n_cells(),
            n_faces: mesh.n_faces(),
        }
    }
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> anyhow::Result<()> {
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest)?;
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

fn make_case(name: CaseName, re: f64) -> anyhow::Result<CaseDefinition> {
    Ok(match name {
        CaseName::StokesSynthetic => cases::synthetic_stokes(),
        CaseName::Couette => cases::couette_default(),
        CaseName::Cavity => cases::cavity(re).map_err(|e| usage(e.to_string()))?,
    })
}

/// Untagged mesh of the case's family at `level`.
fn family_mesh(case: CaseName, level: u32, choice: &MeshChoice) -> hpfcfv::Result<Mesh> {
    let ct = CellType::from(choice.cells);
    let m = match case {
        CaseName::StokesSynthetic => return cases::square_mesh(level, ct, choice.distort, choice.seed),
        CaseName::Couette => cases::couette_mesh(level, ct)?,
        CaseName::Cavity => cases::cavity_mesh(level, ct)?,
    };
    mesh::distort(&m, choice.distort, choice.seed)
}

fn parse_dims(s: &str) -> anyhow::Result<(usize, usize)> {
    let (a, b) = s.split_once('x').ok_or_else(|| usage(format!("expected AxB, got '{s}'")))?;
    let parse = |t: &str| t.parse::<usize>().map_err(|_| usage(format!("invalid count '{t}'")));
    Ok((parse(a)?, parse(b)?))
}

/// A mesh file, or a `kind:args` spec.
fn mesh_from_spec(spec: &str) -> anyhow::Result<Mesh> {
    if let Some((kind, rest)) = spec.split_once(':') {
        let m = match kind {
            "quad" | "unit-quad" => {
                let (nx, ny) = parse_dims(rest)?;
                mesh::generate_structured_quads(nx, ny, Rect::UNIT)?
            }
            "tri" | "unit-tri" => {
                let (nx, ny) = parse_dims(rest)?;
                mesh::generate_structured_tris(nx, ny, Rect::UNIT)?
            }
            "annulus" | "annulus-tri" => {
                let (nt, nr) = parse_dims(rest)?;
                let ct = if kind == "annulus" { CellType::Quad } else { CellType::Tri };
                mesh::generate_annulus(nt, nr, 1.0, 2.0, ct)?
            }
            "graded" => {
                let level = rest.parse().map_err(|_| usage(format!("invalid level '{rest}'")))?;
                cases::graded_cavity_mesh(level)?
            }
            _ if Path::new(spec).exists() => mesh_io::read_mesh(Path::new(spec))?,
            _ => return Err(usage(format!("unknown mesh spec '{spec}'"))),
        };
        return Ok(m);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(usage(format!("mesh file '{spec}' not found")));
    }
    Ok(mesh_io::read_mesh(path)?)
}

fn parse_domain(s: &str) -> anyhow::Result<Rect> {
    if s == "unit" {
        return Ok(Rect::UNIT);
    }
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| usage(format!("domain must be 'unit' or 'x0,x1,y0,y1', got '{s}'")))?;
    if v.len() != 4 || !(v[0] < v[1] && v[2] < v[3]) {
        return Err(usage(format!("invalid domain '{s}'")));
    }
    Ok(Rect::new(v[0], v[1], v[2], v[3]))
}

/// Flags, then the config file, on top of the case defaults for `mesh`.
fn build_config(
    flags: &SolverFlags,
    config_file: Option<&Path>,
    case: &CaseDefinition,
    mesh: &Mesh,
) -> anyhow::Result<SolverConfig> {
    let mut cfg = case.config(mesh);
    cfg.riemann = flags.riemann.into();
    cfg.jacobian = match flags.jacobian {
        Jacobian::Lagged => JacobianMode::Lagged,
        Jacobian::Exact => JacobianMode::Exact,
        Jacobian::Picard => JacobianMode::Picard,
    };
    if let Some(v) = flags.tau_p {
        cfg.tau_p = v;
    }
    if let Some(v) = flags.beta {
        cfg.beta = v;
    }
    if let Some(v) = flags.tol {
        cfg.newton_tol = v;
    }
    if let Some(v) = flags.max_iter {
        cfg.newton_max_iter = v;
    }
    if let Some(path) = config_file {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_overrides(&text).map_err(|e| usage(e.to_string()))?;
    }
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn print_history(report: &NewtonReport) {
    for (i, r) in report.residuals.iter().enumerate() {
        eprintln!("  newton {i:>2}  residual {r:.3e}");
    }
}

fn cmd_mesh(args: &MeshArgs, argv: Vec<String>) -> anyhow::Result<()> {
    let started = now();
    let domain = parse_domain(&args.domain)?;
    let (m, spec) = match (&args.quad, &args.tri, &args.annulus) {
        (Some(q), None, None) => {
            (mesh::generate_structured_quads(q[0], q[1], domain)?, format!("quad:{}x{}", q[0], q[1]))
        }
        (None, Some(t), None) => {
            (mesh::generate_structured_tris(t[0], t[1], domain)?, format!("tri:{}x{}", t[0], t[1]))
        }
        (None, None, Some(a)) => {
            (mesh::generate_annulus(a[0], a[1], 1.0, 2.0, CellType::Quad)?, format!("annulus:{}x{}", a[0], a[1]))
        }
        _ => return Err(usage("choose exactly one of --quad, --tri, --annulus")),
    };
    let m = mesh::distort(&m, args.distort, args.seed).map_err(|e| usage(e.to_string()))?;
    let m = match args.case {
        Some(c) => make_case(c, 1000.0)?.tag(&m)?,
        None => m,
    };
    mesh_io::write_mesh(&m, &args.output)?;
    println!("wrote {} ({} cells, {} faces)", args.output.display(), m.n_cells(), m.n_faces());
    let dir = args.output.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let manifest = Manifest {
        command: argv,
        version: env!("CARGO_PKG_VERSION"),
        config: None,
        mesh: Some(MeshDescriptor::new(spec, &m)),
        seed: Some(args.seed),
        outputs: vec![args.output.display().to_string()],
        started_unix: started,
        finished_unix: now(),
    };
    let path = dir.join(format!(
        "{}.manifest.json",
        args.output.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "mesh".into())
    ));
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)?)
        .with_context(|| format!("writing {}", path.display()))
}

fn cmd_solve(args: &SolveArgs, config_file: Option<&Path>, argv: Vec<String>) -> anyhow::Result<()> {
    let started = now();
    let case = make_case(args.case, args.solver.re)?;
    let (raw, spec) = match (&args.mesh, args.level) {
        (Some(s), None) => (mesh_from_spec(s)?, s.clone()),
        (None, Some(l)) => {
            (family_mesh(args.case, l, &args.family).map_err(|e| usage(e.to_string()))?, format!("level:{l}"))
        }
        (None, None) => return Err(usage("give --mesh or --level")),
        (Some(_), Some(_)) => return Err(usage("--mesh and --level are exclusive")),
    };
    let mesh = if raw.is_tagged() && raw.n_faces() > 0 && raw.boundary_tags().iter().any(|t| t.is_some()) {
        raw
    } else {
        case.tag(&raw).map_err(|e| usage(e.to_string()))?
    };
    let cfg = build_config(&args.solver, config_file, &case, &mesh)?;
    create_dir(&args.out)?;
    let strategy = args.initial.map(|i| match i {
        Initial::Zero => InitialGuess::Zero,
        Initial::Stokes => InitialGuess::StokesSolve,
        Initial::Picard => InitialGuess::Picard,
    });

    let newton_csv = args.out.join("newton.csv");
    let mut outputs = vec![newton_csv.display().to_string()];
    let result = solve_case(&mesh, &cfg, &case, strategy);
    let (state, report, failure) = match result {
        Ok((s, r)) => (s, r, None),
        Err(f) => (*f.state, *f.report, Some(f.error)),
    };
    report.write_csv(&newton_csv)?;
    print_history(&report);

    let finish = |outputs: Vec<String>| {
        write_manifest(
            &args.out,
            &Manifest {
                command: argv.clone(),
                version: env!("CARGO_PKG_VERSION"),
                config: Some(&cfg),
                mesh: Some(MeshDescriptor::new(spec.clone(), &mesh)),
                seed: Some(args.family.seed),
                outputs,
                started_unix: started,
                finished_unix: now(),
            },
        )
    };
    if let Some(e) = failure {
        finish(outputs)?;
        bail!("solve failed: {e}");
    }

    let vtk = args.out.join("solution.vtk");
    postprocess::write_vtk(&mesh, &state, &vtk)?;
    outputs.push(vtk.display().to_string());
    let flux = postprocess::cell_mass_flux(&mesh, &state, &case);
    println!(
        "{}: {} cells, {} Newton iterations, converged = {}, max|J_e| = {:.3e}, sum J_e = {:.3e}",
        case.name,
        mesh.n_cells(),
        report.iterations,
        report.converged,
        flux.max_abs,
        flux.sum
    );
    if let Some(exact) = &case.exact {
        let e = postprocess::solution_errors(&mesh, &state, exact);
        println!("errors: u {:.4e}  uhat {:.4e}  p {:.4e}  phat {:.4e}  L {:.4e}", e.u, e.u_hat, e.p, e.p_hat, e.l);
    }
    if args.case == CaseName::Cavity {
        for (line, name) in [(Centreline::Vertical, "centreline_x1.csv"), (Centreline::Horizontal, "centreline_x2.csv")]
        {
            let path = args.out.join(name);
            let samples = postprocess::centreline_profiles(&mesh, &state, line);
            std::fs::write(&path, postprocess::profile_to_csv(&samples))
                .with_context(|| format!("writing {}", path.display()))?;
            outputs.push(path.display().to_string());
        }
    }
    finish(outputs)?;
    if !report.converged {
        bail!("Newton did not reach tolerance {:e} in {} iterations", cfg.newton_tol, report.iterations);
    }
    Ok(())
}

fn cmd_converge(args: &ConvergeArgs, config_file: Option<&Path>, argv: Vec<String>) -> anyhow::Result<()> {
    let started = now();
    let case = make_case(args.case, args.solver.re)?;
    if case.exact.is_none() {
        return Err(usage(format!("case '{}' has no exact solution", case.name)));
    }
    create_dir(&args.out)?;
    let probe = case.tag(&family_mesh(args.case, 1, &args.family).map_err(|e| usage(e.to_string()))?)?;
    let base = build_config(&args.solver, config_file, &case, &probe)?;
    let (path, spec) = if args.sweep_tau_p {
        let mesh = family_mesh(args.case, args.sweep_level, &args.family).map_err(|e| usage(e.to_string()))?;
        let rows = postprocess::tau_p_sweep(&case, &mesh, &base, &postprocess::TAU_P_SWEEP)?;
        let csv = postprocess::sweep_to_csv(&rows);
        print!("{csv}");
        let path = args.out.join("tau_p_sweep.csv");
        std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
        (path, format!("level:{}", args.sweep_level))
    } else {
        if args.levels < 2 {
            return Err(usage("--levels must be at least 2"));
        }
        let levels: Vec<u32> = (1..=args.levels).collect();
        let report =
            postprocess::convergence_study(&case, &levels, |l| family_mesh(args.case, l, &args.family), &base)?;
        print!("{}", report.to_csv());
        let path = args.out.join("convergence.csv");
        report.write_csv(&path)?;
        (path, format!("levels:1..={}", args.levels))
    };
    write_manifest(
        &args.out,
        &Manifest {
            command: argv,
            version: env!("CARGO_PKG_VERSION"),
            config: Some(&base),
            mesh: Some(MeshDescriptor {
                spec,
                cell_type: CellType::from(args.family.cells).to_string(),
                n_cells: 0,
                n_faces: 0,
            }),
            seed: Some(args.family.seed),
            outputs: vec![path.display().to_string()],
            started_unix: started,
            finished_unix: now(),
        },
    )
}

#[derive(Debug, Serialize)]
struct SpectrumSummary {
    dimension: usize,
    nonzeros: usize,
    min_re: f64,
    max_re: f64,
    max_abs_im: f64,
    complex_fraction: f64,
}

fn cmd_spectrum(args: &SpectrumArgs, config_file: Option<&Path>, argv: Vec<String>) -> anyhow::Result<()> {
    let started = now();
    let case = cases::synthetic_stokes();
    let ct = CellType::from(args.family.cells);
    let raw = match ct {
        CellType::Quad => mesh::generate_structured_quads(args.n, args.n, Rect::UNIT)?,
        CellType::Tri => mesh::generate_structured_tris(args.n, args.n, Rect::UNIT)?,
    };
    let raw = mesh::distort(&raw, args.family.distort, args.family.seed).map_err(|e| usage(e.to_string()))?;
    let mesh = case.tag(&raw)?;
    let mut cfg = case.config(&mesh);
    if let Some(v) = args.tau_p {
        cfg.tau_p = v;
    }
    if let Some(v) = args.beta {
        cfg.beta = v;
    }
    if let Some(path) = config_file {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        cfg.apply_overrides(&text).map_err(|e| usage(e.to_string()))?;
    }
    let disc = hpfcfv::ns::Discretization::without_constraint(&mesh, &cfg, &case)?;
    let system = stokes::assemble_stokes_unconstrained(&disc);
    if system.dim() > args.cap {
        return Err(usage(format!(
            "dimension {} exceeds the dense eigensolver cap {}; use a smaller --n or raise --cap",
            system.dim(),
            args.cap
        )));
    }
    create_dir(&args.out)?;
    let mut outputs = Vec::new();
    if args.dump_matrix {
        let path = args.out.join("matrix.txt");
        system.write_coordinates(&path)?;
        outputs.push(path.display().to_string());
    }
    let sp = hpfcfv::sparse::spectrum(&system, args.cap)?;
    let path = args.out.join("eigenvalues.csv");
    let rows: Vec<Vec<f64>> = sp.eigenvalues.iter().map(|&(re, im)| vec![re, im]).collect();
    postprocess::write_table(&path, &["re", "im"], &rows)?;
    outputs.push(path.display().to_string());
    let summary = SpectrumSummary {
        dimension: system.dim(),
        nonzeros: system.pattern_nnz(),
        min_re: sp.min_re,
        max_re: sp.max_re,
        max_abs_im: sp.max_abs_im,
        complex_fraction: sp.complex_fraction,
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    write_manifest(
        &args.out,
        &Manifest {
            command: argv,
            version: env!("CARGO_PKG_VERSION"),
            config: Some(&cfg),
            mesh: Some(MeshDescriptor::new(format!("{ct}:{}x{}", args.n, args.n), &mesh)),
            seed: Some(args.family.seed),
            outputs,
            started_unix: started,
            finished_unix: now(),
        },
    )
}

fn run(cli: Cli, argv: Vec<String>) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(usage("--threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let config = cli.config.as_deref();
    match &cli.command {
        Command::Mesh(a) => cmd_mesh(a, argv),
        Command::Solve(a) => cmd_solve(a, config, argv),
        Command::Converge(a) => cmd_converge(a, config, argv),
        Command::Spectrum(a) => cmd_spectrum(a, config, argv),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
