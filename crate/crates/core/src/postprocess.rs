//! Error norms, convergence studies, cell mass fluxes, centreline profiles
//! and CSV/VTK output.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cases::{CaseDefinition, ExactSolution};
use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::locate::PointLocator;
use crate::mesh::{Mesh, Rect};
use crate::newton::solve_case;
use crate::stabilization::{PressureConstraint, SolverConfig};
use crate::state::SolutionState;
use crate::voigt::VoigtTensor;

/// Values whose pointwise errors can be measured.
pub trait FieldValue: Copy {
    fn norm_sq(self) -> f64;
    fn minus(self, other: Self) -> Self;
}

impl FieldValue for f64 {
    fn norm_sq(self) -> f64 {
        self * self
    }
    fn minus(self, other: Self) -> Self {
        self - other
    }
}

impl FieldValue for Vec2 {
    fn norm_sq(self) -> f64 {
        self.dot(self)
    }
    fn minus(self, other: Self) -> Self {
        self - other
    }
}

impl FieldValue for VoigtTensor {
    /// Frobenius norm of the dense tensor: the shear entry counts twice.
    fn norm_sq(self) -> f64 {
        self.frobenius_sq()
    }
    fn minus(self, other: Self) -> Self {
        self - other
    }
}

/// A discrete L2 error; absolute when the exact field has zero norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct L2Error {
    pub value: f64,
    pub relative: bool,
}

fn weighted_error<T: FieldValue>(items: impl Iterator<Item = (f64, T, T)>) -> Option<L2Error> {
    let (mut num, mut den, mut count) = (0.0, 0.0, 0usize);
    for (w, v, ex) in items {
        num += w * v.minus(ex).norm_sq();
        den += w * ex.norm_sq();
        count += 1;
    }
    if count == 0 {
        return None;
    }
    Some(if den > 0.0 {
        L2Error { value: (num / den).sqrt(), relative: true }
    } else {
        L2Error { value: num.sqrt(), relative: false }
    })
}

/// Relative L2 error of per-cell values against `exact` at the centroids.
pub fn l2_error_cells<T: FieldValue>(mesh: &Mesh, values: &[T], exact: impl Fn(Vec2) -> T) -> L2Error {
    weighted_error((0..mesh.n_cells()).map(|e| (mesh.area(e), values[e], exact(mesh.centroid(e)))))
        .unwrap_or(L2Error { value: 0.0, relative: false })
}

/// Relative L2 error of per-face values against `exact` at the barycentres.
pub fn l2_error_faces<T: FieldValue>(mesh: &Mesh, values: &[T], exact: impl Fn(Vec2) -> T) -> L2Error {
    weighted_error(mesh.faces().iter().enumerate().map(|(f, face)| (face.measure, values[f], exact(face.barycentre))))
        .unwrap_or(L2Error { value: 0.0, relative: false })
}

/// [`l2_error_cells`] over the cells whose centroid lies outside every
/// excluded box.
pub fn masked_l2_error<T: FieldValue>(
    mesh: &Mesh,
    values: &[T],
    exact: impl Fn(Vec2) -> T,
    excluded: &[Rect],
) -> Result<L2Error> {
    weighted_error(
        (0..mesh.n_cells())
            .filter(|&e| !excluded.iter().any(|r| r.contains(mesh.centroid(e))))
            .map(|e| (mesh.area(e), values[e], exact(mesh.centroid(e)))),
    )
    .ok_or_else(|| Error::Empty("every cell lies in an excluded region".into()))
}

/// Area-weighted mean of `p_e − p_exact(centroid)`, the constant separating
/// a zero-mean discrete pressure from the exact one.
pub fn pressure_offset(mesh: &Mesh, p: &[f64], exact: impl Fn(Vec2) -> f64) -> f64 {
    let s: f64 = (0..mesh.n_cells()).map(|e| mesh.area(e) * (p[e] - exact(mesh.centroid(e)))).sum();
    s / mesh.total_area()
}

/// Cell mass fluxes `J_e = Σ |Γ| w·n` with `w = u_D` on Dirichlet faces and
/// `û` elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFlux {
    pub per_cell: Vec<f64>,
    pub max_abs: f64,
    pub sum: f64,
}

pub fn cell_mass_flux(mesh: &Mesh, state: &SolutionState, case: &CaseDefinition) -> MassFlux {
    let per_cell: Vec<f64> = (0..mesh.n_cells())
        .map(|e| {
            mesh.cell_faces(e)
                .map(|cf| {
                    let w =
                        if mesh.is_dirichlet(cf.face) { (case.dirichlet)(cf.barycentre) } else { state.u_hat[cf.face] };
                    cf.measure * w.dot(cf.normal)
                })
                .sum()
        })
        .collect();
    let max_abs = per_cell.iter().fold(0.0f64, |m, j| m.max(j.abs()));
    let sum = per_cell.iter().sum();
    MassFlux { per_cell, max_abs, sum }
}

/// Relative errors of all solution families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorSet {
    pub u: f64,
    pub u_hat: f64,
    pub p: f64,
    pub p_hat: f64,
    /// Mixed variable; its relative error equals that of the deviatoric
    /// stress `−ν L`.
    pub l: f64,
}

/// Errors of `state` against `exact`. When the pressure is only fixed up to
/// a constant, the discrete pressures are first shifted by
/// [`pressure_offset`].
pub fn solution_errors(mesh: &Mesh, state: &SolutionState, exact: &ExactSolution) -> ErrorSet {
    let shift = if mesh.needs_pressure_constraint() { pressure_offset(mesh, &state.p, &*exact.p) } else { 0.0 };
    let p: Vec<f64> = state.p.iter().map(|v| v - shift).collect();
    let p_hat: Vec<f64> = state.p_hat.iter().map(|v| v - shift).collect();
    ErrorSet {
        u: l2_error_cells(mesh, &state.u, &*exact.u).value,
        u_hat: l2_error_faces(mesh, &state.u_hat, &*exact.u).value,
        p: l2_error_cells(mesh, &p, &*exact.p).value,
        p_hat: l2_error_faces(mesh, &p_hat, &*exact.p).value,
        l: l2_error_cells(mesh, &state.l, &*exact.l).value,
    }
}

/// `sqrt(Σ_e Σ_j |Γ_j| (p_e − p̂_j)² / Σ|Γ|)`, the gap between cell and
/// face pressures.
pub fn cell_face_pressure_gap(mesh: &Mesh, state: &SolutionState) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for e in 0..mesh.n_cells() {
        for cf in mesh.cell_faces(e) {
            let d = state.p[e] - state.p_hat[cf.face];
            num += cf.measure * d * d;
            den += cf.measure;
        }
    }
    (num / den).sqrt()
}

/// Solver settings for `case` on `mesh`: `base` with the case viscosity and
/// the pressure constraint the boundary requires.
pub fn level_config(base: &SolverConfig, case: &CaseDefinition, mesh: &Mesh) -> SolverConfig {
    let mut cfg = base.clone();
    cfg.nu = case.nu;
    cfg.pressure_constraint =
        if mesh.needs_pressure_constraint() { PressureConstraint::ZeroMean } else { PressureConstraint::None };
    if cfg.tau_p_faces.as_ref().is_some_and(|t| t.len() != mesh.n_faces()) {
        cfg.tau_p_faces = None;
    }
    cfg
}

/// One level of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelResult {
    pub level: u32,
    pub h: f64,
    pub n_cells: usize,
    pub errors: ErrorSet,
    pub newton_iterations: usize,
    pub max_je: f64,
    pub sum_je: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorField {
    U,
    UHat,
    P,
    PHat,
    L,
}

impl ErrorField {
    pub const ALL: [ErrorField; 5] = [ErrorField::U, ErrorField::UHat, ErrorField::P, ErrorField::PHat, ErrorField::L];

    pub fn of(self, e: &ErrorSet) -> f64 {
        match self {
            ErrorField::U => e.u,
            ErrorField::UHat => e.u_hat,
            ErrorField::P => e.p,
            ErrorField::PHat => e.p_hat,
            ErrorField::L => e.l,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub case: String,
    pub levels: Vec<LevelResult>,
}

/// `log(e_a/e_b) / log(h_a/h_b)`.
pub fn observed_rate(e_a: f64, e_b: f64, h_a: f64, h_b: f64) -> f64 {
    (e_a / e_b).ln() / (h_a / h_b).ln()
}

impl ConvergenceReport {
    /// Rate between level `i − 1` and level `i` (`None` for the first).
    pub fn rate(&self, i: usize, field: ErrorField) -> Option<f64> {
        if i == 0 || i >= self.levels.len() {
            return None;
        }
        let (a, b) = (&self.levels[i - 1], &self.levels[i]);
        Some(observed_rate(field.of(&a.errors), field.of(&b.errors), a.h, b.h))
    }

    /// Rate over the final refinement interval.
    pub fn final_rate(&self, field: ErrorField) -> Option<f64> {
        self.rate(self.levels.len().saturating_sub(1), field)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,h,err_u,err_uhat,err_p,err_phat,err_L,rate_u,rate_p,rate_L,maxJe,sumJe\n");
        let fmt_rate = |r: Option<f64>| r.map(|v| format!("{v:e}")).unwrap_or_default();
        for (i, l) in self.levels.iter().enumerate() {
            let e = &l.errors;
            let _ = writeln!(
                s,
                "{},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{},{:e},{:e}",
                l.level,
                l.h,
                e.u,
                e.u_hat,
                e.p,
                e.p_hat,
                e.l,
                fmt_rate(self.rate(i, ErrorField::U)),
                fmt_rate(self.rate(i, ErrorField::P)),
                fmt_rate(self.rate(i, ErrorField::L)),
                l.max_je,
                l.sum_je
            );
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

/// Solves `case` on a tagged mesh and measures it. Errors carry `context`.
fn measure_level(
    case: &CaseDefinition,
    exact: &ExactSolution,
    mesh: &Mesh,
    cfg: &SolverConfig,
    level: u32,
) -> Result<LevelResult> {
    let ctx = |e: Error| e.at_level(format!("{} level {level}", case.name));
    let (state, report) = solve_case(mesh, cfg, case, None).map_err(|f| ctx(f.error))?;
    if !report.converged {
        return Err(ctx(Error::NotConverged {
            iterations: report.iterations,
            residual: report.residuals.last().copied().unwrap_or(f64::NAN),
        }));
    }
    let flux = cell_mass_flux(mesh, &state, case);
    Ok(LevelResult {
        level,
        h: mesh.characteristic_size(),
        n_cells: mesh.n_cells(),
        errors: solution_errors(mesh, &state, exact),
        newton_iterations: report.iterations,
        max_je: flux.max_abs,
        sum_je: flux.sum,
    })
}

/// Solves `case` on each level of a mesh family (untagged meshes from
/// `mesh_at`) and reports errors, rates and mass fluxes.
pub fn convergence_study(
    case: &CaseDefinition,
    levels: &[u32],
    mesh_at: impl Fn(u32) -> Result<Mesh>,
    base: &SolverConfig,
) -> Result<ConvergenceReport> {
    if levels.len() < 2 {
        return Err(Error::Config("a convergence study needs at least two levels".into()));
    }
    let exact =
        case.exact.as_ref().ok_or_else(|| Error::Config(format!("case '{}' has no exact solution", case.name)))?;
    let mut out = Vec::with_capacity(levels.len());
    for &level in levels {
        let mesh = mesh_at(level).and_then(|m| case.tag(&m)).map_err(|e| e.at_level(format!("mesh level {level}")))?;
        let cfg = level_config(base, case, &mesh);
        out.push(measure_level(case, exact, &mesh, &cfg, level)?);
    }
    Ok(ConvergenceReport { case: case.name.clone(), levels: out })
}

/// One entry of a `τᵖ` sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau_p: f64,
    pub errors: ErrorSet,
    pub max_je: f64,
    pub sum_je: f64,
}

/// Default sweep values `1e-4 … 10`.
pub const TAU_P_SWEEP: [f64; 6] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0];

/// Solves `case` on one (untagged) mesh for each `τᵖ`.
pub fn tau_p_sweep(case: &CaseDefinition, mesh: &Mesh, base: &SolverConfig, taus: &[f64]) -> Result<Vec<SweepRow>> {
    let exact =
        case.exact.as_ref().ok_or_else(|| Error::Config(format!("case '{}' has no exact solution", case.name)))?;
    let mesh = case.tag(mesh)?;
    taus.iter()
        .map(|&tau_p| {
            let mut cfg = level_config(base, case, &mesh);
            cfg.tau_p = tau_p;
            cfg.tau_p_faces = None;
            let r = measure_level(case, exact, &mesh, &cfg, 0).map_err(|e| e.at_level(format!("tau_p = {tau_p:e}")))?;
            Ok(SweepRow { tau_p, errors: r.errors, max_je: r.max_je, sum_je: r.sum_je })
        })
        .collect()
}

pub fn sweep_to_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("tau_p,err_u,err_uhat,err_p,err_phat,err_L,maxJe,sumJe\n");
    for r in rows {
        let e = &r.errors;
        let _ = writeln!(
            s,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.tau_p, e.u, e.u_hat, e.p, e.p_hat, e.l, r.max_je, r.sum_je
        );
    }
    s
}

/// Centreline of the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Centreline {
    /// The line `x1 = 0.5`, sampled along `x2`.
    Vertical,
    /// The line `x2 = 0.5`, sampled along `x1`.
    Horizontal,
}

impl Centreline {
    fn point(self, coord: f64) -> Vec2 {
        match self {
            Centreline::Vertical => Vec2::new(0.5, coord),
            Centreline::Horizontal => Vec2::new(coord, 0.5),
        }
    }

    fn along(self, p: Vec2) -> f64 {
        match self {
            Centreline::Vertical => p.y,
            Centreline::Horizontal => p.x,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub coord: f64,
    pub u1: f64,
    pub u2: f64,
    pub p: f64,
}

/// Cell values at `point`, averaged over every cell containing it (a point
/// on a shared face or vertex takes the mean of its neighbours).
pub fn sample_state(locator: &PointLocator, state: &SolutionState, point: Vec2) -> Option<(Vec2, f64)> {
    let cells = locator.locate_all(point, 1e-10);
    if cells.is_empty() {
        return None;
    }
    let k = cells.len() as f64;
    let u = cells.iter().fold(Vec2::ZERO, |a, &e| a + state.u[e]) * (1.0 / k);
    let p = cells.iter().map(|&e| state.p[e]).sum::<f64>() / k;
    Some((u, p))
}

/// Piecewise-constant profile along a centreline: one sample per distinct
/// along-line centroid coordinate of the cells touching the line, ordered
/// by coordinate.
pub fn centreline_profiles(mesh: &Mesh, state: &SolutionState, line: Centreline) -> Vec<ProfileSample> {
    let locator = PointLocator::new(mesh);
    let nodes = mesh.nodes();
    let mut coords: Vec<f64> = (0..mesh.n_cells())
        .filter(|&e| {
            let cross: Vec<f64> = mesh
                .cell_nodes(e)
                .iter()
                .map(|&v| match line {
                    Centreline::Vertical => nodes[v].x - 0.5,
                    Centreline::Horizontal => nodes[v].y - 0.5,
                })
                .collect();
            cross.iter().any(|c| *c <= 0.0) && cross.iter().any(|c| *c >= 0.0)
        })
        .map(|e| line.along(mesh.centroid(e)))
        .collect();
    coords.sort_by(f64::total_cmp);
    coords.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    coords
        .into_iter()
        .filter_map(|c| {
            sample_state(&locator, state, line.point(c)).map(|(u, p)| ProfileSample { coord: c, u1: u.x, u2: u.y, p })
        })
        .collect()
}

pub fn profile_to_csv(samples: &[ProfileSample]) -> String {
    let mut s = String::from("coord,u1,u2,p\n");
    for x in samples {
        let _ = writeln!(s, "{:e},{:e},{:e},{:e}", x.coord, x.u1, x.u2, x.p);
    }
    s
}

/// RMS differences `(u1, u2)` between `samples` and a reference solution
/// sampled at the same centreline points, skipping points in `excluded`.
pub fn profile_rms_difference(
    samples: &[ProfileSample],
    line: Centreline,
    reference_mesh: &Mesh,
    reference: &SolutionState,
    excluded: &[Rect],
) -> Result<(f64, f64)> {
    let locator = PointLocator::new(reference_mesh);
    let (mut s1, mut s2, mut n) = (0.0, 0.0, 0usize);
    for x in samples {
        let pt = line.point(x.coord);
        if excluded.iter().any(|r| r.contains(pt)) {
            continue;
        }
        let (u, _) = sample_state(&locator, reference, pt)
            .ok_or_else(|| Error::Empty(format!("point ({}, {}) outside the reference mesh", pt.x, pt.y)))?;
        s1 += (x.u1 - u.x).powi(2);
        s2 += (x.u2 - u.y).powi(2);
        n += 1;
    }
    if n == 0 {
        return Err(Error::Empty("no profile samples outside the excluded regions".into()));
    }
    Ok(((s1 / n as f64).sqrt(), (s2 / n as f64).sqrt()))
}

/// The corner regions next to the lid excluded from cavity comparisons.
pub const CAVITY_CORNERS: [Rect; 2] =
    [Rect { x0: 0.0, x1: 0.05, y0: 0.95, y1: 1.0 }, Rect { x0: 0.95, x1: 1.0, y0: 0.95, y1: 1.0 }];

/// Reads a `coordinate,value` CSV (header optional).
pub fn read_reference_profile(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let parts: Vec<&str> = t.split(',').map(str::trim).collect();
        let parsed = (parts.len() == 2).then(|| (parts[0].parse::<f64>(), parts[1].parse::<f64>()));
        match parsed {
            Some((Ok(c), Ok(v))) => out.push((c, v)),
            _ if i == 0 => {}
            _ => return Err(Error::Parse { line: i + 1, msg: format!("expected 'coordinate,value', got '{t}'") }),
        }
    }
    Ok(out)
}

/// Writes a numeric table with a header row.
pub fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        let line: Vec<String> = r.iter().map(|v| format!("{v:e}")).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Reads a table written by [`write_table`]; empty cells read as NaN.
pub fn read_table(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::Parse { line: 1, msg: "missing header".into() })?;
    let header: Vec<String> = header.split(',').map(String::from).collect();
    let mut rows = Vec::new();
    for (i, l) in lines.enumerate() {
        let row = l
            .split(',')
            .map(|t| {
                if t.is_empty() {
                    Ok(f64::NAN)
                } else {
                    t.parse().map_err(|_| Error::Parse { line: i + 2, msg: format!("invalid number '{t}'") })
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Legacy ASCII VTK unstructured grid with cell data `u`, `p`, `L11`,
/// `L22`, `L12`.
pub fn vtk_string(mesh: &Mesh, state: &SolutionState) -> String {
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nhpfcfv solution\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.n_nodes());
    for p in mesh.nodes() {
        let _ = writeln!(s, "{:e} {:e} 0", p.x, p.y);
    }
    let nv = mesh.cell_type().n_vertices();
    let _ = writeln!(s, "CELLS {} {}", mesh.n_cells(), mesh.n_cells() * (nv + 1));
    for e in 0..mesh.n_cells() {
        let ids: Vec<String> = mesh.cell_nodes(e).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{nv} {}", ids.join(" "));
    }
    let vtk_type = if nv == 4 { 9 } else { 5 };
    let _ = writeln!(s, "CELL_TYPES {}", mesh.n_cells());
    for _ in 0..mesh.n_cells() {
        let _ = writeln!(s, "{vtk_type}");
    }
    let _ = writeln!(s, "CELL_DATA {}", mesh.n_cells());
    s.push_str("VECTORS u double\n");
    for u in &state.u {
        let _ = writeln!(s, "{:e} {:e} 0", u.x, u.y);
    }
    let mut scalar = |name: &str, vals: &mut dyn Iterator<Item = f64>| {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in vals {
            let _ = writeln!(s, "{v:e}");
        }
    };
    scalar("p", &mut state.p.iter().copied());
    scalar("L11", &mut state.l.iter().map(|l| l.0[0]));
    scalar("L22", &mut state.l.iter().map(|l| l.0[1]));
    scalar("L12", &mut state.l.iter().map(|l| l.0[2]));
    s
}

pub fn write_vtk(mesh: &Mesh, state: &SolutionState, path: &Path) -> Result<()> {
    std::fs::write(path, vtk_string(mesh, state)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured_quads, generate_structured_tris};

    #[test]
    fn exact_values_give_zero_error() {
        let mesh = generate_structured_quads(4, 4, Rect::UNIT).unwrap();
        let f = |x: Vec2| Vec2::new(x.x + 1.0, x.y * x.y);
        let vals: Vec<Vec2> = (0..mesh.n_cells()).map(|e| f(mesh.centroid(e))).collect();
        assert_eq!(l2_error_cells(&mesh, &vals, f).value, 0.0);
        let scaled: Vec<Vec2> = vals.iter().map(|v| *v * 1.1).collect();
        assert!((l2_error_cells(&mesh, &scaled, f).value - 0.1).abs() < 1e-14);
        let fv: Vec<Vec2> = mesh.faces().iter().map(|fc| f(fc.barycentre) * 1.1).collect();
        assert!((l2_error_faces(&mesh, &fv, f).value - 0.1).abs() < 1e-14);
    }

    #[test]
    fn zero_exact_norm_is_flagged() {
        let mesh = generate_structured_quads(2, 2, Rect::UNIT).unwrap();
        let e = l2_error_cells(&mesh, &[1.0; 4], |_| 0.0);
        assert!(!e.relative);
        assert!((e.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_shear_counts_twice() {
        let mesh = generate_structured_quads(1, 1, Rect::UNIT).unwrap();
        let vals = [VoigtTensor([0.0, 0.0, 1.0])];
        let e = l2_error_cells(&mesh, &vals, |_| VoigtTensor([1.0, 0.0, 0.0]));
        // |diff|² = 1 + 2, |exact|² = 1.
        assert!((e.value - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn masking() {
        let mesh = generate_structured_tris(4, 4, Rect::UNIT).unwrap();
        let vals: Vec<f64> = (0..mesh.n_cells()).map(|e| e as f64).collect();
        let ex = |x: Vec2| x.x + 2.0;
        let full = l2_error_cells(&mesh, &vals, ex);
        assert_eq!(masked_l2_error(&mesh, &vals, ex, &[]).unwrap(), full);
        assert!(masked_l2_error(&mesh, &vals, ex, &[Rect::new(-1.0, 2.0, -1.0, 2.0)]).is_err());
        assert!(masked_l2_error(&mesh, &vals, ex, &CAVITY_CORNERS).unwrap().value.is_finite());
    }

    #[test]
    fn constant_face_velocity_has_zero_flux() {
        let mesh = generate_structured_tris(3, 3, Rect::UNIT).unwrap().tag_all(crate::mesh::BoundaryKind::Neumann);
        let mut s = SolutionState::zeros(&mesh, false);
        s.u_hat.fill(Vec2::new(0.7, -1.3));
        let case = crate::cases::synthetic_stokes();
        let j = cell_mass_flux(&mesh, &s, &case);
        assert!(j.max_abs < 1e-14);
    }

    #[test]
    fn rates() {
        assert!((observed_rate(4.0, 1.0, 0.2, 0.1) - 2.0).abs() < 1e-14);
    }
}
