//! Two-dimensional meshes of quadrilateral or triangular cells.
//!
//! Faces are built from the cell connectivity in order of first appearance
//! (cells in index order, local faces in vertex order). Local face `j` of a
//! cell joins vertices `j` and `j + 1`. Each face stores its normal once,
//! pointing out of its owner, which is always the adjacent cell with the
//! smaller index; the neighbour sees the negated normal.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Geometric tolerance used by the boundary predicates of the generators.
pub const GEOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellType {
    Quad,
    Tri,
}

impl CellType {
    pub fn n_vertices(self) -> usize {
        match self {
            CellType::Quad => 4,
            CellType::Tri => 3,
        }
    }
}

impl fmt::Display for CellType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellType::Quad => "quad",
            CellType::Tri => "tri",
        })
    }
}

impl FromStr for CellType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "quad" | "quads" | "quadrilateral" => Ok(CellType::Quad),
            "tri" | "tris" | "triangle" => Ok(CellType::Tri),
            other => Err(Error::Config(format!("unknown cell type '{other}'"))),
        }
    }
}

/// Boundary condition class of a boundary face. The data (`u_D`, `g`) is
/// supplied by the case definition, evaluated at the face barycentre.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryKind {
    Dirichlet,
    Neumann,
    Symmetry,
}

impl fmt::Display for BoundaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryKind::Dirichlet => "dirichlet",
            BoundaryKind::Neumann => "neumann",
            BoundaryKind::Symmetry => "symmetry",
        })
    }
}

impl FromStr for BoundaryKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" => Ok(BoundaryKind::Dirichlet),
            "neumann" => Ok(BoundaryKind::Neumann),
            "symmetry" => Ok(BoundaryKind::Symmetry),
            other => Err(Error::Config(format!("unknown boundary kind '{other}'"))),
        }
    }
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub const UNIT: Rect = Rect { x0: 0.0, x1: 1.0, y0: 0.0, y1: 1.0 };

    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.x0 && p.x <= self.x1 && p.y >= self.y0 && p.y <= self.y1
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// End nodes, ordered as traversed counter-clockwise by the owner.
    pub nodes: [usize; 2],
    pub barycentre: Vec2,
    /// Unit normal, outward from the owner.
    pub normal: Vec2,
    /// Unit tangent, the normal rotated 90° counter-clockwise.
    pub tangent: Vec2,
    pub measure: f64,
    pub owner: usize,
    pub neighbour: Option<usize>,
    /// Local face index inside the owner and (if any) the neighbour.
    pub local_index: [usize; 2],
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.neighbour.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FaceTable {
    faces: Vec<Face>,
}

impl FaceTable {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Face> {
        self.faces.iter()
    }

    pub fn n_internal(&self) -> usize {
        self.faces.iter().filter(|f| !f.is_boundary()).count()
    }

    pub fn n_boundary(&self) -> usize {
        self.faces.iter().filter(|f| f.is_boundary()).count()
    }

    /// Connectivity only (nodes, owner, neighbour, local indices).
    pub fn same_topology(&self, other: &FaceTable) -> bool {
        self.len() == other.len()
            && self.faces.iter().zip(&other.faces).all(|(a, b)| {
                a.nodes == b.nodes && a.owner == b.owner && a.neighbour == b.neighbour && a.local_index == b.local_index
            })
    }
}

impl std::ops::Index<usize> for FaceTable {
    type Output = Face;
    fn index(&self, i: usize) -> &Face {
        &self.faces[i]
    }
}

/// A face seen from one of its cells: measure, outward normal for that
/// cell and global index.
#[derive(Debug, Clone, Copy)]
pub struct CellFace {
    pub face: usize,
    pub measure: f64,
    pub normal: Vec2,
    pub tangent: Vec2,
    pub barycentre: Vec2,
    pub is_boundary: bool,
}

/// Geometric boundary predicate used by [`Mesh::tag_boundaries`].
#[derive(Clone)]
pub struct BoundaryRule {
    pub kind: BoundaryKind,
    pub predicate: std::sync::Arc<dyn Fn(Vec2) -> bool + Send + Sync>,
}

impl fmt::Debug for BoundaryRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoundaryRule").field("kind", &self.kind).finish_non_exhaustive()
    }
}

impl BoundaryRule {
    pub fn new(kind: BoundaryKind, predicate: impl Fn(Vec2) -> bool + Send + Sync + 'static) -> Self {
        BoundaryRule { kind, predicate: std::sync::Arc::new(predicate) }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<Vec2>,
    cell_type: CellType,
    cell_nodes: Vec<usize>,
    cell_faces: Vec<usize>,
    areas: Vec<f64>,
    centroids: Vec<Vec2>,
    faces: FaceTable,
    boundary_tags: Vec<Option<BoundaryKind>>,
}

impl Mesh {
    /// Builds a mesh from node coordinates and flat, counter-clockwise cell
    /// connectivity (`cell_type.n_vertices()` entries per cell).
    pub fn from_cells(nodes: Vec<Vec2>, cell_type: CellType, cell_nodes: Vec<usize>) -> Result<Mesh> {
        let nv = cell_type.n_vertices();
        if cell_nodes.is_empty() || !cell_nodes.len().is_multiple_of(nv) {
            return Err(Error::InvalidMesh(format!(
                "connectivity length {} is not a positive multiple of {nv}",
                cell_nodes.len()
            )));
        }
        if let Some(&bad) = cell_nodes.iter().find(|&&i| i >= nodes.len()) {
            return Err(Error::InvalidMesh(format!("node index {bad} out of range")));
        }
        let n_cells = cell_nodes.len() / nv;

        let mut edge_to_face: HashMap<(usize, usize), usize> = HashMap::with_capacity(n_cells * nv);
        let mut faces: Vec<Face> = Vec::with_capacity(n_cells * nv);
        let mut cell_faces = vec![0; n_cells * nv];

        for e in 0..n_cells {
            let verts = &cell_nodes[e * nv..(e + 1) * nv];
            for j in 0..nv {
                let a = verts[j];
                let b = verts[(j + 1) % nv];
                if a == b {
                    return Err(Error::InvalidMesh(format!("cell {e} has a repeated vertex")));
                }
                let key = (a.min(b), a.max(b));
                match edge_to_face.get(&key) {
                    None => {
                        let id = faces.len();
                        edge_to_face.insert(key, id);
                        faces.push(Face {
                            nodes: [a, b],
                            barycentre: Vec2::ZERO,
                            normal: Vec2::ZERO,
                            tangent: Vec2::ZERO,
                            measure: 0.0,
                            owner: e,
                            neighbour: None,
                            local_index: [j, usize::MAX],
                        });
                        cell_faces[e * nv + j] = id;
                    }
                    Some(&id) => {
                        let f = &mut faces[id];
                        if f.neighbour.is_some() {
                            return Err(Error::InvalidMesh(format!("edge ({a}, {b}) shared by more than two cells")));
                        }
                        if f.owner == e {
                            return Err(Error::InvalidMesh(format!("cell {e} references edge ({a}, {b}) twice")));
                        }
                        if f.nodes != [b, a] {
                            return Err(Error::InvalidMesh(format!(
                                "cells {} and {e} have inconsistent orientation",
                                f.owner
                            )));
                        }
                        f.neighbour = Some(e);
                        f.local_index[1] = j;
                        cell_faces[e * nv + j] = id;
                    }
                }
            }
        }

        let n_faces = faces.len();
        let mut mesh = Mesh {
            nodes,
            cell_type,
            cell_nodes,
            cell_faces,
            areas: vec![0.0; n_cells],
            centroids: vec![Vec2::ZERO; n_cells],
            faces: FaceTable { faces },
            boundary_tags: vec![None; n_faces],
        };
        mesh.update_geometry()?;
        Ok(mesh)
    }

    fn update_geometry(&mut self) -> Result<()> {
        let nv = self.cell_type.n_vertices();
        for e in 0..self.n_cells() {
            let verts = &self.cell_nodes[e * nv..(e + 1) * nv];
            let mut twice_area = 0.0;
            let mut c = Vec2::ZERO;
            // Shoelace relative to the first vertex to limit cancellation.
            let origin = self.nodes[verts[0]];
            for j in 0..nv {
                let p = self.nodes[verts[j]] - origin;
                let q = self.nodes[verts[(j + 1) % nv]] - origin;
                let cr = p.cross(q);
                twice_area += cr;
                c += (p + q) * cr;
            }
            let area = 0.5 * twice_area;
            if !(area > 0.0) {
                return Err(Error::InvertedCell { cell: e, area });
            }
            self.areas[e] = area;
            self.centroids[e] = origin + c * (1.0 / (6.0 * area));
        }
        for f in &mut self.faces.faces {
            let a = self.nodes[f.nodes[0]];
            let b = self.nodes[f.nodes[1]];
            let d = b - a;
            let len = d.norm();
            if !(len > 0.0) {
                return Err(Error::InvalidMesh(format!("zero-length face between nodes {:?}", f.nodes)));
            }
            let t = d * (1.0 / len);
            // Outward for a counter-clockwise owner: rotate the edge clockwise.
            f.normal = Vec2::new(t.y, -t.x);
            f.tangent = f.normal.perp();
            f.measure = len;
            f.barycentre = (a + b) * 0.5;
        }
        Ok(())
    }

    /// Same topology (and tags), new node coordinates.
    pub fn with_nodes(&self, nodes: Vec<Vec2>) -> Result<Mesh> {
        if nodes.len() != self.nodes.len() {
            return Err(Error::InvalidMesh("node count mismatch".into()));
        }
        let mut m = self.clone();
        m.nodes = nodes;
        m.update_geometry()?;
        Ok(m)
    }

    pub fn nodes(&self) -> &[Vec2] {
        &self.nodes
    }

    pub fn cell_type(&self) -> CellType {
        self.cell_type
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_cells(&self) -> usize {
        self.areas.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn faces(&self) -> &FaceTable {
        &self.faces
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    pub fn cell_nodes(&self, e: usize) -> &[usize] {
        let nv = self.cell_type.n_vertices();
        &self.cell_nodes[e * nv..(e + 1) * nv]
    }

    pub fn cell_face_ids(&self, e: usize) -> &[usize] {
        let nv = self.cell_type.n_vertices();
        &self.cell_faces[e * nv..(e + 1) * nv]
    }

    pub fn area(&self, e: usize) -> f64 {
        self.areas[e]
    }

    pub fn centroid(&self, e: usize) -> Vec2 {
        self.centroids[e]
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    /// `+1` if `e` owns face `f`, `-1` if it is the neighbour.
    pub fn face_sign(&self, e: usize, f: usize) -> f64 {
        if self.faces[f].owner == e {
            1.0
        } else {
            -1.0
        }
    }

    /// Faces of cell `e` with normals oriented outward from `e`.
    pub fn cell_faces(&self, e: usize) -> impl Iterator<Item = CellFace> + '_ {
        self.cell_face_ids(e).iter().map(move |&f| {
            let face = &self.faces[f];
            let s = self.face_sign(e, f);
            CellFace {
                face: f,
                measure: face.measure,
                normal: face.normal * s,
                tangent: face.tangent * s,
                barycentre: face.barycentre,
                is_boundary: face.is_boundary(),
            }
        })
    }

    pub fn boundary_tag(&self, f: usize) -> Option<BoundaryKind> {
        self.boundary_tags[f]
    }

    pub fn boundary_tags(&self) -> &[Option<BoundaryKind>] {
        &self.boundary_tags
    }

    pub fn is_dirichlet(&self, f: usize) -> bool {
        self.boundary_tags[f] == Some(BoundaryKind::Dirichlet)
    }

    /// True once every boundary face carries a tag.
    pub fn is_tagged(&self) -> bool {
        self.faces.iter().zip(&self.boundary_tags).all(|(f, t)| !f.is_boundary() || t.is_some())
    }

    /// Without a Neumann face the pressure is only defined up to a constant.
    pub fn needs_pressure_constraint(&self) -> bool {
        !self.boundary_tags.contains(&Some(BoundaryKind::Neumann))
    }

    pub fn count_tagged(&self, kind: BoundaryKind) -> usize {
        self.boundary_tags.iter().filter(|t| **t == Some(kind)).count()
    }

    /// Assigns tags from explicit `(face, kind)` pairs; every boundary face
    /// must be covered exactly once and interior faces never.
    pub fn with_tags(&self, tags: &[(usize, BoundaryKind)]) -> Result<Mesh> {
        let mut out = vec![None; self.n_faces()];
        for &(f, kind) in tags {
            if f >= self.n_faces() {
                return Err(Error::InvalidMesh(format!("tag for face {f} out of range")));
            }
            if !self.faces[f].is_boundary() {
                return Err(Error::InvalidMesh(format!("tag on interior face {f}")));
            }
            if out[f].is_some() {
                return Err(Error::InvalidMesh(format!("face {f} tagged twice")));
            }
            out[f] = Some(kind);
        }
        let mut m = self.clone();
        m.boundary_tags = out;
        if !m.is_tagged() {
            let f = (0..m.n_faces()).find(|&f| m.faces[f].is_boundary() && m.boundary_tags[f].is_none());
            return Err(Error::InvalidMesh(format!("boundary face {} untagged", f.unwrap_or(0))));
        }
        Ok(m)
    }

    /// Classifies every boundary face by the predicates, evaluated at the
    /// face barycentre. Exactly one rule must match each boundary face.
    pub fn tag_boundaries(&self, rules: &[BoundaryRule]) -> Result<Mesh> {
        let mut m = self.clone();
        for (i, f) in self.faces.iter().enumerate() {
            if !f.is_boundary() {
                m.boundary_tags[i] = None;
                continue;
            }
            let hits: Vec<BoundaryKind> =
                rules.iter().filter(|r| (r.predicate)(f.barycentre)).map(|r| r.kind).collect();
            if hits.len() != 1 {
                return Err(Error::BoundaryTagging {
                    face: i,
                    x: f.barycentre.x,
                    y: f.barycentre.y,
                    matches: hits.len(),
                });
            }
            m.boundary_tags[i] = Some(hits[0]);
        }
        Ok(m)
    }

    /// Tags all boundary faces with one kind.
    pub fn tag_all(&self, kind: BoundaryKind) -> Mesh {
        let mut m = self.clone();
        for (i, f) in self.faces.iter().enumerate() {
            m.boundary_tags[i] = f.is_boundary().then_some(kind);
        }
        m
    }

    /// Net Dirichlet flux `Σ |Γ| u_D(x_f)·n_f` over the Dirichlet faces.
    pub fn validate_compatibility(&self, dirichlet: impl Fn(Vec2) -> Vec2) -> f64 {
        self.faces
            .iter()
            .enumerate()
            .filter(|(i, _)| self.is_dirichlet(*i))
            .map(|(_, f)| f.measure * dirichlet(f.barycentre).dot(f.normal))
            .sum()
    }

    /// Characteristic cell size: the longest face of the mesh.
    pub fn characteristic_size(&self) -> f64 {
        self.faces.iter().map(|f| f.measure).fold(0.0, f64::max)
    }

    pub fn boundary_nodes(&self) -> Vec<bool> {
        let mut on = vec![false; self.n_nodes()];
        for f in self.faces.iter().filter(|f| f.is_boundary()) {
            on[f.nodes[0]] = true;
            on[f.nodes[1]] = true;
        }
        on
    }

    /// Shortest face touching each node.
    pub fn shortest_incident_edge(&self) -> Vec<f64> {
        let mut h = vec![f64::INFINITY; self.n_nodes()];
        for f in self.faces.iter() {
            for &n in &f.nodes {
                h[n] = h[n].min(f.measure);
            }
        }
        h
    }

    /// Largest `|Σ_j |Γ_j| n_j|` over the cells (polygon closure defect).
    pub fn max_closure_defect(&self) -> f64 {
        (0..self.n_cells())
            .map(|e| self.cell_faces(e).fold(Vec2::ZERO, |acc, cf| acc + cf.normal * cf.measure).norm())
            .fold(0.0, f64::max)
    }
}

/// Tensor-product grid from sorted coordinate lines. Node `(i, j)` has
/// index `j * (nx + 1) + i`; cells are numbered row by row.
pub fn tensor_grid(xs: &[f64], ys: &[f64], cell_type: CellType) -> Result<Mesh> {
    if xs.len() < 2 || ys.len() < 2 {
        return Err(Error::InvalidMesh("need at least one cell per direction".into()));
    }
    let nx = xs.len() - 1;
    let ny = ys.len() - 1;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for &y in ys {
        for &x in xs {
            nodes.push(Vec2::new(x, y));
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut cells = Vec::with_capacity(nx * ny * 4);
    for j in 0..ny {
        for i in 0..nx {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            match cell_type {
                CellType::Quad => cells.extend_from_slice(&[a, b, c, d]),
                // Split along the (i, j) -> (i + 1, j + 1) diagonal.
                CellType::Tri => cells.extend_from_slice(&[a, b, c, a, c, d]),
            }
        }
    }
    Mesh::from_cells(nodes, cell_type, cells)
}

fn uniform_lines(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| if i == n { b } else { a + (b - a) * i as f64 / n as f64 }).collect()
}

fn check_rect(nx: usize, ny: usize, domain: &Rect) -> Result<()> {
    if nx == 0 || ny == 0 {
        return Err(Error::InvalidMesh("nx and ny must be positive".into()));
    }
    if !(domain.x1 - domain.x0 > 0.0) || !(domain.y1 - domain.y0 > 0.0) {
        return Err(Error::InvalidMesh(format!("degenerate rectangle {domain:?}")));
    }
    Ok(())
}

/// Uniform `nx × ny` quadrilateral grid of `domain`.
pub fn generate_structured_quads(nx: usize, ny: usize, domain: Rect) -> Result<Mesh> {
    check_rect(nx, ny, &domain)?;
    tensor_grid(&uniform_lines(domain.x0, domain.x1, nx), &uniform_lines(domain.y0, domain.y1, ny), CellType::Quad)
}

/// The quadrilateral grid with each quad split into two triangles.
pub fn generate_structured_tris(nx: usize, ny: usize, domain: Rect) -> Result<Mesh> {
    check_rect(nx, ny, &domain)?;
    tensor_grid(&uniform_lines(domain.x0, domain.x1, nx), &uniform_lines(domain.y0, domain.y1, ny), CellType::Tri)
}

/// Polar grid of the annulus `r_i ≤ r ≤ r_o` centred at the origin, with
/// straight faces. Node `(k, l)` (radial `k`, angular `l`) has index
/// `k * n_theta + l`.
pub fn generate_annulus(n_theta: usize, n_r: usize, r_i: f64, r_o: f64, cell_type: CellType) -> Result<Mesh> {
    if n_theta < 3 || n_r == 0 {
        return Err(Error::InvalidMesh("annulus needs n_theta >= 3 and n_r >= 1".into()));
    }
    if !(r_i > 0.0 && r_i < r_o) {
        return Err(Error::InvalidMesh(format!("annulus radii must satisfy 0 < R_i < R_o, got {r_i}, {r_o}")));
    }
    let radii = uniform_lines(r_i, r_o, n_r);
    let mut nodes = Vec::with_capacity((n_r + 1) * n_theta);
    for &r in &radii {
        for l in 0..n_theta {
            let th = 2.0 * std::f64::consts::PI * l as f64 / n_theta as f64;
            nodes.push(Vec2::new(r * th.cos(), r * th.sin()));
        }
    }
    let id = |k: usize, l: usize| k * n_theta + (l % n_theta);
    let mut cells = Vec::new();
    for k in 0..n_r {
        for l in 0..n_theta {
            let (a, b, c, d) = (id(k, l), id(k + 1, l), id(k + 1, l + 1), id(k, l + 1));
            match cell_type {
                CellType::Quad => cells.extend_from_slice(&[a, b, c, d]),
                CellType::Tri => cells.extend_from_slice(&[a, b, c, a, c, d]),
            }
        }
    }
    Mesh::from_cells(nodes, cell_type, cells)
}

/// Randomly displaces every interior node by a vector drawn uniformly in a
/// disc of radius `factor × (shortest incident edge)`. The draw for node `i`
/// comes from a ChaCha8 stream seeded with `seed` on stream `i`, so the
/// result does not depend on traversal order.
pub fn distort(mesh: &Mesh, factor: f64, seed: u64) -> Result<Mesh> {
    if !(0.0..0.5).contains(&factor) {
        return Err(Error::Config(format!("distortion factor must lie in [0, 0.5), got {factor}")));
    }
    if factor == 0.0 {
        return Ok(mesh.clone());
    }
    let on_boundary = mesh.boundary_nodes();
    let h = mesh.shortest_incident_edge();
    let nodes: Vec<Vec2> = mesh
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            if on_boundary[i] {
                return p;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let radius = factor * h[i] * rng.gen::<f64>().sqrt();
            let angle = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            p + Vec2::new(radius * angle.cos(), radius * angle.sin())
        })
        .collect();
    mesh.with_nodes(nodes)
}
