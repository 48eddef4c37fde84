//! Line-oriented ASCII mesh format.
//!
//! ```text
//! hpfcfv-mesh v1 2 <quad|tri>
//! nodes <n>
//! <x> <y>            (n lines)
//! cells <m>
//! <v0> <v1> ...      (m lines, 0-based node indices, counter-clockwise)
//! tags <k>
//! <face> <kind>      (k lines, kind = dirichlet|neumann|symmetry)
//! ```
//!
//! Coordinates are written in shortest round-trip form, so writing and
//! reading back is lossless. Face indices refer to the face numbering that
//! [`Mesh::from_cells`] derives from the cell list.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geom::Vec2;
use crate::mesh::{BoundaryKind, CellType, Mesh};

pub const MAGIC: &str = "hpfcfv-mesh";

pub fn mesh_to_string(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{MAGIC} v1 2 {}", mesh.cell_type());
    let _ = writeln!(s, "nodes {}", mesh.n_nodes());
    for p in mesh.nodes() {
        let _ = writeln!(s, "{} {}", p.x, p.y);
    }
    let _ = writeln!(s, "cells {}", mesh.n_cells());
    for e in 0..mesh.n_cells() {
        let line: Vec<String> = mesh.cell_nodes(e).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    let tags: Vec<(usize, BoundaryKind)> =
        mesh.boundary_tags().iter().enumerate().filter_map(|(f, t)| t.map(|k| (f, k))).collect();
    let _ = writeln!(s, "tags {}", tags.len());
    for (f, k) in tags {
        let _ = writeln!(s, "{f} {k}");
    }
    s
}

pub fn write_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, mesh_to_string(mesh)).map_err(|e| Error::io(path, e))
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Result<Vec<&'a str>> {
        for (i, l) in self.inner.by_ref() {
            self.line = i + 1;
            let t = l.trim();
            if !t.is_empty() {
                return Ok(t.split_whitespace().collect());
            }
        }
        Err(Error::Parse { line: self.line + 1, msg: "unexpected end of file".into() })
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, msg: msg.into() }
    }

    fn parse<T: FromStr>(&self, tok: &str, what: &str) -> Result<T> {
        tok.parse().map_err(|_| self.err(format!("invalid {what} '{tok}'")))
    }

    fn section(&mut self, name: &str) -> Result<usize> {
        let t = self.next()?;
        if t.len() != 2 || t[0] != name {
            return Err(self.err(format!("expected '{name} <count>'")));
        }
        self.parse(t[1], "count")
    }
}

pub fn parse_mesh(text: &str) -> Result<Mesh> {
    let mut lines = Lines { inner: text.lines().enumerate(), line: 0 };
    let h = lines.next()?;
    if h.len() != 4 || h[0] != MAGIC || h[1] != "v1" || h[2] != "2" {
        return Err(lines.err(format!("expected header '{MAGIC} v1 2 <quad|tri>'")));
    }
    let cell_type: CellType = h[3].parse().map_err(|_| lines.err(format!("unknown cell type '{}'", h[3])))?;

    let n = lines.section("nodes")?;
    let mut nodes = Vec::with_capacity(n);
    for _ in 0..n {
        let t = lines.next()?;
        if t.len() != 2 {
            return Err(lines.err("expected two coordinates"));
        }
        nodes.push(Vec2::new(lines.parse(t[0], "coordinate")?, lines.parse(t[1], "coordinate")?));
    }

    let m = lines.section("cells")?;
    let nv = cell_type.n_vertices();
    let mut cells = Vec::with_capacity(m * nv);
    for _ in 0..m {
        let t = lines.next()?;
        if t.len() != nv {
            return Err(lines.err(format!("expected {nv} node indices")));
        }
        for tok in t {
            let v: usize = lines.parse(tok, "node index")?;
            if v >= n {
                return Err(lines.err(format!("node index {v} out of range")));
            }
            cells.push(v);
        }
    }
    let mesh = Mesh::from_cells(nodes, cell_type, cells)?;

    let k = lines.section("tags")?;
    let mut tags = Vec::with_capacity(k);
    for _ in 0..k {
        let t = lines.next()?;
        if t.len() != 2 {
            return Err(lines.err("expected '<face> <kind>'"));
        }
        let kind: BoundaryKind = t[1].parse().map_err(|_| lines.err(format!("unknown boundary kind '{}'", t[1])))?;
        tags.push((lines.parse(t[0], "face index")?, kind));
    }
    if tags.is_empty() {
        Ok(mesh)
    } else {
        mesh.with_tags(&tags)
    }
}

pub fn read_mesh(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text)
}
