//! Point location on a mesh through a uniform bucket grid.

use crate::geom::Vec2;
use crate::mesh::Mesh;

pub struct PointLocator<'a> {
    mesh: &'a Mesh,
    origin: Vec2,
    cell_size: Vec2,
    n: usize,
    buckets: Vec<Vec<usize>>,
}

impl<'a> PointLocator<'a> {
    pub fn new(mesh: &'a Mesh) -> Self {
        let (mut lo, mut hi) =
            (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in mesh.nodes() {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let n = ((mesh.n_cells() as f64).sqrt().ceil() as usize).max(1);
        let span = hi - lo;
        let cell_size =
            Vec2::new((span.x / n as f64).max(f64::MIN_POSITIVE), (span.y / n as f64).max(f64::MIN_POSITIVE));
        let mut loc = PointLocator { mesh, origin: lo, cell_size, n, buckets: vec![Vec::new(); n * n] };
        for e in 0..mesh.n_cells() {
            let (bl, bh) = loc.cell_box(e);
            let (i0, j0) = loc.bucket(bl);
            let (i1, j1) = loc.bucket(bh);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    loc.buckets[j * n + i].push(e);
                }
            }
        }
        loc
    }

    fn cell_box(&self, e: usize) -> (Vec2, Vec2) {
        let nodes = self.mesh.nodes();
        let mut lo = Vec2::new(f64::INFINITY, f64::INFINITY);
        let mut hi = Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
        for &v in self.mesh.cell_nodes(e) {
            let p = nodes[v];
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    fn bucket(&self, p: Vec2) -> (usize, usize) {
        let clamp = |v: f64| (v.floor().max(0.0) as usize).min(self.n - 1);
        (clamp((p.x - self.origin.x) / self.cell_size.x), clamp((p.y - self.origin.y) / self.cell_size.y))
    }

    /// Whether `p` lies in cell `e`, boundary included up to `tol`
    /// (relative to the edge length).
    pub fn contains(&self, e: usize, p: Vec2, tol: f64) -> bool {
        let nodes = self.mesh.nodes();
        let cn = self.mesh.cell_nodes(e);
        (0..cn.len()).all(|k| {
            let a = nodes[cn[k]];
            let b = nodes[cn[(k + 1) % cn.len()]];
            let edge = b - a;
            edge.cross(p - a) >= -tol * edge.norm() * edge.norm()
        })
    }

    /// All cells containing `p`, in increasing index order.
    pub fn locate_all(&self, p: Vec2, tol: f64) -> Vec<usize> {
        let (i, j) = self.bucket(p);
        let mut out: Vec<usize> =
            self.buckets[j * self.n + i].iter().copied().filter(|&e| self.contains(e, p, tol)).collect();
        out.sort_unstable();
        out
    }

    pub fn locate(&self, p: Vec2) -> Option<usize> {
        self.locate_all(p, 1e-12).first().copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured_tris, Rect};

    #[test]
    fn finds_every_centroid() {
        let mesh = generate_structured_tris(7, 5, Rect::new(-1.0, 2.0, 0.0, 1.0)).unwrap();
        let loc = PointLocator::new(&mesh);
        for e in 0..mesh.n_cells() {
            assert_eq!(loc.locate(mesh.centroid(e)), Some(e));
        }
        assert_eq!(loc.locate(Vec2::new(5.0, 5.0)), None);
        // A shared vertex belongs to several cells.
        assert!(loc.locate_all(mesh.nodes()[9], 1e-12).len() >= 2);
    }
}
