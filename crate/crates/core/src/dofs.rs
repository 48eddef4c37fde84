//! Global numbering of the face unknowns.
//!
//! All `û` unknowns come first (per face, x then y, non-Dirichlet faces in
//! face order), then one `p̂` per face, then the optional multiplier `λ`.

use crate::mesh::Mesh;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DofMap {
    uhat: Vec<Option<usize>>,
    n_uhat_faces: usize,
    n_faces: usize,
    has_lambda: bool,
}

impl DofMap {
    pub fn new(mesh: &Mesh, has_lambda: bool) -> Self {
        let mut next = 0;
        let uhat = (0..mesh.n_faces())
            .map(|f| {
                if mesh.is_dirichlet(f) {
                    None
                } else {
                    let i = next;
                    next += 2;
                    Some(i)
                }
            })
            .collect();
        DofMap { uhat, n_uhat_faces: next / 2, n_faces: mesh.n_faces(), has_lambda }
    }

    /// Index of the x component of `û` on face `f`, if it is an unknown.
    pub fn uhat(&self, f: usize) -> Option<usize> {
        self.uhat[f]
    }

    pub fn phat(&self, f: usize) -> usize {
        2 * self.n_uhat_faces + f
    }

    pub fn lambda(&self) -> Option<usize> {
        self.has_lambda.then_some(2 * self.n_uhat_faces + self.n_faces)
    }

    pub fn has_lambda(&self) -> bool {
        self.has_lambda
    }

    pub fn n_uhat_faces(&self) -> usize {
        self.n_uhat_faces
    }

    pub fn n_faces(&self) -> usize {
        self.n_faces
    }

    pub fn n_uhat(&self) -> usize {
        2 * self.n_uhat_faces
    }

    pub fn dim(&self) -> usize {
        2 * self.n_uhat_faces + self.n_faces + usize::from(self.has_lambda)
    }

    /// Global index of local face slot `comp` (0, 1: `û` components, 2: `p̂`).
    pub fn slot(&self, f: usize, comp: usize) -> Option<usize> {
        match comp {
            0 | 1 => self.uhat[f].map(|i| i + comp),
            _ => Some(self.phat(f)),
        }
    }
}
