//! Discrete solution fields.

use crate::dofs::DofMap;
use crate::geom::Vec2;
use crate::mesh::Mesh;
use crate::voigt::VoigtTensor;

/// Cell fields `(L_V, u, p)` and face fields `(û, p̂)`, plus the optional
/// pressure multiplier.
///
/// `u_hat` has one entry per face. On Dirichlet faces it is not an unknown;
/// solvers store the datum there so exported fields are complete, and the
/// residuals always read the datum from the case instead.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionState {
    pub l: Vec<VoigtTensor>,
    pub u: Vec<Vec2>,
    pub p: Vec<f64>,
    pub u_hat: Vec<Vec2>,
    pub p_hat: Vec<f64>,
    pub lambda: Option<f64>,
}

impl SolutionState {
    pub fn zeros(mesh: &Mesh, with_lambda: bool) -> Self {
        SolutionState {
            l: vec![VoigtTensor::ZERO; mesh.n_cells()],
            u: vec![Vec2::ZERO; mesh.n_cells()],
            p: vec![0.0; mesh.n_cells()],
            u_hat: vec![Vec2::ZERO; mesh.n_faces()],
            p_hat: vec![0.0; mesh.n_faces()],
            lambda: with_lambda.then_some(0.0),
        }
    }

    pub fn matches(&self, mesh: &Mesh) -> bool {
        self.l.len() == mesh.n_cells()
            && self.u.len() == mesh.n_cells()
            && self.p.len() == mesh.n_cells()
            && self.u_hat.len() == mesh.n_faces()
            && self.p_hat.len() == mesh.n_faces()
    }

    /// Face unknowns packed in global order.
    pub fn face_vector(&self, dofs: &DofMap) -> Vec<f64> {
        let mut x = vec![0.0; dofs.dim()];
        for f in 0..dofs.n_faces() {
            if let Some(i) = dofs.uhat(f) {
                x[i] = self.u_hat[f].x;
                x[i + 1] = self.u_hat[f].y;
            }
            x[dofs.phat(f)] = self.p_hat[f];
        }
        if let Some(k) = dofs.lambda() {
            x[k] = self.lambda.unwrap_or(0.0);
        }
        x
    }

    /// Adds a packed face increment.
    pub fn add_face_vector(&mut self, dofs: &DofMap, dx: &[f64]) {
        for f in 0..dofs.n_faces() {
            if let Some(i) = dofs.uhat(f) {
                self.u_hat[f] += Vec2::new(dx[i], dx[i + 1]);
            }
            self.p_hat[f] += dx[dofs.phat(f)];
        }
        if let Some(k) = dofs.lambda() {
            self.lambda = Some(self.lambda.unwrap_or(0.0) + dx[k]);
        }
    }

    /// Overwrites the face unknowns from a packed vector.
    pub fn set_face_vector(&mut self, dofs: &DofMap, x: &[f64]) {
        for f in 0..dofs.n_faces() {
            if let Some(i) = dofs.uhat(f) {
                self.u_hat[f] = Vec2::new(x[i], x[i + 1]);
            }
            self.p_hat[f] = x[dofs.phat(f)];
        }
        self.lambda = dofs.lambda().map(|k| x[k]);
    }

    pub fn is_finite(&self) -> bool {
        self.l.iter().all(|l| l.0.iter().all(|v| v.is_finite()))
            && self.u.iter().all(|u| u.is_finite())
            && self.p.iter().all(|p| p.is_finite())
            && self.u_hat.iter().all(|u| u.is_finite())
            && self.p_hat.iter().all(|p| p.is_finite())
    }
}
