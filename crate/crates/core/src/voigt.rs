//! Voigt kernels for symmetric 2×2 tensors stored as `[L11, L22, L12]`.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::geom::Vec2;

/// Symmetric tensor in Voigt storage `[11, 22, 12]`. The off-diagonal entry
/// is the tensor component itself, not an engineering (doubled) strain.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VoigtTensor(pub [f64; 3]);

impl VoigtTensor {
    pub const ZERO: VoigtTensor = VoigtTensor([0.0; 3]);

    pub fn from_dense(m: [[f64; 2]; 2]) -> Self {
        VoigtTensor([m[0][0], m[1][1], 0.5 * (m[0][1] + m[1][0])])
    }

    pub fn to_dense(self) -> [[f64; 2]; 2] {
        let [a, b, c] = self.0;
        [[a, c], [c, b]]
    }

    /// Dense tensor times vector.
    pub fn apply(self, n: Vec2) -> Vec2 {
        let [a, b, c] = self.0;
        Vec2::new(a * n.x + c * n.y, c * n.x + b * n.y)
    }

    pub fn trace(self) -> f64 {
        self.0[0] + self.0[1]
    }

    /// Squared Frobenius norm of the dense tensor (off-diagonal counted twice).
    pub fn frobenius_sq(self) -> f64 {
        let [a, b, c] = self.0;
        a * a + b * b + 2.0 * c * c
    }
}

impl Add for VoigtTensor {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        VoigtTensor([self.0[0] + o.0[0], self.0[1] + o.0[1], self.0[2] + o.0[2]])
    }
}

impl AddAssign for VoigtTensor {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl Sub for VoigtTensor {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        VoigtTensor([self.0[0] - o.0[0], self.0[1] - o.0[1], self.0[2] - o.0[2]])
    }
}

impl Mul<f64> for VoigtTensor {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        VoigtTensor([self.0[0] * s, self.0[1] * s, self.0[2] * s])
    }
}

impl Neg for VoigtTensor {
    type Output = Self;
    fn neg(self) -> Self {
        self * -1.0
    }
}

/// The 3×2 matrix `N_V(n)` with rows `[n1, 0]`, `[0, n2]`, `[n2, n1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalMatrix(pub [[f64; 2]; 3]);

impl NormalMatrix {
    /// `N_V v`.
    pub fn apply(&self, v: Vec2) -> VoigtTensor {
        let m = &self.0;
        VoigtTensor([m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y, m[2][0] * v.x + m[2][1] * v.y])
    }

    /// `N_Vᵀ l`.
    pub fn apply_transpose(&self, l: VoigtTensor) -> Vec2 {
        let m = &self.0;
        let l = l.0;
        Vec2::new(m[0][0] * l[0] + m[1][0] * l[1] + m[2][0] * l[2], m[0][1] * l[0] + m[1][1] * l[1] + m[2][1] * l[2])
    }
}

const UNIT_TOL: f64 = 1e-10;

/// Panics if `n` is not a unit vector.
pub fn normal_matrix(n: Vec2) -> NormalMatrix {
    assert!((n.norm() - 1.0).abs() <= UNIT_TOL, "normal ({}, {}) is not unit length", n.x, n.y);
    NormalMatrix([[n.x, 0.0], [0.0, n.y], [n.y, n.x]])
}

/// The constant `D_V = [[4/3, -2/3, 0], [-2/3, 4/3, 0], [0, 0, 1]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviatoricOperator(pub [[f64; 3]; 3]);

pub const DV: DeviatoricOperator =
    DeviatoricOperator([[4.0 / 3.0, -2.0 / 3.0, 0.0], [-2.0 / 3.0, 4.0 / 3.0, 0.0], [0.0, 0.0, 1.0]]);

impl DeviatoricOperator {
    pub fn apply(&self, v: VoigtTensor) -> VoigtTensor {
        let m = &self.0;
        let v = v.0;
        VoigtTensor(std::array::from_fn(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2]))
    }
}

/// Only two space dimensions are supported.
pub fn deviatoric_operator(n_sd: usize) -> Result<DeviatoricOperator> {
    if n_sd == 2 {
        Ok(DV)
    } else {
        Err(Error::Config(format!("only 2D Voigt kernels are available, got n_sd = {n_sd}")))
    }
}

/// `D_V N_V(n)` as a 3×2 matrix: maps a face velocity to its strain-rate
/// contribution.
pub fn dn_matrix(n: Vec2) -> [[f64; 2]; 3] {
    let c = 2.0 / 3.0;
    [[2.0 * n.x - c * n.x, -c * n.y], [-c * n.x, 2.0 * n.y - c * n.y], [n.y, n.x]]
}

/// `D_V N_V(n) v`, the Voigt image of `v nᵀ + n vᵀ - (2/3)(n·v) I`.
pub fn strain_rate_contribution(n: Vec2, v: Vec2) -> VoigtTensor {
    DV.apply(normal_matrix(n).apply(v))
}

/// `ν N_V(n)ᵀ L_V`, i.e. `ν L n`.
pub fn traction(l: VoigtTensor, n: Vec2, nu: f64) -> Vec2 {
    normal_matrix(n).apply_transpose(l) * nu
}
