//! Sparse global systems: pattern construction, value accumulation, direct
//! solves and dense spectra for small matrices.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMat, SymbolicSparseColMat, Triplet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::multifrontal::{Numeric, Symbolic};

/// Column-compressed sparsity pattern built from groups of mutually
/// coupled indices (one group per cell).
pub fn pattern_from_groups<'a>(
    dim: usize,
    groups: impl Iterator<Item = &'a [usize]>,
    dense_index: Option<usize>,
) -> SymbolicSparseColMat<usize> {
    let mut cols: Vec<Vec<usize>> = vec![Vec::new(); dim];
    for g in groups {
        for &c in g {
            cols[c].extend_from_slice(g);
        }
    }
    if let Some(k) = dense_index {
        for (c, col) in cols.iter_mut().enumerate() {
            col.push(k);
            if c == k {
                col.extend(0..dim);
            }
        }
    }
    let mut col_ptr = Vec::with_capacity(dim + 1);
    let mut row_idx = Vec::new();
    col_ptr.push(0);
    for col in &mut cols {
        col.sort_unstable();
        col.dedup();
        row_idx.extend_from_slice(col);
        col_ptr.push(row_idx.len());
        *col = Vec::new();
    }
    SymbolicSparseColMat::new_checked(dim, dim, col_ptr, None, row_idx)
}

/// Square sparse matrix with fixed pattern plus right-hand side.
#[derive(Debug, Clone)]
pub struct SparseSystem {
    pub matrix: SparseColMat<usize, f64>,
    pub rhs: Vec<f64>,
    /// Index of the pressure multiplier row/column, if bordered. It must be
    /// the last unknown.
    pub lambda: Option<usize>,
    /// An unknown of the constant-pressure mode, pinned internally when a
    /// bordered system is solved.
    pub pin: Option<usize>,
}

impl SparseSystem {
    pub fn from_pattern(pattern: SymbolicSparseColMat<usize>, lambda: Option<usize>) -> Self {
        let nnz = pattern.row_idx().len();
        let dim = pattern.ncols();
        SparseSystem { matrix: SparseColMat::new(pattern, vec![0.0; nnz]), rhs: vec![0.0; dim], lambda, pin: None }
    }

    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)], rhs: Vec<f64>) -> Result<Self> {
        let t: Vec<Triplet<usize, usize, f64>> = triplets.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
        let matrix = SparseColMat::try_new_from_triplets(dim, dim, &t)
            .map_err(|e| Error::InvalidMesh(format!("bad triplets: {e:?}")))?;
        Ok(SparseSystem { matrix, rhs, lambda: None, pin: None })
    }

    pub fn dim(&self) -> usize {
        self.matrix.ncols()
    }

    /// Stored entries of the pattern, including explicit zeros.
    pub fn pattern_nnz(&self) -> usize {
        self.matrix.symbolic().row_idx().len()
    }

    /// Entry position of `(row, col)` in the value array.
    pub fn position(&self, row: usize, col: usize) -> Option<usize> {
        let sym = self.matrix.symbolic();
        let start = sym.col_ptr()[col];
        let rows = &sym.row_idx()[start..sym.col_ptr()[col + 1]];
        rows.binary_search(&row).ok().map(|k| start + k)
    }

    /// Accumulates into `(row, col)`; panics if outside the pattern.
    pub fn add(&mut self, row: usize, col: usize, v: f64) {
        let k = self.position(row, col).unwrap_or_else(|| panic!("entry ({row}, {col}) outside the sparsity pattern"));
        self.matrix.val_mut()[k] += v;
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.position(row, col).map_or(0.0, |k| self.matrix.val()[k])
    }

    pub fn clear(&mut self) {
        self.matrix.val_mut().fill(0.0);
        self.rhs.fill(0.0);
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let sym = self.matrix.symbolic();
        let vals = self.matrix.val();
        let mut out = Vec::with_capacity(vals.len());
        for c in 0..self.dim() {
            for k in sym.col_ptr()[c]..sym.col_ptr()[c + 1] {
                out.push((sym.row_idx()[k], c, vals[k]));
            }
        }
        out
    }

    /// Entries with `|a_ij| > rel_tol · max |a|`.
    pub fn count_nonzeros(&self, rel_tol: f64) -> usize {
        let vals = self.matrix.val();
        let max = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        vals.iter().filter(|v| v.abs() > rel_tol * max).count()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let sym = self.matrix.symbolic();
        let vals = self.matrix.val();
        let mut y = vec![0.0; self.dim()];
        for (c, &xc) in x.iter().enumerate() {
            for k in sym.col_ptr()[c]..sym.col_ptr()[c + 1] {
                y[sym.row_idx()[k]] += vals[k] * xc;
            }
        }
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.val().iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let sym = self.matrix.symbolic();
        let mut rows = vec![0.0; self.dim()];
        for (k, v) in self.matrix.val().iter().enumerate() {
            rows[sym.row_idx()[k]] += v.abs();
        }
        rows.into_iter().fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.dim();
        let mut m = Mat::<f64>::zeros(n, n);
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// Writes `row col value` lines (0-based), skipping exact zeros.
    pub fn write_coordinates(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        for (r, c, v) in self.triplets() {
            if v != 0.0 {
                writeln!(w, "{r} {c} {v:e}").map_err(|e| Error::io(path, e))?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Above this estimate of `‖A‖∞ ‖A⁻¹‖∞` the matrix is reported singular.
pub const SINGULAR_CONDITION: f64 = 1e13;

/// Systems up to this dimension are factored with row pivoting over the
/// whole matrix; larger ones use the multifrontal factorization.
pub const PIVOTED_LIMIT: usize = 20_000;

/// Direct sparse solver for the global systems. It keeps the symbolic
/// analysis between solves with an unchanged pattern.
///
/// Up to [`PIVOTED_LIMIT`] unknowns it uses an LU with partial pivoting;
/// larger systems use [`multifrontal`](crate::multifrontal), whose fill is
/// bounded by the symmetric pattern. Every solve is followed by up to three
/// steps of iterative refinement.
///
/// A bordered system `[K c; rᵀ d]` (multiplier last) is never factored as a
/// whole: its dense border would make the fill dense. The interior block
/// `K` is singular (constant pressure mode), so the solver factors
/// `M = K + s e eᵀ` with `e` the pinned unknown and recovers the exact
/// solution from a 2×2 system in `(eᵀx, λ)`.
pub struct LinearSolver {
    limit: usize,
    symbolic: Option<SymbolicLu<usize>>,
    multifrontal: Option<Arc<Symbolic>>,
    inner: Option<SymbolicSparseColMat<usize>>,
}

impl Default for LinearSolver {
    fn default() -> Self {
        LinearSolver { limit: PIVOTED_LIMIT, symbolic: None, multifrontal: None, inner: None }
    }
}

enum FactorKind {
    Pivoted(Box<Lu<usize, f64>>),
    Multifrontal(Numeric),
}

struct Factor<'a> {
    kind: FactorKind,
    matrix: &'a SparseColMat<usize, f64>,
}

impl Factor<'_> {
    fn solve_once(&self, b: &[f64]) -> Vec<f64> {
        match &self.kind {
            FactorKind::Pivoted(lu) => {
                let n = b.len();
                let rhs = Mat::<f64>::from_fn(n, 1, |i, _| b[i]);
                let x = lu.solve(&rhs);
                (0..n).map(|i| x[(i, 0)]).collect()
            }
            FactorKind::Multifrontal(num) => num.solve(b),
        }
    }

    /// Solve with iterative refinement against the factored matrix.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = self.solve_once(b);
        let target = 1e-15 * (1.0 + norm2(b));
        let mut ax = vec![0.0; b.len()];
        let mut best = f64::INFINITY;
        for _ in 0..3 {
            csc_matvec_into(self.matrix, &x, &mut ax);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
            let rn = norm2(&r);
            if rn <= target || rn >= 0.5 * best {
                break;
            }
            best = rn;
            let dx = self.solve_once(&r);
            for (xi, d) in x.iter_mut().zip(&dx) {
                *xi += d;
            }
        }
        x
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// The interior block of a bordered system with the pinned diagonal
/// shifted, plus the border.
struct Pinned {
    inner: SparseColMat<usize, f64>,
    col_c: Vec<f64>,
    row_r: Vec<f64>,
    d: f64,
    k: usize,
    scale: f64,
}

fn csc_matvec_into(a: &SparseColMat<usize, f64>, x: &[f64], y: &mut [f64]) {
    let sym = a.symbolic();
    let vals = a.val();
    y.fill(0.0);
    for (c, xc) in x.iter().enumerate() {
        if *xc == 0.0 {
            continue;
        }
        for p in sym.col_ptr()[c]..sym.col_ptr()[c + 1] {
            y[sym.row_idx()[p]] += vals[p] * xc;
        }
    }
}

impl LinearSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// A solver that switches to the multifrontal factorization above
    /// `limit` unknowns.
    pub fn with_limit(limit: usize) -> Self {
        LinearSolver { limit, ..Self::default() }
    }

    fn factor<'a>(&mut self, a: &'a SparseColMat<usize, f64>, a_norm: f64) -> Result<Factor<'a>> {
        let n = a.ncols();
        let kind = if n <= self.limit {
            let symbolic = match &self.symbolic {
                Some(s) => s.clone(),
                None => {
                    let s = SymbolicLu::try_new(a.symbolic()).map_err(|e| Error::Singular(format!("{e:?}")))?;
                    self.symbolic = Some(s.clone());
                    s
                }
            };
            let lu = Lu::try_new_with_symbolic(symbolic, a.as_ref()).map_err(|e| match e {
                LuError::SymbolicSingular { index } => {
                    Error::Singular(format!("zero pivot at elimination step {index}"))
                }
                LuError::Generic(e) => Error::Singular(format!("{e:?}")),
            })?;
            FactorKind::Pivoted(Box::new(lu))
        } else {
            let symbolic = match &self.multifrontal {
                Some(s) => s.clone(),
                None => {
                    let s = Arc::new(Symbolic::new(
                        &a.symbolic().to_owned().map_err(|e| Error::Singular(format!("{e:?}")))?,
                    )?);
                    self.multifrontal = Some(s.clone());
                    s
                }
            };
            FactorKind::Multifrontal(Numeric::factor(symbolic, a)?)
        };
        let f = Factor { kind, matrix: a };

        // Condition estimate from one solve with a fixed random right side.
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y = f.solve_once(&z);
        let cond = a_norm * inf_norm(&y) / inf_norm(&z);
        if !cond.is_finite() || cond > SINGULAR_CONDITION {
            let worst = (0..n).max_by(|&i, &j| y[i].abs().total_cmp(&y[j].abs())).unwrap_or(0);
            return Err(Error::Singular(format!(
                "condition estimate {cond:.3e}; largest null-space component at unknown {worst}"
            )));
        }
        Ok(f)
    }

    /// Solves `A x = b`. Fails on structurally or numerically singular
    /// matrices (condition estimate above [`SINGULAR_CONDITION`]) and when
    /// `‖A x − b‖₂ > 1e-10 (1 + ‖b‖₂)`.
    pub fn solve(&mut self, system: &SparseSystem) -> Result<Vec<f64>> {
        let x = match system.lambda {
            None => {
                let f = self.factor(&system.matrix, system.norm_inf())?;
                f.solve(&system.rhs)
            }
            Some(li) => self.solve_bordered(system, li)?,
        };
        let ax = system.matvec(&x);
        let r: Vec<f64> = ax.iter().zip(&system.rhs).map(|(a, b)| a - b).collect();
        let res = norm2(&r);
        let bound = 1e-10 * (1.0 + norm2(&system.rhs));
        if !(res <= bound) {
            return Err(Error::InaccurateSolve { residual: res, bound });
        }
        Ok(x)
    }

    fn pinned(&mut self, system: &SparseSystem, li: usize) -> Result<Pinned> {
        let n = system.dim();
        if li + 1 != n {
            return Err(Error::Config("the multiplier must be the last unknown".into()));
        }
        let m = n - 1;
        let sym = system.matrix.symbolic();
        let vals = system.matrix.val();
        let mut col_c = vec![0.0; m];
        let mut row_r = vec![0.0; m];
        let mut d = 0.0;
        for (r, c, v) in system.triplets() {
            match (r == li, c == li) {
                (true, true) => d += v,
                (true, false) => row_r[c] += v,
                (false, true) => col_c[r] += v,
                _ => {}
            }
        }
        let k = match system.pin {
            Some(k) if k < m => k,
            _ => (0..m).max_by(|&i, &j| col_c[i].total_cmp(&col_c[j])).unwrap_or(0),
        };

        if self.inner.is_none() {
            let mut col_ptr = Vec::with_capacity(m + 1);
            let mut row_idx = Vec::new();
            col_ptr.push(0);
            for c in 0..m {
                for p in sym.col_ptr()[c]..sym.col_ptr()[c + 1] {
                    if sym.row_idx()[p] < m {
                        row_idx.push(sym.row_idx()[p]);
                    }
                }
                col_ptr.push(row_idx.len());
            }
            self.inner = Some(SymbolicSparseColMat::new_checked(m, m, col_ptr, None, row_idx));
        }
        let inner = self.inner.clone().expect("inner pattern built above");
        let mut inner_vals = Vec::with_capacity(inner.row_idx().len());
        for c in 0..m {
            for p in sym.col_ptr()[c]..sym.col_ptr()[c + 1] {
                if sym.row_idx()[p] < m {
                    inner_vals.push(vals[p]);
                }
            }
        }
        let scale = system.max_abs().max(f64::MIN_POSITIVE);
        let mut mat = SparseColMat::new(inner, inner_vals);
        let kk = {
            let s = mat.symbolic();
            let start = s.col_ptr()[k];
            let rows = &s.row_idx()[start..s.col_ptr()[k + 1]];
            start
                + rows.binary_search(&k).map_err(|_| Error::Singular(format!("pinned unknown {k} has no diagonal")))?
        };
        mat.val_mut()[kk] += scale;
        Ok(Pinned { inner: mat, col_c, row_r, d, k, scale })
    }

    fn solve_bordered(&mut self, system: &SparseSystem, li: usize) -> Result<Vec<f64>> {
        let Pinned { inner, col_c, row_r, d, k, scale } = self.pinned(system, li)?;
        let m = inner.ncols();
        let f = self.factor(&inner, system.norm_inf() + scale)?;

        let y0 = f.solve(&system.rhs[..m]);
        let mut e = vec![0.0; m];
        e[k] = 1.0;
        let ye = f.solve(&e);
        let yc = f.solve(&col_c);
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        // μ (1 − s ye_k) + λ yc_k = y0_k
        // μ s rᵀye + λ (d − rᵀyc) = g − rᵀy0
        let (a11, a12, b1) = (1.0 - scale * ye[k], yc[k], y0[k]);
        let (a21, a22, b2) = (scale * dot(&row_r, &ye), d - dot(&row_r, &yc), system.rhs[li] - dot(&row_r, &y0));
        let det = a11 * a22 - a12 * a21;
        let size = (a11.abs() + a12.abs()) * (a21.abs() + a22.abs());
        if !(det.abs() > 1e-14 * size) {
            return Err(Error::Singular(
                "bordering block is singular; the multiplier row does not fix the null space".into(),
            ));
        }
        let mu = (b1 * a22 - a12 * b2) / det;
        let lambda = (a11 * b2 - a21 * b1) / det;
        let mut x: Vec<f64> = (0..m).map(|i| y0[i] + scale * mu * ye[i] - lambda * yc[i]).collect();
        x.push(lambda);
        Ok(x)
    }
}

/// One-shot direct solve, see [`LinearSolver::solve`].
pub fn solve_linear(system: &SparseSystem) -> Result<Vec<f64>> {
    LinearSolver::new().solve(system)
}

/// Eigenvalue summary of a dense eigensolve.
#[derive(Debug, Clone)]
pub struct Spectrum {
    /// `(re, im)` pairs.
    pub eigenvalues: Vec<(f64, f64)>,
    pub min_re: f64,
    pub max_re: f64,
    pub max_abs_im: f64,
    /// Fraction of eigenvalues with `|im| > im_tol`.
    pub complex_fraction: f64,
}

/// Default dimension cap for dense eigensolves.
pub const SPECTRUM_CAP: usize = 4096;

/// Imaginary parts at or below this are treated as round-off.
pub const SPECTRUM_IM_TOL: f64 = 1e-10;

/// All eigenvalues of the matrix, computed densely.
pub fn spectrum(system: &SparseSystem, cap: usize) -> Result<Spectrum> {
    let n = system.dim();
    if n > cap {
        return Err(Error::DimensionCap { dim: n, cap });
    }
    let dense = system.to_dense();
    let ev = dense.eigenvalues().map_err(|_| Error::EigenFailure)?;
    let eigenvalues: Vec<(f64, f64)> = ev.iter().map(|c| (c.re, c.im)).collect();
    Ok(summarize_spectrum(eigenvalues))
}

pub fn summarize_spectrum(eigenvalues: Vec<(f64, f64)>) -> Spectrum {
    let min_re = eigenvalues.iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
    let max_re = eigenvalues.iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
    let max_abs_im = eigenvalues.iter().map(|e| e.1.abs()).fold(0.0, f64::max);
    let n_complex = eigenvalues.iter().filter(|e| e.1.abs() > SPECTRUM_IM_TOL).count();
    let complex_fraction = if eigenvalues.is_empty() { 0.0 } else { n_complex as f64 / eigenvalues.len() as f64 };
    Spectrum { eigenvalues, min_re, max_re, max_abs_im, complex_fraction }
}
