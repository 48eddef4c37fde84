//! Supernodal multifrontal LU for matrices with a (nearly) symmetric
//! sparsity pattern.
//!
//! The fill-reducing ordering and the supernode structure come from a
//! symbolic Cholesky analysis of the symmetrised pattern, so the factors
//! only hold the fill of `A + Aᵀ` rather than the much larger bound that
//! row pivoting over the whole matrix requires. Pivoting is restricted to
//! the diagonal block of each supernode, which keeps the structure fixed;
//! the caller checks the residual of every solve.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::lu::partial_pivoting::factor::{lu_in_place, lu_in_place_scratch, PartialPivLuParams};
use faer::linalg::matmul::matmul;
use faer::linalg::triangular_solve::{
    solve_lower_triangular_in_place, solve_unit_lower_triangular_in_place, solve_upper_triangular_in_place,
};
use faer::sparse::linalg::cholesky::{
    factorize_symbolic_cholesky, CholeskySymbolicParams, SymbolicCholeskyRaw, SymmetricOrdering,
};
use faer::sparse::linalg::SupernodalThreshold;
use faer::sparse::{SparseColMat, SymbolicSparseColMat};
use faer::{Accum, Mat, Par, Side, Spec};

use std::sync::Arc;

use crate::error::{Error, Result};

/// Ordering, supernodes and the assembly tree of one sparsity pattern.
#[derive(Debug, Clone)]
pub struct Symbolic {
    n: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    inv: Vec<usize>,
    /// Supernode `s` owns columns `begin[s]..begin[s + 1]`.
    begin: Vec<usize>,
    /// Off-diagonal row indices of each supernode, ascending.
    rows: Vec<Vec<usize>>,
    /// Children of each supernode in the assembly tree.
    children: Vec<Vec<usize>>,
    nnz_pattern: usize,
}

impl Symbolic {
    pub fn new(pattern: &SymbolicSparseColMat<usize>) -> Result<Symbolic> {
        let n = pattern.ncols();
        let sym = symmetrised(pattern);
        let params = CholeskySymbolicParams {
            supernodal_flop_ratio_threshold: SupernodalThreshold::FORCE_SUPERNODAL,
            ..Default::default()
        };
        let chol = factorize_symbolic_cholesky(sym.as_ref(), Side::Lower, SymmetricOrdering::Amd, params)
            .map_err(|e| Error::Singular(format!("symbolic analysis failed: {e:?}")))?;
        let (perm, inv) = match chol.perm() {
            Some(p) => {
                let (fwd, inv) = p.arrays();
                (fwd.to_vec(), inv.to_vec())
            }
            None => ((0..n).collect(), (0..n).collect()),
        };
        let SymbolicCholeskyRaw::Supernodal(sn) = chol.raw() else {
            return Err(Error::Singular("expected a supernodal symbolic factorization".into()));
        };
        let n_super = sn.n_supernodes();
        let mut begin: Vec<usize> = sn.supernode_begin().to_vec();
        begin.push(n);
        let rows: Vec<Vec<usize>> = (0..n_super).map(|s| sn.supernode(s).pattern().to_vec()).collect();
        let mut owner = vec![0usize; n];
        for s in 0..n_super {
            owner[begin[s]..begin[s + 1]].fill(s);
        }
        let mut children = vec![Vec::new(); n_super];
        for s in 0..n_super {
            if let Some(&first) = rows[s].first() {
                children[owner[first]].push(s);
            }
        }
        Ok(Symbolic { n, perm, inv, begin, rows, children, nnz_pattern: pattern.row_idx().len() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of the original pattern the analysis was built for.
    pub fn pattern_nnz(&self) -> usize {
        self.nnz_pattern
    }

    /// Entries of `L + U` (diagonal blocks counted once).
    pub fn factor_nnz(&self) -> usize {
        (0..self.rows.len())
            .map(|s| {
                let ns = self.begin[s + 1] - self.begin[s];
                ns * ns + 2 * ns * self.rows[s].len()
            })
            .sum()
    }
}

/// Pattern of `A + Aᵀ` with the full diagonal.
fn symmetrised(pattern: &SymbolicSparseColMat<usize>) -> SymbolicSparseColMat<usize> {
    let n = pattern.ncols();
    let mut cols: Vec<Vec<usize>> = (0..n).map(|c| vec![c]).collect();
    for c in 0..n {
        for &r in &pattern.row_idx()[pattern.col_ptr()[c]..pattern.col_ptr()[c + 1]] {
            cols[c].push(r);
            cols[r].push(c);
        }
    }
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut row_idx = Vec::new();
    col_ptr.push(0);
    for col in &mut cols {
        col.sort_unstable();
        col.dedup();
        row_idx.extend_from_slice(col);
        col_ptr.push(row_idx.len());
        *col = Vec::new();
    }
    SymbolicSparseColMat::new_checked(n, n, col_ptr, None, row_idx)
}

struct SupernodeFactor {
    /// Packed `L11` (unit, below the diagonal) and `U11`.
    lu11: Mat<f64>,
    /// Row `i` of the pivoted block is row `pivot[i]` of the original block.
    pivot: Vec<usize>,
    l21: Mat<f64>,
    u12: Mat<f64>,
}

/// Numerical factors for one matrix.
pub struct Numeric {
    symbolic: Arc<Symbolic>,
    factors: Vec<SupernodeFactor>,
}

/// Permuted copy of `a` in both column and row compressed form.
struct Permuted {
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<f64>,
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    row_vals: Vec<f64>,
}

fn permute(a: &SparseColMat<usize, f64>, sym: &Symbolic) -> Permuted {
    let n = sym.n;
    let s = a.symbolic();
    let vals = a.val();
    let mut col_ptr = vec![0usize; n + 1];
    let mut row_ptr = vec![0usize; n + 1];
    for c in 0..n {
        for p in s.col_ptr()[c]..s.col_ptr()[c + 1] {
            col_ptr[sym.inv[c] + 1] += 1;
            row_ptr[sym.inv[s.row_idx()[p]] + 1] += 1;
        }
    }
    for i in 0..n {
        col_ptr[i + 1] += col_ptr[i];
        row_ptr[i + 1] += row_ptr[i];
    }
    let nnz = col_ptr[n];
    let (mut col_rows, mut col_vals) = (vec![0usize; nnz], vec![0.0; nnz]);
    let (mut row_cols, mut row_vals) = (vec![0usize; nnz], vec![0.0; nnz]);
    let (mut cn, mut rn) = (col_ptr.clone(), row_ptr.clone());
    for c in 0..n {
        let cp = sym.inv[c];
        for p in s.col_ptr()[c]..s.col_ptr()[c + 1] {
            let rp = sym.inv[s.row_idx()[p]];
            col_rows[cn[cp]] = rp;
            col_vals[cn[cp]] = vals[p];
            cn[cp] += 1;
            row_cols[rn[rp]] = cp;
            row_vals[rn[rp]] = vals[p];
            rn[rp] += 1;
        }
    }
    Permuted { col_ptr, col_rows, col_vals, row_ptr, row_cols, row_vals }
}

impl Numeric {
    /// Factors `a`, whose pattern must be contained in the one `symbolic`
    /// was built from.
    pub fn factor(symbolic: Arc<Symbolic>, a: &SparseColMat<usize, f64>) -> Result<Numeric> {
        let n = symbolic.n;
        if a.ncols() != n || a.nrows() != n {
            return Err(Error::Config(format!("matrix is {}×{}, analysis is for {n}", a.nrows(), a.ncols())));
        }
        let ap = permute(a, &symbolic);
        let n_super = symbolic.rows.len();
        let mut updates: Vec<Option<Mat<f64>>> = (0..n_super).map(|_| None).collect();
        let mut factors = Vec::with_capacity(n_super);
        let mut loc = vec![usize::MAX; n];
        let scale = a.val().iter().fold(0.0f64, |m, v| m.max(v.abs()));

        for s in 0..n_super {
            let (b, e) = (symbolic.begin[s], symbolic.begin[s + 1]);
            let ns = e - b;
            let rows = &symbolic.rows[s];
            let nf = ns + rows.len();
            for k in 0..ns {
                loc[b + k] = k;
            }
            for (k, &r) in rows.iter().enumerate() {
                loc[r] = ns + k;
            }

            let mut front = Mat::<f64>::zeros(nf, nf);
            for j in b..e {
                for p in ap.col_ptr[j]..ap.col_ptr[j + 1] {
                    let i = ap.col_rows[p];
                    if i >= b {
                        front[(loc[i], j - b)] += ap.col_vals[p];
                    }
                }
                for p in ap.row_ptr[j]..ap.row_ptr[j + 1] {
                    let c = ap.row_cols[p];
                    if c >= e {
                        front[(j - b, loc[c])] += ap.row_vals[p];
                    }
                }
            }
            for &c in &symbolic.children[s] {
                let upd = updates[c].take().expect("child update computed before its parent");
                let crow = &symbolic.rows[c];
                for (q, &gc) in crow.iter().enumerate() {
                    let lc = loc[gc];
                    for (p, &gr) in crow.iter().enumerate() {
                        front[(loc[gr], lc)] += upd[(p, q)];
                    }
                }
            }

            let mut lu11 = front.as_ref().submatrix(0, 0, ns, ns).to_owned();
            let mut fwd = vec![0usize; ns];
            let mut inv = vec![0usize; ns];
            {
                let params: Spec<PartialPivLuParams, f64> = Default::default();
                let mut mem = MemBuffer::new(lu_in_place_scratch::<usize, f64>(ns, ns, Par::Seq, params));
                let stack = MemStack::new(&mut mem);
                lu_in_place(lu11.as_mut(), &mut fwd, &mut inv, Par::Seq, stack, params);
            }
            for k in 0..ns {
                let d = lu11[(k, k)];
                if !d.is_finite() || d.abs() <= 1e-14 * scale {
                    return Err(Error::Singular(format!(
                        "pivot {d:e} in supernode {s} (unknown {})",
                        symbolic.perm[b + fwd[k]]
                    )));
                }
            }
            let r = rows.len();
            let mut u12 = Mat::<f64>::zeros(ns, r);
            for q in 0..r {
                for i in 0..ns {
                    u12[(i, q)] = front[(fwd[i], ns + q)];
                }
            }
            solve_unit_lower_triangular_in_place(lu11.as_ref(), u12.as_mut(), Par::Seq);
            let mut l21 = front.as_ref().submatrix(ns, 0, r, ns).to_owned();
            solve_lower_triangular_in_place(lu11.as_ref().transpose(), l21.as_mut().transpose_mut(), Par::Seq);
            if r > 0 {
                let mut upd = front.as_ref().submatrix(ns, ns, r, r).to_owned();
                matmul(upd.as_mut(), Accum::Add, l21.as_ref(), u12.as_ref(), -1.0, Par::Seq);
                updates[s] = Some(upd);
            }
            drop(front);
            for k in b..e {
                loc[k] = usize::MAX;
            }
            for &rr in rows {
                loc[rr] = usize::MAX;
            }
            factors.push(SupernodeFactor { lu11, pivot: fwd, l21, u12 });
        }
        Ok(Numeric { symbolic, factors })
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let sym = &*self.symbolic;
        let n = sym.n;
        let mut y: Vec<f64> = (0..n).map(|i| b[sym.perm[i]]).collect();
        for (s, f) in self.factors.iter().enumerate() {
            let (b0, e0) = (sym.begin[s], sym.begin[s + 1]);
            let ns = e0 - b0;
            let mut ys = Mat::<f64>::from_fn(ns, 1, |i, _| y[b0 + f.pivot[i]]);
            solve_unit_lower_triangular_in_place(f.lu11.as_ref(), ys.as_mut(), Par::Seq);
            for i in 0..ns {
                y[b0 + i] = ys[(i, 0)];
            }
            for (p, &r) in sym.rows[s].iter().enumerate() {
                let mut acc = 0.0;
                for i in 0..ns {
                    acc += f.l21[(p, i)] * ys[(i, 0)];
                }
                y[r] -= acc;
            }
        }
        for (s, f) in self.factors.iter().enumerate().rev() {
            let (b0, e0) = (sym.begin[s], sym.begin[s + 1]);
            let ns = e0 - b0;
            let rows = &sym.rows[s];
            let mut xs = Mat::<f64>::from_fn(ns, 1, |i, _| y[b0 + i]);
            for (q, &r) in rows.iter().enumerate() {
                let xr = y[r];
                if xr != 0.0 {
                    for i in 0..ns {
                        xs[(i, 0)] -= f.u12[(i, q)] * xr;
                    }
                }
            }
            solve_upper_triangular_in_place(f.lu11.as_ref(), xs.as_mut(), Par::Seq);
            for i in 0..ns {
                y[b0 + i] = xs[(i, 0)];
            }
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[sym.perm[i]] = y[i];
        }
        x
    }
}
