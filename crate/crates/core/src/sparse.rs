//! Compressed sparse row matrices and a conjugate gradient solver.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::sqrt;
use crate::{Error, Result};

/// CSR matrix with sorted, duplicate-free column indices in every row.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Build from raw CSR arrays, checking the structural invariants.
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_ptr: Vec<usize>,
        col_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_ptr.len() != nrows + 1 || row_ptr[0] != 0 {
            return Err(Error::param("row_ptr must have nrows + 1 entries starting at 0"));
        }
        if row_ptr.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::param("row_ptr must be nondecreasing"));
        }
        let nnz = row_ptr[nrows];
        if col_idx.len() != nnz || values.len() != nnz {
            return Err(Error::param("col_idx and values must have row_ptr[nrows] entries"));
        }
        for r in 0..nrows {
            let cols = &col_idx[row_ptr[r]..row_ptr[r + 1]];
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::param(format!("row {r}: column indices not strictly increasing")));
            }
            if cols.last().is_some_and(|&c| c >= ncols) {
                return Err(Error::param(format!("row {r}: column index out of range")));
            }
        }
        Ok(SparseMatrix { nrows, ncols, row_ptr, col_idx, values })
    }

    /// Zero matrix with the given per-row column sets (each sorted and deduplicated here).
    pub fn from_pattern(ncols: usize, mut rows: Vec<Vec<usize>>) -> Self {
        let nrows = rows.len();
        let mut row_ptr = Vec::with_capacity(nrows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        for row in rows.iter_mut() {
            row.sort_unstable();
            row.dedup();
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        SparseMatrix { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            nrows: n,
            ncols: n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// Diagonal matrix.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::identity(diag.len());
        m.values.copy_from_slice(diag);
        m
    }

    /// Dense row-major input; exact zeros are dropped.
    pub fn from_dense(nrows: usize, ncols: usize, dense: &[f64]) -> Self {
        assert_eq!(dense.len(), nrows * ncols);
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for r in 0..nrows {
            for c in 0..ncols {
                let v = dense[r * ncols + c];
                if v != 0.0 {
                    col_idx.push(c);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_ptr(&self) -> &[usize] {
        &self.row_ptr
    }

    pub fn col_idx(&self) -> &[usize] {
        &self.col_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(column, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    /// Entry `(r, c)`, zero if not stored.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    /// Add `v` to a stored entry. Panics if `(r, c)` is not in the pattern.
    #[inline]
    pub fn add_to(&mut self, r: usize, c: usize, v: f64) {
        let start = self.row_ptr[r];
        let k = self.col_idx[start..self.row_ptr[r + 1]]
            .binary_search(&c)
            .expect("entry outside sparsity pattern");
        self.values[start + k] += v;
    }

    /// Zero all stored values, keeping the pattern.
    pub fn clear_values(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.nrows.min(self.ncols)).map(|r| self.get(r, r)).collect()
    }

    /// `alpha·self + beta·other`; the result's pattern is the union of both patterns.
    pub fn lin_comb(&self, alpha: f64, other: &SparseMatrix, beta: f64) -> Result<SparseMatrix> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::param("lin_comb: dimension mismatch"));
        }
        if self.row_ptr == other.row_ptr && self.col_idx == other.col_idx {
            let values = self.values.iter().zip(&other.values).map(|(a, b)| alpha * a + beta * b).collect();
            return Ok(SparseMatrix { values, ..self.clone() });
        }
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for r in 0..self.nrows {
            let mut a = self.row(r).peekable();
            let mut b = other.row(r).peekable();
            loop {
                let (c, v) = match (a.peek().copied(), b.peek().copied()) {
                    (Some((ca, va)), Some((cb, vb))) if ca == cb => {
                        a.next();
                        b.next();
                        (ca, alpha * va + beta * vb)
                    }
                    (Some((ca, va)), Some((cb, _))) if ca < cb => {
                        a.next();
                        (ca, alpha * va)
                    }
                    (_, Some((cb, vb))) => {
                        b.next();
                        (cb, beta * vb)
                    }
                    (Some((ca, va)), None) => {
                        a.next();
                        (ca, alpha * va)
                    }
                    (None, None) => break,
                };
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(SparseMatrix { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values })
    }

    /// Principal submatrix on `keep` (sorted ascending).
    pub fn principal_submatrix(&self, keep: &[usize]) -> SparseMatrix {
        let mut map = vec![usize::MAX; self.ncols];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut row_ptr = Vec::with_capacity(keep.len() + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for &r in keep {
            for (c, v) in self.row(r) {
                if map[c] != usize::MAX {
                    col_idx.push(map[c]);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        SparseMatrix { nrows: keep.len(), ncols: keep.len(), row_ptr, col_idx, values }
    }

    /// `y = A x`.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.nrows];
        self.spmv_into(x, &mut y)?;
        Ok(y)
    }

    /// `y = A x` into a caller-provided buffer.
    pub fn spmv_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        if x.len() != self.ncols || y.len() != self.nrows {
            return Err(Error::param(format!(
                "spmv: {}x{} matrix with x of length {} and y of length {}",
                self.nrows,
                self.ncols,
                x.len(),
                y.len()
            )));
        }
        self.spmv_unchecked(x, y);
        Ok(())
    }

    #[inline]
    fn spmv_unchecked(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let (s, e) = (self.row_ptr[r], self.row_ptr[r + 1]);
            let mut acc = 0.0;
            for k in s..e {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yr = acc;
        }
    }

    /// `xᵀ A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.len() != self.nrows {
            return Err(Error::param("bilinear: dimension mismatch"));
        }
        Ok(dot(x, &self.spmv(y)?))
    }

    /// Maximum of `|a_ij - a_ji|` relative to the largest entry magnitude.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for r in 0..self.nrows {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst / scale
    }
}

/// Outcome of a conjugate gradient solve.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖b - Ax‖₂ / ‖b‖₂` at exit.
    pub final_residual: f64,
    /// `‖b - Ax₀‖₂ / ‖b‖₂` for the initial guess.
    pub initial_residual: f64,
    pub converged: bool,
}

/// Conjugate gradient settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Relative residual target.
    pub tol: f64,
    /// Iteration cap; `None` means `10·n`.
    pub max_iter: Option<usize>,
    /// Use diagonal (Jacobi) preconditioning.
    pub jacobi: bool,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions { tol: 1e-10, max_iter: None, jacobi: false }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm2(a: &[f64]) -> f64 {
    sqrt(dot(a, a))
}

/// Solve `A x = b` for SPD `A` from a zero initial guess.
///
/// Non-convergence within `max_iter` is reported through
/// [`SolveReport::converged`], not as an error.
pub fn cg_solve(a: &SparseMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, SolveReport)> {
    let mut x = vec![0.0; b.len()];
    let opts = CgOptions { tol, max_iter: Some(max_iter), jacobi: false };
    let report = cg_solve_in_place(a, b, &mut x, &opts)?;
    Ok((x, report))
}

/// Conjugate gradients starting from the contents of `x`.
///
/// Errors on dimension mismatch, non-finite right-hand side, non-positive
/// tolerance, or a non-positive curvature `pᵀAp` (the matrix is not SPD).
pub fn cg_solve_in_place(a: &SparseMatrix, b: &[f64], x: &mut [f64], opts: &CgOptions) -> Result<SolveReport> {
    let n = a.nrows();
    if a.ncols() != n || b.len() != n || x.len() != n {
        return Err(Error::param(format!(
            "cg: {}x{} matrix, rhs of length {}, guess of length {}",
            a.nrows(),
            a.ncols(),
            b.len(),
            x.len()
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::param("cg: tolerance must be positive"));
    }
    if let Some(i) = b.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { index: i });
    }
    let max_iter = opts.max_iter.unwrap_or(10 * n.max(1));

    let bnorm = norm2(b);
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(SolveReport { iterations: 0, final_residual: 0.0, initial_residual: 0.0, converged: true });
    }

    let inv_diag: Option<Vec<f64>> = if opts.jacobi {
        let d = a.diagonal();
        if d.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Solver {
                context: "jacobi preconditioner: non-positive diagonal",
                report: SolveReport::default(),
            });
        }
        Some(d.iter().map(|v| 1.0 / v).collect())
    } else {
        None
    };

    let mut r = vec![0.0; n];
    a.spmv_unchecked(x, &mut r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let initial = norm2(&r) / bnorm;
    let mut report = SolveReport { iterations: 0, final_residual: initial, initial_residual: initial, converged: initial <= opts.tol };
    if report.converged {
        return Ok(report);
    }

    let precondition = |r: &[f64], z: &mut [f64]| match &inv_diag {
        Some(d) => z.iter_mut().zip(r.iter().zip(d)).for_each(|(zi, (ri, di))| *zi = ri * di),
        None => z.copy_from_slice(r),
    };
    let mut z = vec![0.0; n];
    precondition(&r, &mut z);
    let mut p = z.clone();
    let mut ap = vec![0.0; n];
    let mut rz = dot(&r, &z);

    while report.iterations < max_iter {
        a.spmv_unchecked(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            if dot(&p, &p) < f64::MIN_POSITIVE {
                // Search direction underflowed: stagnation, not indefiniteness.
                break;
            }
            return Err(Error::Solver { context: "matrix is not positive definite", report });
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        report.iterations += 1;
        report.final_residual = norm2(&r) / bnorm;
        if report.final_residual <= opts.tol {
            report.converged = true;
            break;
        }
        precondition(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Ok(report)
}
