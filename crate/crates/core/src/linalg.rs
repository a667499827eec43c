//! Sparse symmetric storage, a Jacobi-preconditioned conjugate gradient, and
//! condition-number estimation.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    /// The smallest-eigenvalue estimate came out non-positive; the operator is
    /// not positive definite on the requested block.
    #[error("smallest eigenvalue estimate {0:.3e} is not positive")]
    NonPositive(f64),
}

/// Anything that can apply a symmetric linear map; the solvers only need
/// matrix-vector products and the diagonal (for Jacobi preconditioning).
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn diagonal(&self) -> Vec<f64>;
}

/// Triplet (COO) accumulator. Duplicate entries are summed when compressing;
/// the stable sort keeps the accumulation order deterministic.
#[derive(Clone, Debug, Default)]
pub struct Triplets {
    n: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(n: usize) -> Self {
        Triplets {
            n,
            entries: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn push(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.n);
        self.entries.push((i, j, v));
    }

    /// Push `(i, j, v)` and `(j, i, v)` (skips the duplicate when `i == j`).
    pub fn push_sym(&mut self, i: usize, j: usize, v: f64) {
        self.push(i, j, v);
        if i != j {
            self.push(j, i, v);
        }
    }

    /// Append `scale * other`.
    pub fn add_scaled(&mut self, other: &Triplets, scale: f64) {
        debug_assert_eq!(self.n, other.n);
        self.entries
            .extend(other.entries.iter().map(|&(i, j, v)| (i, j, scale * v)));
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// `y = A x` computed directly from the triplets.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    /// Row sums, `A * ones`.
    pub fn row_sums(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for &(i, _, v) in &self.entries {
            y[i] += v;
        }
        y
    }

    /// Value at `(i, j)` after summing duplicates (slow; for tests).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries
            .iter()
            .filter(|&&(r, c, _)| r == i && c == j)
            .map(|&(_, _, v)| v)
            .sum()
    }

    pub fn to_csr(&self) -> CsrMatrix {
        CsrMatrix::from_triplets(self)
    }
}

/// Compressed sparse row matrix with sorted, unique column indices per row.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_triplets(t: &Triplets) -> Self {
        let mut order: Vec<usize> = (0..t.entries.len()).collect();
        // Stable sort: duplicates stay in insertion order and are summed
        // left to right, so the compression is bit-reproducible.
        order.sort_by_key(|&k| (t.entries[k].0, t.entries[k].1));

        let mut row_ptr = vec![0usize; t.n + 1];
        let mut cols = Vec::with_capacity(t.entries.len());
        let mut vals: Vec<f64> = Vec::with_capacity(t.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for &k in &order {
            let (i, j, v) = t.entries[k];
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                row_ptr[i + 1] += 1;
                cols.push(j);
                vals.push(v);
                last = Some((i, j));
            }
        }
        for i in 0..t.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n: t.n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Triplets::new(n);
        for i in 0..n {
            t.push(i, i, 1.0);
        }
        t.to_csr()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.vals[span].iter().copied())
    }

    /// Entry `(i, j)`; zero if not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[span.clone()].binary_search(&j) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for i in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            y[i] = acc;
        }
    }

    /// Relative symmetry defect `||A - A^T||_F / ||A||_F`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                den += v * v;
                let d = v - self.get(j, i);
                num += d * d;
            }
        }
        if den == 0.0 {
            0.0
        } else {
            (num / den).sqrt()
        }
    }

    /// Submatrix on the rows/columns flagged in `keep`, with the index map
    /// from new to old indices.
    pub fn restrict(&self, keep: &[bool]) -> (CsrMatrix, Vec<usize>) {
        assert_eq!(keep.len(), self.n);
        let old_of_new: Vec<usize> = (0..self.n).filter(|&i| keep[i]).collect();
        let mut new_of_old = vec![usize::MAX; self.n];
        for (new, &old) in old_of_new.iter().enumerate() {
            new_of_old[old] = new;
        }
        let mut t = Triplets::new(old_of_new.len());
        for &old_i in &old_of_new {
            for (j, v) in self.row(old_i) {
                if keep[j] {
                    t.push(new_of_old[old_i], new_of_old[j], v);
                }
            }
        }
        (t.to_csr(), old_of_new)
    }

    /// Dense copy (for small oracle computations).
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out[i][j] = v;
            }
        }
        out
    }
}

impl LinearOperator for CsrMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y);
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

/// Result of a conjugate-gradient solve.
#[derive(Clone, Debug)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual `||Ax - b|| / ||b||`.
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Jacobi-preconditioned conjugate gradient from a zero initial guess.
///
/// Returns `x` with `||Ax - b||_2 <= tol * ||b||_2`. The iteration is
/// sequential with a fixed reduction order, so results are bit-reproducible.
/// In debug builds every step asserts positive curvature `p·Ap > 0`, the
/// computable equivalent of the monotone decay of the CG energy.
pub fn cg_solve<A: LinearOperator + ?Sized>(
    a: &A,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgSolution, LinalgError> {
    let n = a.dim();
    assert_eq!(b.len(), n);
    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(CgSolution {
            x: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
        });
    }
    let diag = a.diagonal();
    let inv_diag: Vec<f64> = diag
        .iter()
        .map(|&d| if d.abs() > 0.0 { 1.0 / d } else { 1.0 })
        .collect();

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];

    for iter in 1..=max_iter {
        a.apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        // Non-positive curvature means the operator is not positive definite;
        // report it instead of iterating into garbage.
        if pap <= 0.0 {
            return Err(LinalgError::NoConvergence {
                iterations: iter,
                residual: norm(&r) / b_norm,
            });
        }
        let alpha = rz / pap;
        // The CG energy 1/2 x'Ax - b'x drops by alpha*rz/2 every step; with
        // positive curvature this is the monotone quantity of the iteration.
        debug_assert!(alpha * rz >= 0.0, "CG energy increased at iteration {iter}");
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = norm(&r) / b_norm;
        if res <= tol {
            return Ok(CgSolution {
                x,
                iterations: iter,
                residual: res,
            });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(LinalgError::NoConvergence {
        iterations: max_iter,
        residual: norm(&r) / b_norm,
    })
}

/// Deterministic pseudo-random start vector for the eigenvalue iterations.
fn seed_vector(n: usize) -> Vec<f64> {
    let mut state = 0x9e3779b97f4a7c15u64;
    (0..n)
        .map(|_| {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            // Map the top bits to (-1, 1).
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
        .collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let nrm = norm(v);
    if nrm > 0.0 {
        for x in v.iter_mut() {
            *x /= nrm;
        }
    }
    nrm
}

/// Largest eigenvalue of a symmetric operator by power iteration
/// (relative change below `1e-6`).
pub fn largest_eigenvalue<A: LinearOperator + ?Sized>(a: &A) -> Result<f64, LinalgError> {
    let n = a.dim();
    let mut v = seed_vector(n);
    normalize(&mut v);
    let mut av = vec![0.0; n];
    let mut lambda = 0.0;
    for iter in 1..=100_000 {
        a.apply(&v, &mut av);
        let next = dot(&v, &av);
        let delta = (next - lambda).abs();
        lambda = next;
        std::mem::swap(&mut v, &mut av);
        if normalize(&mut v) == 0.0 {
            return Ok(0.0);
        }
        if iter > 2 && delta <= 1e-6 * lambda.abs().max(f64::MIN_POSITIVE) {
            return Ok(lambda);
        }
    }
    Err(LinalgError::NoConvergence {
        iterations: 100_000,
        residual: f64::NAN,
    })
}

/// Smallest eigenvalue by inverse iteration; every step solves with CG.
pub fn smallest_eigenvalue<A: LinearOperator + ?Sized>(a: &A) -> Result<f64, LinalgError> {
    let n = a.dim();
    let mut v = seed_vector(n);
    normalize(&mut v);
    let mut av = vec![0.0; n];
    let mut lambda = f64::INFINITY;
    let inner_max = 200 * n.max(50);
    for _outer in 1..=300 {
        let sol = cg_solve(a, &v, 1e-10, inner_max)?;
        v = sol.x;
        if normalize(&mut v) == 0.0 {
            return Err(LinalgError::NonPositive(0.0));
        }
        a.apply(&v, &mut av);
        let next = dot(&v, &av);
        let delta = (next - lambda).abs();
        lambda = next;
        if delta <= 1e-6 * lambda.abs().max(f64::MIN_POSITIVE) {
            if lambda <= 0.0 {
                return Err(LinalgError::NonPositive(lambda));
            }
            return Ok(lambda);
        }
    }
    Err(LinalgError::NoConvergence {
        iterations: 300,
        residual: f64::NAN,
    })
}

/// Condition number `lambda_max / lambda_min` of the block of `a` selected by
/// the `active` mask (identity rows on inactive nodes would otherwise clamp
/// the spectrum near 1).
pub fn cond_estimate(a: &CsrMatrix, active: &[bool]) -> Result<f64, LinalgError> {
    let (sub, _) = a.restrict(active);
    cond_estimate_op(&sub)
}

/// Condition number of a positive definite operator.
pub fn cond_estimate_op<A: LinearOperator + ?Sized>(a: &A) -> Result<f64, LinalgError> {
    let lambda_max = largest_eigenvalue(a)?;
    let lambda_min = smallest_eigenvalue(a)?;
    Ok(lambda_max / lambda_min)
}

/// Condition number of a small dense symmetric (possibly indefinite) matrix:
/// `max|lambda| / min|lambda|`, with the largest magnitude from power
/// iteration and the smallest from LU-backed inverse iteration.
pub fn cond_estimate_dense(a: &CsrMatrix) -> Result<f64, LinalgError> {
    let n = a.n();
    let abs_max = {
        let mut v = seed_vector(n);
        normalize(&mut v);
        let mut av = vec![0.0; n];
        let mut lambda: f64 = 0.0;
        for iter in 1..=100_000 {
            a.apply(&v, &mut av);
            let next = dot(&v, &av);
            let delta = (next - lambda).abs();
            lambda = next;
            std::mem::swap(&mut v, &mut av);
            if normalize(&mut v) == 0.0 {
                break;
            }
            if iter > 2 && delta <= 1e-8 * lambda.abs().max(f64::MIN_POSITIVE) {
                break;
            }
        }
        lambda.abs()
    };
    let lu = dense::LuFactors::factor(a.to_dense());
    let mut v = seed_vector(n);
    normalize(&mut v);
    let mut lambda: f64 = f64::INFINITY;
    for _ in 0..500 {
        let w = lu.solve(v.clone());
        v = w;
        if normalize(&mut v) == 0.0 {
            return Err(LinalgError::NonPositive(0.0));
        }
        let mut av = vec![0.0; n];
        a.apply(&v, &mut av);
        let next = dot(&v, &av);
        let delta = (next - lambda).abs();
        lambda = next;
        if delta <= 1e-8 * lambda.abs().max(f64::MIN_POSITIVE) {
            return Ok(abs_max / lambda.abs().max(f64::MIN_POSITIVE));
        }
    }
    Err(LinalgError::NoConvergence {
        iterations: 500,
        residual: f64::NAN,
    })
}

/// Small dense direct solves, used as an oracle for the iterative paths and
/// as the solver for the (possibly indefinite) one-dimensional systems.
pub mod dense {
    /// LU decomposition with partial pivoting, reusable across solves.
    pub struct LuFactors {
        lu: Vec<Vec<f64>>,
        piv: Vec<usize>,
    }

    impl LuFactors {
        pub fn factor(mut a: Vec<Vec<f64>>) -> Self {
            let n = a.len();
            let mut piv = Vec::with_capacity(n);
            for col in 0..n {
                let pivot = (col..n)
                    .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())
                    .unwrap();
                assert!(a[pivot][col] != 0.0, "matrix is singular");
                a.swap(col, pivot);
                piv.push(pivot);
                let inv = 1.0 / a[col][col];
                for row in col + 1..n {
                    let factor = a[row][col] * inv;
                    a[row][col] = factor;
                    if factor == 0.0 {
                        continue;
                    }
                    for k in col + 1..n {
                        let v = a[col][k];
                        a[row][k] -= factor * v;
                    }
                }
            }
            LuFactors { lu: a, piv }
        }

        pub fn solve(&self, mut b: Vec<f64>) -> Vec<f64> {
            let n = b.len();
            for col in 0..n {
                b.swap(col, self.piv[col]);
                for row in col + 1..n {
                    let f = self.lu[row][col];
                    if f != 0.0 {
                        b[row] -= f * b[col];
                    }
                }
            }
            for row in (0..n).rev() {
                for k in row + 1..n {
                    b[row] -= self.lu[row][k] * b[k];
                }
                b[row] /= self.lu[row][row];
            }
            b
        }
    }

    /// Solve by LU decomposition with partial pivoting; handles symmetric
    /// indefinite systems. Intended for `n` up to a couple of thousand.
    pub fn solve_lu(a: Vec<Vec<f64>>, b: Vec<f64>) -> Vec<f64> {
        LuFactors::factor(a).solve(b)
    }

    /// Solve a symmetric positive definite system by unpivoted Cholesky.
    /// Intended for `n` up to a couple of thousand.
    pub fn solve_spd(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        assert_eq!(a.len(), n);
        // In-place Cholesky: A = L L^T.
        for j in 0..n {
            for k in 0..j {
                let ljk = a[j][k];
                for i in j..n {
                    a[i][j] -= a[i][k] * ljk;
                }
            }
            let d = a[j][j];
            assert!(d > 0.0, "matrix is not positive definite");
            let inv = 1.0 / d.sqrt();
            for i in j..n {
                a[i][j] *= inv;
            }
        }
        // Forward then backward substitution.
        for i in 0..n {
            for k in 0..i {
                b[i] -= a[i][k] * b[k];
            }
            b[i] /= a[i][i];
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                b[i] -= a[k][i] * b[k];
            }
            b[i] /= a[i][i];
        }
        b
    }
}
