//! One-dimensional discrete systems on `[a, b] ⊂ [0, 1]` in closed form.
//!
//! The grid covers `[0, 1]` with spacing `h = 1/N`; the physical interval ends
//! sit inside the first and last cells, encoded by `theta_1 = 1 - a/h` and
//! `theta_2 = 1 - (1 - b)/h`. Stiffness, mass and trace blocks are written out
//! explicitly; only rows `0, 1, N-1, N` differ from the classical tridiagonal
//! forms.

use thiserror::Error;

use crate::linalg::{CsrMatrix, Triplets};

#[derive(Debug, Error, PartialEq)]
pub enum AssemblyError {
    #[error("interval end {value} leaves the admissible range [{lo}, {hi}]")]
    InvalidTheta { value: f64, lo: f64, hi: f64 },
    /// The load vector has a kernel component too large to be a discretization
    /// artifact; the Neumann data is incompatible.
    #[error("Neumann compatibility defect {defect:.3e} exceeds {tol:.3e}")]
    CompatibilityViolation { defect: f64, tol: f64 },
    #[error(transparent)]
    Geometry(#[from] crate::geometry::GeometryError),
}

/// Discretization of `[a, b] ⊂ [0, 1]` with `N` grid cells and penalty `lambda`.
#[derive(Clone, Copy, Debug)]
pub struct Interval1dSetup {
    pub n: usize,
    pub h: f64,
    pub a: f64,
    pub b: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub lambda: f64,
}

impl Interval1dSetup {
    /// Setup from the cut parameters `theta1, theta2 ∈ [0, 1]`.
    pub fn from_thetas(
        n: usize,
        theta1: f64,
        theta2: f64,
        lambda: f64,
    ) -> Result<Self, AssemblyError> {
        assert!(n >= 4, "need at least 4 cells");
        assert!(lambda > 0.0);
        for theta in [theta1, theta2] {
            if !(0.0..=1.0).contains(&theta) || !theta.is_finite() {
                return Err(AssemblyError::InvalidTheta {
                    value: theta,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        let h = 1.0 / n as f64;
        Ok(Interval1dSetup {
            n,
            h,
            a: (1.0 - theta1) * h,
            b: 1.0 - (1.0 - theta2) * h,
            theta1,
            theta2,
            lambda,
        })
    }

    /// Setup from the interval ends; `a` must lie in the first cell and `b`
    /// in the last.
    pub fn from_interval(n: usize, a: f64, b: f64, lambda: f64) -> Result<Self, AssemblyError> {
        assert!(n >= 4, "need at least 4 cells");
        let h = 1.0 / n as f64;
        if !(0.0..=h).contains(&a) {
            return Err(AssemblyError::InvalidTheta {
                value: a,
                lo: 0.0,
                hi: h,
            });
        }
        if !(1.0 - h..=1.0).contains(&b) {
            return Err(AssemblyError::InvalidTheta {
                value: b,
                lo: 1.0 - h,
                hi: 1.0,
            });
        }
        Self::from_thetas(n, 1.0 - a / h, 1.0 - (1.0 - b) / h, lambda)
    }

    /// Grid node coordinate `x_i = i h`.
    pub fn node_x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// Default penalty for exponent `alpha`: `lambda = h^{-alpha}`.
    pub fn default_lambda(n: usize, alpha: f64) -> f64 {
        (n as f64).powf(alpha)
    }
}

/// The matrix blocks of the 1D systems, all `(N+1) x (N+1)`:
/// stiffness `S`, boundary trace blocks `S_T` split by endpoint, mass `M`,
/// penalty `P_a, P_b`, Dirichlet lift `D_a, D_b` and the Neumann trace `N_b`.
#[derive(Clone, Debug)]
pub struct Blocks1d {
    pub s: Triplets,
    /// `phi_j'(a) phi_i(a) + phi_j(a) phi_i'(a)`
    pub st_a: Triplets,
    /// `phi_j'(b) phi_i(b) + phi_j(b) phi_i'(b)`
    pub st_b: Triplets,
    pub m: Triplets,
    pub p_a: Triplets,
    pub p_b: Triplets,
    /// `D_a[i][j] = phi_j(a) phi_i'(a)`
    pub d_a: Triplets,
    /// `D_b[i][j] = phi_j(b) phi_i'(b)`
    pub d_b: Triplets,
    /// `N_b[i][j] = phi_j(b) phi_i(b)`
    pub n_b: Triplets,
}

/// All blocks with exactly the closed-form nonzeros.
pub fn build_blocks_1d(setup: &Interval1dSetup) -> Blocks1d {
    let n = setup.n;
    let h = setup.h;
    let (t1, t2) = (setup.theta1, setup.theta2);
    let dim = n + 1;

    // Stiffness: tridiagonal with boundary-modified rows 0, 1, N-1, N.
    let mut s = Triplets::new(dim);
    s.push(0, 0, t1 / h);
    s.push_sym(0, 1, -t1 / h);
    s.push(1, 1, (1.0 + t1) / h);
    for i in 2..=n - 2 {
        s.push(i, i, 2.0 / h);
    }
    for i in 1..=n - 2 {
        s.push_sym(i, i + 1, -1.0 / h);
    }
    s.push(n - 1, n - 1, (1.0 + t2) / h);
    s.push_sym(n - 1, n, -t2 / h);
    s.push(n, n, t2 / h);

    // Mass: the end rows pick up the theta-weighted integrals.
    let mut m = Triplets::new(dim);
    m.push(0, 0, h * t1.powi(3) / 3.0);
    m.push_sym(0, 1, h * (t1 * t1 / 2.0 - t1.powi(3) / 3.0));
    m.push(1, 1, h * ((1.0 + t1.powi(3)) / 3.0 + t1 - t1 * t1));
    for i in 2..=n - 2 {
        m.push(i, i, 2.0 * h / 3.0);
    }
    for i in 1..=n - 2 {
        m.push_sym(i, i + 1, h / 6.0);
    }
    m.push(n - 1, n - 1, h * ((1.0 + t2.powi(3)) / 3.0 + t2 - t2 * t2));
    m.push_sym(n - 1, n, h * (t2 * t2 / 2.0 - t2.powi(3) / 3.0));
    m.push(n, n, h * t2.powi(3) / 3.0);

    // Traces at a: phi_0(a) = theta1, phi_1(a) = 1 - theta1,
    // phi_0'(a) = -1/h, phi_1'(a) = 1/h.
    let val_a = [t1, 1.0 - t1];
    let der_a = [-1.0 / h, 1.0 / h];
    // Traces at b: phi_N(b) = theta2, phi_{N-1}(b) = 1 - theta2,
    // phi_N'(b) = 1/h, phi_{N-1}'(b) = -1/h.
    let val_b = [1.0 - t2, t2];
    let der_b = [-1.0 / h, 1.0 / h];

    let mut p_a = Triplets::new(dim);
    let mut d_a = Triplets::new(dim);
    let mut st_a = Triplets::new(dim);
    for i in 0..2 {
        for j in 0..2 {
            p_a.push(i, j, val_a[i] * val_a[j]);
            d_a.push(i, j, val_a[j] * der_a[i]);
            st_a.push(i, j, der_a[j] * val_a[i] + val_a[j] * der_a[i]);
        }
    }

    let mut p_b = Triplets::new(dim);
    let mut d_b = Triplets::new(dim);
    let mut n_b = Triplets::new(dim);
    let mut st_b = Triplets::new(dim);
    for i in 0..2 {
        for j in 0..2 {
            let (gi, gj) = (n - 1 + i, n - 1 + j);
            p_b.push(gi, gj, val_b[i] * val_b[j]);
            n_b.push(gi, gj, val_b[i] * val_b[j]);
            d_b.push(gi, gj, val_b[j] * der_b[i]);
            st_b.push(gi, gj, der_b[j] * val_b[i] + val_b[j] * der_b[i]);
        }
    }

    Blocks1d {
        s,
        st_a,
        st_b,
        m,
        p_a,
        p_b,
        d_a,
        d_b,
        n_b,
    }
}

/// An assembled sparse system.
#[derive(Clone, Debug)]
pub struct SparseSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

fn add_scaled_vec(acc: &mut [f64], v: &[f64], s: f64) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a += s * x;
    }
}

/// Dirichlet problem on `[a, b]`: `A = S + S_T + lambda (P_a + P_b)` with the
/// trace signs of each endpoint folded into `S_T`, and
/// `F = M f + (D_a + lambda P_a) u_a + (-D_b + lambda P_b) u_b`.
///
/// `f` holds nodal samples of the source at all `N + 1` grid nodes.
pub fn assemble_dirichlet_1d(
    setup: &Interval1dSetup,
    f: &[f64],
    u_a: f64,
    u_b: f64,
) -> SparseSystem {
    let blocks = build_blocks_1d(setup);
    assert_eq!(f.len(), setup.n + 1);
    let lambda = setup.lambda;

    let mut a = Triplets::new(setup.n + 1);
    a.add_scaled(&blocks.s, 1.0);
    a.add_scaled(&blocks.st_a, 1.0);
    a.add_scaled(&blocks.st_b, -1.0);
    a.add_scaled(&blocks.p_a, lambda);
    a.add_scaled(&blocks.p_b, lambda);

    let mut rhs = blocks.m.matvec(f);
    add_scaled_vec(&mut rhs, &blocks.d_a.row_sums(), u_a);
    add_scaled_vec(&mut rhs, &blocks.p_a.row_sums(), lambda * u_a);
    add_scaled_vec(&mut rhs, &blocks.d_b.row_sums(), -u_b);
    add_scaled_vec(&mut rhs, &blocks.p_b.row_sums(), lambda * u_b);

    SparseSystem {
        matrix: a.to_csr(),
        rhs,
    }
}

/// Mixed problem: Dirichlet value `u_a` at `a`, Neumann flux `g_b = u'(b)`:
/// `A = S + S_T + lambda P_a`, `F = M f + (D_a + lambda P_a) u_a + N_b g_b`.
pub fn assemble_mixed_1d(setup: &Interval1dSetup, f: &[f64], u_a: f64, g_b: f64) -> SparseSystem {
    let blocks = build_blocks_1d(setup);
    assert_eq!(f.len(), setup.n + 1);
    let lambda = setup.lambda;

    let mut a = Triplets::new(setup.n + 1);
    a.add_scaled(&blocks.s, 1.0);
    a.add_scaled(&blocks.st_a, 1.0);
    a.add_scaled(&blocks.p_a, lambda);

    let mut rhs = blocks.m.matvec(f);
    add_scaled_vec(&mut rhs, &blocks.d_a.row_sums(), u_a);
    add_scaled_vec(&mut rhs, &blocks.p_a.row_sums(), lambda * u_a);
    add_scaled_vec(&mut rhs, &blocks.n_b.row_sums(), g_b);

    SparseSystem {
        matrix: a.to_csr(),
        rhs,
    }
}
