//! Brute-force reference computations used by the verification suite.
//!
//! Everything here is deliberately independent of the production code paths:
//! polygon integrals go through a fan triangulation with a degree-10 tensor
//! Gauss rule instead of the divergence theorem, and eigenvalues come from
//! dense cyclic Jacobi sweeps instead of power iteration.

use crate::quadrature::BivariatePoly;
use crate::Point;

/// Degree-10 Gauss-Legendre abscissae on `[-1, 1]` (positive half).
const GL10_X: [f64; 5] = [
    0.14887433898163121,
    0.4333953941292472,
    0.6794095682990244,
    0.8650633666889845,
    0.9739065285171717,
];
const GL10_W: [f64; 5] = [
    0.29552422471475287,
    0.26926671930999635,
    0.21908636251598204,
    0.1494513491505806,
    0.06667134430868814,
];

/// The 10 nodes and weights on `[0, 1]`.
pub fn gauss_legendre_10() -> ([f64; 10], [f64; 10]) {
    let mut nodes = [0.0; 10];
    let mut weights = [0.0; 10];
    for k in 0..5 {
        nodes[k] = 0.5 * (1.0 - GL10_X[4 - k]);
        nodes[9 - k] = 0.5 * (1.0 + GL10_X[4 - k]);
        weights[k] = 0.5 * GL10_W[4 - k];
        weights[9 - k] = 0.5 * GL10_W[4 - k];
    }
    (nodes, weights)
}

/// `∫ f` over the triangle `(a, b, c)` by the Duffy transform with a 10x10
/// tensor Gauss rule; exact far beyond the degrees used in this crate.
pub fn triangle_integral(f: &BivariatePoly, a: Point, b: Point, c: Point) -> f64 {
    let (nodes, weights) = gauss_legendre_10();
    let jac = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);
    let mut acc = 0.0;
    for (s, ws) in nodes.iter().zip(weights) {
        for (t, wt) in nodes.iter().zip(weights) {
            let u = *s;
            let v = t * (1.0 - s);
            let p = Point::new(
                a.x + u * (b.x - a.x) + v * (c.x - a.x),
                a.y + u * (b.y - a.y) + v * (c.y - a.y),
            );
            acc += ws * wt * (1.0 - s) * f.eval(p.x, p.y);
        }
    }
    acc * jac
}

/// `∫ f` over a simple convex polygon by fan triangulation from the first
/// vertex.
pub fn polygon_integral_bruteforce(f: &BivariatePoly, poly: &[Point]) -> f64 {
    let mut acc = 0.0;
    for k in 1..poly.len() - 1 {
        acc += triangle_integral(f, poly[0], poly[k], poly[k + 1]);
    }
    acc
}

/// Arc-length integral `∫ f dl` along a segment with the degree-10 rule.
pub fn segment_integral_bruteforce(f: &BivariatePoly, p0: Point, p1: Point) -> f64 {
    let (nodes, weights) = gauss_legendre_10();
    let len = p1.sub(p0).norm();
    let mut acc = 0.0;
    for (t, w) in nodes.iter().zip(weights) {
        let p = p0.lerp(p1, *t);
        acc += w * f.eval(p.x, p.y);
    }
    acc * len
}

/// Eigenvalues of a small dense symmetric matrix by cyclic Jacobi rotations,
/// ascending.
pub fn sym_eigenvalues(mat: &[Vec<f64>]) -> Vec<f64> {
    let n = mat.len();
    let mut a: Vec<Vec<f64>> = mat.to_vec();
    let norm: f64 = a
        .iter()
        .flat_map(|row| row.iter().map(|v| v * v))
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 {
        return vec![0.0; n];
    }
    for _sweep in 0..200 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off.sqrt() <= 1e-14 * norm {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() <= 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    eigs
}
