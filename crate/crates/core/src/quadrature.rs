//! Exact integration of bilinear-basis products.
//!
//! Area integrals over a polygon are reduced to its boundary with the
//! divergence theorem: with `F(x,y) = ∫ f dx` the x-primitive,
//! `∫_P f = Σ_edges ∫ F dy`, and each edge integral is evaluated with the
//! 3-point Gauss-Legendre rule, exact for polynomials of degree 5 along the
//! edge. Boundary (line) integrals use the same rule with an arc-length
//! weight. All integrands are represented symbolically so the only error is
//! roundoff.

use thiserror::Error;

use crate::Point;

#[derive(Debug, Error, PartialEq)]
pub enum QuadratureError {
    /// The x-primitive of the integrand leaves `P_5` along an edge, so the
    /// 3-point rule would no longer be exact.
    #[error("integrand of total degree {0} exceeds the exactness range")]
    DegreeTooHigh(usize),
}

/// Maximum power per variable a [`BivariatePoly`] can hold.
pub const MAX_DEGREE: usize = 5;

/// 3-point Gauss-Legendre rule on `[0,1]`, exact for `P_5`.
#[derive(Clone, Copy, Debug)]
pub struct EdgeRule {
    pub nodes: [f64; 3],
    pub weights: [f64; 3],
}

impl EdgeRule {
    pub fn gauss3() -> Self {
        let d = 0.6f64.sqrt(); // sqrt(3/5)
        EdgeRule {
            nodes: [0.5 * (1.0 - d), 0.5, 0.5 * (1.0 + d)],
            weights: [5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
        }
    }
}

/// Polynomial `Σ c[p][q] x^p y^q` with `p, q <= 5`.
#[derive(Clone, Debug, PartialEq)]
pub struct BivariatePoly {
    c: [[f64; MAX_DEGREE + 1]; MAX_DEGREE + 1],
}

impl BivariatePoly {
    pub fn zero() -> Self {
        BivariatePoly {
            c: [[0.0; MAX_DEGREE + 1]; MAX_DEGREE + 1],
        }
    }

    pub fn constant(v: f64) -> Self {
        let mut p = Self::zero();
        p.c[0][0] = v;
        p
    }

    /// Monomial `x^p y^q` scaled by `coeff`.
    pub fn monomial(p: usize, q: usize, coeff: f64) -> Self {
        assert!(p <= MAX_DEGREE && q <= MAX_DEGREE);
        let mut poly = Self::zero();
        poly.c[p][q] = coeff;
        poly
    }

    pub fn coeff(&self, p: usize, q: usize) -> f64 {
        self.c[p][q]
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for p in 0..=MAX_DEGREE {
            for q in 0..=MAX_DEGREE {
                out.c[p][q] += other.c[p][q];
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        for row in out.c.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        out
    }

    /// Product of two polynomials. Panics if the result overflows the degree cap.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for p1 in 0..=MAX_DEGREE {
            for q1 in 0..=MAX_DEGREE {
                let a = self.c[p1][q1];
                if a == 0.0 {
                    continue;
                }
                for p2 in 0..=MAX_DEGREE {
                    for q2 in 0..=MAX_DEGREE {
                        let b = other.c[p2][q2];
                        if b == 0.0 {
                            continue;
                        }
                        assert!(
                            p1 + p2 <= MAX_DEGREE && q1 + q2 <= MAX_DEGREE,
                            "product degree exceeds the cap"
                        );
                        out.c[p1 + p2][q1 + q2] += a * b;
                    }
                }
            }
        }
        out
    }

    /// Partial derivative in x.
    pub fn dx(&self) -> Self {
        let mut out = Self::zero();
        for p in 1..=MAX_DEGREE {
            for q in 0..=MAX_DEGREE {
                out.c[p - 1][q] = self.c[p][q] * p as f64;
            }
        }
        out
    }

    /// Partial derivative in y.
    pub fn dy(&self) -> Self {
        let mut out = Self::zero();
        for p in 0..=MAX_DEGREE {
            for q in 1..=MAX_DEGREE {
                out.c[p][q - 1] = self.c[p][q] * q as f64;
            }
        }
        out
    }

    /// Primitive in x with zero constant: `∂_x (antiderivative_x f) = f`.
    pub fn antiderivative_x(&self) -> Result<Self, QuadratureError> {
        let mut out = Self::zero();
        for p in 0..=MAX_DEGREE {
            for q in 0..=MAX_DEGREE {
                if self.c[p][q] != 0.0 {
                    if p + 1 > MAX_DEGREE {
                        return Err(QuadratureError::DegreeTooHigh(p + 1 + q));
                    }
                    out.c[p + 1][q] = self.c[p][q] / (p + 1) as f64;
                }
            }
        }
        Ok(out)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        // Horner in x of Horner-in-y rows.
        let mut acc = 0.0;
        for p in (0..=MAX_DEGREE).rev() {
            let mut row = 0.0;
            for q in (0..=MAX_DEGREE).rev() {
                row = row * y + self.c[p][q];
            }
            acc = acc * x + row;
        }
        acc
    }

    /// Largest `p + q` with a nonzero coefficient.
    pub fn total_degree(&self) -> usize {
        let mut deg = 0;
        for p in 0..=MAX_DEGREE {
            for q in 0..=MAX_DEGREE {
                if self.c[p][q] != 0.0 {
                    deg = deg.max(p + q);
                }
            }
        }
        deg
    }
}

/// Bilinear hat on the reference cell `[0,1]^2`.
///
/// Local index order matches cell vertices: 0 lower-left, 1 lower-right,
/// 2 upper-right, 3 upper-left.
pub fn basis(i: usize) -> BivariatePoly {
    let x = BivariatePoly::monomial(1, 0, 1.0);
    let y = BivariatePoly::monomial(0, 1, 1.0);
    let one = BivariatePoly::constant(1.0);
    let omx = one.add(&x.scaled(-1.0));
    let omy = one.add(&y.scaled(-1.0));
    match i {
        0 => omx.mul(&omy),
        1 => x.mul(&omy),
        2 => x.mul(&y),
        3 => omx.mul(&y),
        _ => panic!("local basis index {i} out of range"),
    }
}

/// Gradient of the reference hat, components as polynomials.
pub fn basis_grad(i: usize) -> (BivariatePoly, BivariatePoly) {
    let b = basis(i);
    (b.dx(), b.dy())
}

/// `∫ F dy` along the straight segment from `p0` to `p1`:
/// `Σ_s w_s F(p(s)) (y1 - y0)`. Exact when `F` restricted to the segment has
/// degree at most 5 in the parameter.
pub fn gauss3_segment(f: &BivariatePoly, p0: Point, p1: Point) -> f64 {
    let rule = EdgeRule::gauss3();
    let dy = p1.y - p0.y;
    let mut acc = 0.0;
    for (s, w) in rule.nodes.iter().zip(rule.weights) {
        let p = p0.lerp(p1, *s);
        acc += w * f.eval(p.x, p.y);
    }
    acc * dy
}

/// Arc-length integral `∫ f dl` along the segment from `p0` to `p1`.
pub fn gauss3_line(f: &BivariatePoly, p0: Point, p1: Point) -> f64 {
    let rule = EdgeRule::gauss3();
    let len = p1.sub(p0).norm();
    let mut acc = 0.0;
    for (s, w) in rule.nodes.iter().zip(rule.weights) {
        let p = p0.lerp(p1, *s);
        acc += w * f.eval(p.x, p.y);
    }
    acc * len
}

/// `∫_P f dx dy` over a simple polygon with counterclockwise vertices, by the
/// divergence theorem applied to the x-primitive of `f`.
///
/// Exact for total degree at most 4; higher degrees are rejected.
pub fn polygon_integral(f: &BivariatePoly, poly: &[Point]) -> Result<f64, QuadratureError> {
    if f.total_degree() > 4 {
        return Err(QuadratureError::DegreeTooHigh(f.total_degree()));
    }
    let primitive = f.antiderivative_x()?;
    Ok(polygon_integral_primitive(&primitive, poly))
}

/// Same reduction with a precomputed x-primitive (hot path in assembly).
pub fn polygon_integral_primitive(primitive: &BivariatePoly, poly: &[Point]) -> f64 {
    let m = poly.len();
    let mut acc = 0.0;
    for r in 0..m {
        acc += gauss3_segment(primitive, poly[r], poly[(r + 1) % m]);
    }
    acc
}

/// `∫_P φ_i φ_j` over a polygon given in reference-cell coordinates, scaled to
/// a physical cell of side `h`.
pub fn local_mass(poly_local: &[Point], i: usize, j: usize, h: f64) -> f64 {
    let f = basis(i).mul(&basis(j));
    h * h * polygon_integral(&f, poly_local).expect("Q2 product is within the degree cap")
}

/// `∫_P ∇φ_i · ∇φ_j` over a polygon in reference coordinates; independent of
/// `h` because the two gradient factors cancel the area scaling.
pub fn local_stiffness(poly_local: &[Point], i: usize, j: usize, _h: f64) -> f64 {
    let (gxi, gyi) = basis_grad(i);
    let (gxj, gyj) = basis_grad(j);
    let f = gxi.mul(&gxj).add(&gyi.mul(&gyj));
    polygon_integral(&f, poly_local).expect("gradient product is within the degree cap")
}

/// The three boundary-segment integrals entering the Nitsche terms.
#[derive(Clone, Copy, Debug, Default)]
pub struct BoundaryProducts {
    /// `∫ φ_i φ_j dl`
    pub mass: f64,
    /// `∫ (n·∇φ_j) φ_i dl`
    pub flux: f64,
    /// `∫ (n·∇φ_i) φ_j dl`
    pub symflux: f64,
}

/// Boundary products on the segment from `a` to `b` (reference-cell
/// coordinates, physical cell side `h`) with unit outward normal `n`.
pub fn boundary_products(
    a: Point,
    b: Point,
    normal: Point,
    i: usize,
    j: usize,
    h: f64,
) -> BoundaryProducts {
    let rule = EdgeRule::gauss3();
    let len_local = b.sub(a).norm();
    let bi = basis(i);
    let bj = basis(j);
    let (gxi, gyi) = basis_grad(i);
    let (gxj, gyj) = basis_grad(j);
    let mut mass = 0.0;
    let mut flux = 0.0;
    let mut symflux = 0.0;
    for (s, w) in rule.nodes.iter().zip(rule.weights) {
        let p = a.lerp(b, *s);
        let vi = bi.eval(p.x, p.y);
        let vj = bj.eval(p.x, p.y);
        let ndgi = normal.x * gxi.eval(p.x, p.y) + normal.y * gyi.eval(p.x, p.y);
        let ndgj = normal.x * gxj.eval(p.x, p.y) + normal.y * gyj.eval(p.x, p.y);
        mass += w * vi * vj;
        flux += w * ndgj * vi;
        symflux += w * ndgi * vj;
    }
    // Physical arc length is h * len_local; physical gradients carry 1/h.
    BoundaryProducts {
        mass: mass * h * len_local,
        flux: flux * len_local,
        symflux: symflux * len_local,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Point;

    const UNIT_SQUARE: [Point; 4] = [
        Point::new(0.0, 0.0),
        Point::new(1.0, 0.0),
        Point::new(1.0, 1.0),
        Point::new(0.0, 1.0),
    ];

    #[test]
    fn rule_weights_sum_to_one() {
        let rule = EdgeRule::gauss3();
        let sum: f64 = rule.weights.iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rule_exact_on_quintics() {
        // ∫_0^1 t^k dt = 1/(k+1) for k <= 5.
        let rule = EdgeRule::gauss3();
        for k in 0..=5 {
            let q: f64 = rule
                .nodes
                .iter()
                .zip(rule.weights)
                .map(|(t, w)| w * t.powi(k))
                .sum();
            assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-15, "degree {k}");
        }
    }

    #[test]
    fn gauss3_segment_examples() {
        let one = BivariatePoly::constant(1.0);
        let v = gauss3_segment(&one, Point::new(0.0, 0.0), Point::new(0.0, 1.0));
        assert!((v - 1.0).abs() < 1e-15);
        let horiz = gauss3_segment(&one, Point::new(0.0, 0.3), Point::new(1.0, 0.3));
        assert_eq!(horiz, 0.0);
        let x = BivariatePoly::monomial(1, 0, 1.0);
        let vx = gauss3_segment(&x, Point::new(1.0, 0.0), Point::new(1.0, 1.0));
        assert!((vx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn polygon_integral_examples() {
        let one = BivariatePoly::constant(1.0);
        let area = polygon_integral(&one, &UNIT_SQUARE).unwrap();
        assert!((area - 1.0).abs() < 1e-15);

        let tri = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!((polygon_integral(&one, &tri).unwrap() - 0.5).abs() < 1e-15);

        let x = BivariatePoly::monomial(1, 0, 1.0);
        assert!((polygon_integral(&x, &UNIT_SQUARE).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn polygon_integral_is_rotation_invariant() {
        // The divergence-theorem reduction must not care which edge starts
        // the cycle.
        let poly = [
            Point::new(0.1, 0.0),
            Point::new(1.0, 0.2),
            Point::new(0.8, 1.0),
            Point::new(0.0, 0.7),
        ];
        let f = BivariatePoly::monomial(2, 1, 1.0).add(&BivariatePoly::monomial(0, 2, -0.5));
        let base = polygon_integral(&f, &poly).unwrap();
        for shift in 1..poly.len() {
            let mut rotated = poly.to_vec();
            rotated.rotate_left(shift);
            let v = polygon_integral(&f, &rotated).unwrap();
            assert!((v - base).abs() < 1e-15, "shift {shift}: {v} vs {base}");
        }
    }

    #[test]
    fn degree_cap_is_enforced() {
        let too_high = BivariatePoly::monomial(3, 2, 1.0); // total degree 5
        assert_eq!(
            polygon_integral(&too_high, &UNIT_SQUARE),
            Err(QuadratureError::DegreeTooHigh(5))
        );
    }

    #[test]
    fn full_cell_mass_matches_tensor_product_values() {
        let h = 0.37;
        // Diagonal, edge-adjacent, diagonal-adjacent entries of the bilinear
        // mass matrix: h^2/9, h^2/18, h^2/36.
        for i in 0..4 {
            let d = local_mass(&UNIT_SQUARE, i, i, h);
            assert!((d - h * h / 9.0).abs() < 1e-15);
        }
        assert!((local_mass(&UNIT_SQUARE, 0, 1, h) - h * h / 18.0).abs() < 1e-15);
        assert!((local_mass(&UNIT_SQUARE, 1, 2, h) - h * h / 18.0).abs() < 1e-15);
        assert!((local_mass(&UNIT_SQUARE, 0, 2, h) - h * h / 36.0).abs() < 1e-16);
        assert!((local_mass(&UNIT_SQUARE, 1, 3, h) - h * h / 36.0).abs() < 1e-16);
    }

    #[test]
    fn full_cell_stiffness_matches_classical_values() {
        for h in [0.1, 1.0, 0.025] {
            for i in 0..4 {
                assert!((local_stiffness(&UNIT_SQUARE, i, i, h) - 2.0 / 3.0).abs() < 1e-15);
            }
            assert!((local_stiffness(&UNIT_SQUARE, 0, 1, h) + 1.0 / 6.0).abs() < 1e-15);
            assert!((local_stiffness(&UNIT_SQUARE, 0, 2, h) + 1.0 / 3.0).abs() < 1e-15);
            // Row sums vanish: constants are in the kernel of the gradient.
            for i in 0..4 {
                let row: f64 = (0..4).map(|j| local_stiffness(&UNIT_SQUARE, i, j, h)).sum();
                assert!(row.abs() < 1e-15);
            }
        }
    }

    #[test]
    fn boundary_products_on_left_edge() {
        // Full left edge of a cell, outward normal (-1, 0) (interior to the right).
        let a = Point::new(0.0, 0.0);
        let b = Point::new(0.0, 1.0);
        let n = Point::new(-1.0, 0.0);
        let h = 0.2;

        let bp00 = boundary_products(a, b, n, 0, 0, h);
        assert!((bp00.mass - h / 3.0).abs() < 1e-15);
        // n·∇φ_0 = +(1/h)(1 - y/h) on the edge, so the flux against φ_0 is +1/3.
        assert!((bp00.flux - 1.0 / 3.0).abs() < 1e-15);
        assert!((bp00.symflux - 1.0 / 3.0).abs() < 1e-15);

        // n·∇φ_1 = -(1/h)(1 - y/h) on the edge: flux against φ_0 is -1/3.
        let bp01 = boundary_products(a, b, n, 0, 1, h);
        assert!((bp01.flux + 1.0 / 3.0).abs() < 1e-15);
        // φ_1 vanishes on x = 0, so the mass and the symmetric flux vanish.
        assert!(bp01.mass.abs() < 1e-16);
        assert!(bp01.symflux.abs() < 1e-16);
    }

    #[test]
    fn boundary_mass_is_symmetric() {
        let a = Point::new(0.2, 0.0);
        let b = Point::new(0.9, 1.0);
        let n = Point::new(0.8, -0.6);
        for i in 0..4 {
            for j in 0..4 {
                let ij = boundary_products(a, b, n, i, j, 0.3);
                let ji = boundary_products(a, b, n, j, i, 0.3);
                assert!((ij.mass - ji.mass).abs() < 1e-15);
                assert!((ij.flux - ji.symflux).abs() < 1e-15);
            }
        }
    }
}
