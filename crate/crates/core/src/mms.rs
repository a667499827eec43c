//! Manufactured solutions for the experiment harness.
//!
//! 1D: `u(x) = sin(5x + 1)`, so `f = -u'' = 25 sin(5x + 1)` and the Neumann
//! datum at `b` is `u'(b) = 5 cos(5b + 1)`.
//!
//! 2D: `u(x, y) = cos(2πx) cos(2πy)`, so `f = -Δu = 8π² u`, Dirichlet data is
//! the trace of `u`, and Neumann data is `∇u · n` with the outward normal of
//! the polygonal boundary.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::assembly2d::ExactSolution;
use crate::Point;

pub fn exact_value_1d(x: f64) -> f64 {
    (5.0 * x + 1.0).sin()
}

pub fn exact_derivative_1d(x: f64) -> f64 {
    5.0 * (5.0 * x + 1.0).cos()
}

pub fn source_1d(x: f64) -> f64 {
    25.0 * (5.0 * x + 1.0).sin()
}

pub fn exact_value_2d(p: Point) -> f64 {
    (2.0 * PI * p.x).cos() * (2.0 * PI * p.y).cos()
}

pub fn exact_gradient_2d(p: Point) -> (f64, f64) {
    let (sx, cx) = (2.0 * PI * p.x).sin_cos();
    let (sy, cy) = (2.0 * PI * p.y).sin_cos();
    (-2.0 * PI * sx * cy, -2.0 * PI * cx * sy)
}

pub fn source_2d(p: Point) -> f64 {
    8.0 * PI * PI * exact_value_2d(p)
}

/// `∇u · n` for a boundary point with outward unit normal `n`.
pub fn neumann_data_2d(p: Point, n: Point) -> f64 {
    let (gx, gy) = exact_gradient_2d(p);
    gx * n.x + gy * n.y
}

pub fn exact_solution_2d() -> ExactSolution {
    ExactSolution {
        u: Arc::new(exact_value_2d),
        grad: Arc::new(exact_gradient_2d),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn source_is_negative_laplacian() {
        // Central finite differences against the closed forms.
        let d = 1e-5;
        for &(x, y) in &[(0.21, 0.37), (0.5, 0.5), (-0.3, 0.8)] {
            let p = Point::new(x, y);
            let lap = (exact_value_2d(Point::new(x + d, y))
                + exact_value_2d(Point::new(x - d, y))
                + exact_value_2d(Point::new(x, y + d))
                + exact_value_2d(Point::new(x, y - d))
                - 4.0 * exact_value_2d(p))
                / (d * d);
            assert!((source_2d(p) + lap).abs() < 1e-4);
            let (gx, gy) = exact_gradient_2d(p);
            let fdx = (exact_value_2d(Point::new(x + d, y)) - exact_value_2d(Point::new(x - d, y)))
                / (2.0 * d);
            let fdy = (exact_value_2d(Point::new(x, y + d)) - exact_value_2d(Point::new(x, y - d)))
                / (2.0 * d);
            assert!((gx - fdx).abs() < 1e-7 && (gy - fdy).abs() < 1e-7);
        }
        let d1 = (exact_value_1d(0.3 + d) - 2.0 * exact_value_1d(0.3) + exact_value_1d(0.3 - d))
            / (d * d);
        assert!((source_1d(0.3) + d1).abs() < 1e-4);
        assert!(
            (exact_derivative_1d(0.3)
                - (exact_value_1d(0.3 + d) - exact_value_1d(0.3 - d)) / (2.0 * d))
                .abs()
                < 1e-7
        );
    }
}
