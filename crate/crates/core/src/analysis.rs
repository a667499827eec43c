//! Discrete error norms and convergence-order fits.
//!
//! Errors are relative L2 norms of `u_h - u_exa` (and of the gradients)
//! evaluated with a midpoint rule whose sample count is incommensurate with
//! the grid, so sample points never sit on nodes or cell edges.

use thiserror::Error;

use crate::assembly1d::Interval1dSetup;
use crate::assembly2d::{DomainGeometry, ExactSolution};
use crate::levelset::CellLabel;
use crate::Point;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("no sample point fell inside the domain")]
    EmptySampleSet,
    #[error("need at least {needed} data points, got {got}")]
    InsufficientData { needed: usize, got: usize },
}

/// One row of a convergence study.
#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub n: usize,
    pub h: f64,
    pub error: f64,
    pub grad_error: f64,
    pub cond: Option<f64>,
    pub iterations: usize,
    pub wall_time: f64,
}

/// Default midpoint-rule density: `3N + 1` cells per axis, never a multiple
/// of `N`.
pub fn default_sample_density(n: usize) -> usize {
    3 * n + 1
}

/// Visit every midpoint-rule sample that falls inside the polygonal domain:
/// interior cells fully, cut cells where the bilinear interpolant of the
/// nodal level set is negative. The callback receives the point, its cell,
/// the four shape values and the local coordinates.
fn for_each_inside_sample(
    geom: &DomainGeometry,
    m_quad: usize,
    mut visit: impl FnMut(Point, usize, [f64; 4], (f64, f64)),
) -> usize {
    let grid = &geom.grid;
    let origin = grid.origin();
    let s = grid.side() / m_quad as f64;
    let h = grid.h();
    let mut samples = 0usize;
    for jq in 0..m_quad {
        for iq in 0..m_quad {
            let p = Point::new(
                origin.x + (iq as f64 + 0.5) * s,
                origin.y + (jq as f64 + 0.5) * s,
            );
            let cell = grid.cell_containing(p);
            let ids = grid.cell_vertices(cell);
            let corner = grid.cell_origin(cell);
            let lx = (p.x - corner.x) / h;
            let ly = (p.y - corner.y) / h;
            let shape = [
                (1.0 - lx) * (1.0 - ly),
                lx * (1.0 - ly),
                lx * ly,
                (1.0 - lx) * ly,
            ];
            match geom.cell_labels[cell] {
                CellLabel::Exterior => continue,
                CellLabel::Interior => {}
                CellLabel::Cut => {
                    let phi: f64 = (0..4).map(|k| geom.values.value(ids[k]) * shape[k]).sum();
                    if phi >= 0.0 {
                        continue;
                    }
                }
            }
            samples += 1;
            visit(p, cell, shape, (lx, ly));
        }
    }
    samples
}

/// Relative L2 errors of the solution and of its gradient over the polygonal
/// domain: all interior cells plus the parts of cut cells where the bilinear
/// interpolant of the nodal level set is negative.
pub fn l2_errors(
    u: &[f64],
    exact: &ExactSolution,
    geom: &DomainGeometry,
    m_quad: usize,
) -> Result<(f64, f64), AnalysisError> {
    let grid = &geom.grid;
    assert_eq!(u.len(), grid.node_count());
    let h = grid.h();

    let mut num_u = 0.0;
    let mut den_u = 0.0;
    let mut num_g = 0.0;
    let mut den_g = 0.0;

    let samples = for_each_inside_sample(geom, m_quad, |p, cell, shape, (lx, ly)| {
        let ids = grid.cell_vertices(cell);
        let uh: f64 = (0..4).map(|k| u[ids[k]] * shape[k]).sum();
        let coeff = ids.map(|id| u[id]);
        let gx = ((coeff[1] - coeff[0]) * (1.0 - ly) + (coeff[2] - coeff[3]) * ly) / h;
        let gy = ((coeff[3] - coeff[0]) * (1.0 - lx) + (coeff[2] - coeff[1]) * lx) / h;

        let ue = (exact.u)(p);
        let (gex, gey) = (exact.grad)(p);
        num_u += (uh - ue) * (uh - ue);
        den_u += ue * ue;
        num_g += (gx - gex) * (gx - gex) + (gy - gey) * (gy - gey);
        den_g += gex * gex + gey * gey;
    });
    if samples == 0 {
        return Err(AnalysisError::EmptySampleSet);
    }
    Ok((relative(num_u, den_u), relative(num_g, den_g)))
}

/// Midpoint-rule mean of a scalar field over the polygonal domain; fixes the
/// gauge constant when comparing against zero-mean Neumann solutions.
pub fn domain_mean(
    geom: &DomainGeometry,
    field: &dyn Fn(Point) -> f64,
    m_quad: usize,
) -> Result<f64, AnalysisError> {
    let mut acc = 0.0;
    let samples = for_each_inside_sample(geom, m_quad, |p, _, _, _| {
        acc += field(p);
    });
    if samples == 0 {
        return Err(AnalysisError::EmptySampleSet);
    }
    Ok(acc / samples as f64)
}

/// 1D counterpart on `[a, b]`: `u_h` is the piecewise-linear interpolant of
/// the nodal coefficients, its derivative piecewise constant.
pub fn l2_errors_1d(
    u: &[f64],
    exact_u: &dyn Fn(f64) -> f64,
    exact_du: &dyn Fn(f64) -> f64,
    setup: &Interval1dSetup,
    m_quad: usize,
) -> Result<(f64, f64), AnalysisError> {
    assert_eq!(u.len(), setup.n + 1);
    let (a, b) = (setup.a, setup.b);
    let s = (b - a) / m_quad as f64;
    let h = setup.h;

    let mut num_u = 0.0;
    let mut den_u = 0.0;
    let mut num_g = 0.0;
    let mut den_g = 0.0;
    for k in 0..m_quad {
        let x = a + (k as f64 + 0.5) * s;
        let cell = ((x / h).floor() as usize).min(setup.n - 1);
        let t = x / h - cell as f64;
        let uh = (1.0 - t) * u[cell] + t * u[cell + 1];
        let duh = (u[cell + 1] - u[cell]) / h;
        let ue = exact_u(x);
        let due = exact_du(x);
        num_u += (uh - ue) * (uh - ue);
        den_u += ue * ue;
        num_g += (duh - due) * (duh - due);
        den_g += due * due;
    }
    if m_quad == 0 {
        return Err(AnalysisError::EmptySampleSet);
    }
    Ok((relative(num_u, den_u), relative(num_g, den_g)))
}

fn relative(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        num.sqrt()
    } else {
        (num / den).sqrt()
    }
}

/// Least-squares slope of `log(error)` against `log(h)` over `(h, error)`
/// pairs. Zero errors are clamped to `1e-300` so exact hits do not poison the
/// logarithm.
pub fn fit_order(points: &[(f64, f64)]) -> Result<f64, AnalysisError> {
    if points.len() < 3 {
        return Err(AnalysisError::InsufficientData {
            needed: 3,
            got: points.len(),
        });
    }
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(h, e)| (h.ln(), e.max(1e-300).ln()))
        .collect();
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|p| p.0).sum();
    let sy: f64 = logs.iter().map(|p| p.1).sum();
    let sxx: f64 = logs.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = logs.iter().map(|p| p.0 * p.1).sum();
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// Slope of the L2 error column of a report list.
pub fn fit_order_reports(reports: &[ErrorReport]) -> Result<f64, AnalysisError> {
    fit_order(&reports.iter().map(|r| (r.h, r.error)).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_ratio_four_gives_order_two() {
        let pts = [(0.1, 1e-2), (0.05, 2.5e-3), (0.025, 6.25e-4)];
        assert!((fit_order(&pts).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn constant_errors_give_order_zero() {
        let pts = [(0.1, 3.0), (0.05, 3.0), (0.025, 3.0)];
        assert!(fit_order(&pts).unwrap().abs() < 1e-12);
    }

    #[test]
    fn perturbed_second_order_sequence() {
        let pts: Vec<(f64, f64)> = (0..5)
            .map(|k| {
                let h = 0.1 / 2f64.powi(k);
                (h, h * h * (1.0 + 0.01 * (1.0 / h).sin()))
            })
            .collect();
        // Independent check of the same least-squares formula via a two-point
        // secant average.
        let secant: f64 = pts
            .windows(2)
            .map(|w| (w[1].1 / w[0].1).ln() / (w[1].0 / w[0].0).ln())
            .sum::<f64>()
            / 4.0;
        let fitted = fit_order(&pts).unwrap();
        assert!((1.95..=2.05).contains(&fitted), "{fitted}");
        assert!((fitted - secant).abs() < 0.02);
    }

    #[test]
    fn scaling_errors_leaves_slope_unchanged() {
        let pts = [(0.1, 1e-2), (0.05, 2.7e-3), (0.025, 8e-4), (0.0125, 2.2e-4)];
        let scaled: Vec<(f64, f64)> = pts.iter().map(|&(h, e)| (h, 10.0 * e)).collect();
        let a = fit_order(&pts).unwrap();
        let b = fit_order(&scaled).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn insufficient_data_is_reported() {
        assert_eq!(
            fit_order(&[(0.1, 1.0), (0.05, 0.5)]).unwrap_err(),
            AnalysisError::InsufficientData { needed: 3, got: 2 }
        );
    }
}
