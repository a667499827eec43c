//! Cut-cell geometry: intersection points, interior polygons, and boundary
//! segments with outward normals.
//!
//! Intersections are always computed from the nodal level-set values with the
//! linear model along each edge; the analytic level set is never re-evaluated
//! between nodes, so the geometry stays consistent with snapping.

use thiserror::Error;

use crate::grid::GridTopology;
use crate::levelset::{CellLabel, NodeValues};
use crate::Point;

#[derive(Debug, Error, PartialEq)]
pub enum GeometryError {
    /// The boundary crosses the cell more than once (e.g. the checkerboard
    /// sign pattern); the grid is too coarse to resolve the geometry.
    #[error("cell {cell}: boundary crosses the cell more than once")]
    AmbiguousCut { cell: usize },
    #[error("cell {cell}: cut polygon is degenerate")]
    DegeneratePolygon { cell: usize },
    #[error("cell {cell}: boundary segment has zero length")]
    ZeroLengthSegment { cell: usize },
}

/// Boundary-edge crossing: the edge index within the cell cycle, the linear
/// parameter along that edge, and the physical point.
#[derive(Clone, Copy, Debug)]
pub struct EdgeIntersection {
    pub edge: usize,
    pub theta: f64,
    pub point: Point,
}

/// Interior part of a cut cell: a simple counterclockwise polygon made of the
/// interior grid vertices plus the two boundary crossings, the boundary
/// segment itself, and its outward unit normal.
#[derive(Clone, Debug)]
pub struct CutPolygon {
    pub cell: usize,
    /// 3 to 5 vertices, counterclockwise, starting at the lowest-id interior
    /// grid vertex.
    pub vertices: Vec<Point>,
    /// Crossing points `(A, B)`; `A` lies on the edge leaving the interior.
    pub segment: (Point, Point),
    /// Unit normal of the segment pointing toward positive level-set values.
    pub normal: Point,
    /// Grid node ids of the interior vertices, ascending.
    pub interior_nodes: Vec<usize>,
}

impl CutPolygon {
    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }
}

fn signed_area(poly: &[Point]) -> f64 {
    let m = poly.len();
    let mut acc = 0.0;
    for r in 0..m {
        let p = poly[r];
        let q = poly[(r + 1) % m];
        acc += p.x * q.y - q.x * p.y;
    }
    0.5 * acc
}

/// Crossing points of the boundary with the cell edges.
///
/// Walks the edge cycle `k_0..k_3, k_4 = k_0`; on a sign change the crossing
/// is at `theta = phi_i / (phi_i - phi_{i+1})` from vertex `i`. The point is
/// labelled `A` when the first endpoint is interior, `B` otherwise. Exactly
/// two crossings must occur.
///
/// A vertex value of exactly zero counts as outside; the crossing then
/// degenerates to the vertex itself (`theta` 0 or 1), which keeps boundaries
/// passing exactly through grid nodes well defined.
pub fn edge_intersections(
    cell: usize,
    phi: [f64; 4],
    corners: [Point; 4],
) -> Result<(EdgeIntersection, EdgeIntersection), GeometryError> {
    let mut a = None;
    let mut b = None;
    let mut crossings = 0;
    let inside = phi.map(|v| v < 0.0);
    for i in 0..4 {
        let j = (i + 1) % 4;
        if inside[i] != inside[j] {
            crossings += 1;
            let theta = phi[i] / (phi[i] - phi[j]);
            let point = corners[i].lerp(corners[j], theta);
            let hit = EdgeIntersection {
                edge: i,
                theta,
                point,
            };
            if inside[i] {
                a = Some(hit);
            } else {
                b = Some(hit);
            }
        }
    }
    if crossings != 2 {
        return Err(GeometryError::AmbiguousCut { cell });
    }
    match (a, b) {
        (Some(a), Some(b)) => Ok((a, b)),
        // With two crossings one exits and one enters the interior.
        _ => Err(GeometryError::AmbiguousCut { cell }),
    }
}

/// Assembles the cut polygon from the interior vertices and the two crossings,
/// spliced into the counterclockwise vertex cycle.
pub fn build_polygon(
    cell: usize,
    phi: [f64; 4],
    corners: [Point; 4],
    node_ids: [usize; 4],
    a: EdgeIntersection,
    b: EdgeIntersection,
) -> Result<CutPolygon, GeometryError> {
    // Walk the cycle: an interior corner contributes itself, then the edge it
    // starts may contribute a crossing point.
    let mut cycle: Vec<(Option<usize>, Point)> = Vec::with_capacity(6);
    for i in 0..4 {
        if phi[i] < 0.0 {
            cycle.push((Some(node_ids[i]), corners[i]));
        }
        if a.edge == i {
            cycle.push((None, a.point));
        }
        if b.edge == i {
            cycle.push((None, b.point));
        }
    }
    debug_assert!((3..=5).contains(&cycle.len()));

    // Canonical start: the lowest-id interior grid vertex.
    let start = cycle
        .iter()
        .enumerate()
        .filter_map(|(pos, (id, _))| id.map(|id| (id, pos)))
        .min()
        .map(|(_, pos)| pos)
        .ok_or(GeometryError::DegeneratePolygon { cell })?;
    cycle.rotate_left(start);

    let vertices: Vec<Point> = cycle.iter().map(|&(_, p)| p).collect();
    if signed_area(&vertices) <= 1e-30 {
        return Err(GeometryError::DegeneratePolygon { cell });
    }

    let normal = segment_normal(cell, a.point, b.point, phi, corners)?;
    let mut interior_nodes: Vec<usize> = (0..4)
        .filter(|&i| phi[i] < 0.0)
        .map(|i| node_ids[i])
        .collect();
    interior_nodes.sort_unstable();

    Ok(CutPolygon {
        cell,
        vertices,
        segment: (a.point, b.point),
        normal,
        interior_nodes,
    })
}

/// Unit normal of the segment `a-b`, oriented so that a small step from the
/// segment midpoint along it increases the bilinear interpolant of the nodal
/// values; that is the outward direction.
pub fn segment_normal(
    cell: usize,
    a: Point,
    b: Point,
    phi: [f64; 4],
    corners: [Point; 4],
) -> Result<Point, GeometryError> {
    let d = b.sub(a);
    let len = d.norm();
    let h = corners[1].sub(corners[0]).norm();
    if len < 1e-14 * h {
        return Err(GeometryError::ZeroLengthSegment { cell });
    }
    let n = Point::new(d.y / len, -d.x / len);
    let mid = a.midpoint(b);
    let g = bilinear_gradient(phi, corners, mid);
    let side = n.dot(g);
    if side > 0.0 {
        Ok(n)
    } else if side < 0.0 {
        Ok(n.scale(-1.0))
    } else {
        // Degenerate midpoint gradient; probe the interpolant directly.
        let delta = 1e-3 * h;
        let plus = bilinear_value(phi, corners, mid.add(n.scale(delta)));
        let minus = bilinear_value(phi, corners, mid.add(n.scale(-delta)));
        if plus >= minus {
            Ok(n)
        } else {
            Ok(n.scale(-1.0))
        }
    }
}

fn local_coords(corners: [Point; 4], p: Point) -> (f64, f64, f64) {
    let h = corners[1].x - corners[0].x;
    ((p.x - corners[0].x) / h, (p.y - corners[0].y) / h, h)
}

fn bilinear_value(phi: [f64; 4], corners: [Point; 4], p: Point) -> f64 {
    let (x, y, _) = local_coords(corners, p);
    phi[0] * (1.0 - x) * (1.0 - y)
        + phi[1] * x * (1.0 - y)
        + phi[2] * x * y
        + phi[3] * (1.0 - x) * y
}

fn bilinear_gradient(phi: [f64; 4], corners: [Point; 4], p: Point) -> Point {
    let (x, y, h) = local_coords(corners, p);
    let gx = (phi[1] - phi[0]) * (1.0 - y) + (phi[2] - phi[3]) * y;
    let gy = (phi[3] - phi[0]) * (1.0 - x) + (phi[2] - phi[1]) * x;
    Point::new(gx / h, gy / h)
}

/// Cut geometry for one cell of the grid.
pub fn cut_cell(
    grid: &GridTopology,
    values: &NodeValues,
    cell: usize,
) -> Result<CutPolygon, GeometryError> {
    let node_ids = grid.cell_vertices(cell);
    let corners = grid.cell_corner_coords(cell);
    let phi = node_ids.map(|id| values.value(id));
    let (a, b) = edge_intersections(cell, phi, corners)?;
    build_polygon(cell, phi, corners, node_ids, a, b)
}

/// Area of the interior part of a cut cell, without requiring a usable
/// boundary segment.
pub fn cut_interior_area(
    grid: &GridTopology,
    values: &NodeValues,
    cell: usize,
) -> Result<f64, GeometryError> {
    let node_ids = grid.cell_vertices(cell);
    let corners = grid.cell_corner_coords(cell);
    let phi = node_ids.map(|id| values.value(id));
    let (a, b) = edge_intersections(cell, phi, corners)?;
    let mut cycle: Vec<Point> = Vec::with_capacity(6);
    for i in 0..4 {
        if phi[i] < 0.0 {
            cycle.push(corners[i]);
        }
        if a.edge == i {
            cycle.push(a.point);
        }
        if b.edge == i {
            cycle.push(b.point);
        }
    }
    Ok(signed_area(&cycle))
}

/// Result of cutting every cut-labelled cell.
///
/// A snapped node carries the value `+eps`, so a cell whose only outside
/// vertex is snapped yields a boundary segment of length about `eps * h`:
/// the interior part fills the cell up to an `eps`-sliver. Such cells are
/// reported in `filled` and treated as full cells; their boundary
/// contribution is below roundoff.
#[derive(Clone, Debug, Default)]
pub struct CutCells {
    /// Proper cut polygons, by ascending cell id.
    pub polygons: Vec<CutPolygon>,
    /// Cut-labelled cells whose interior part fills the cell (degenerate
    /// corner touches), ascending.
    pub filled: Vec<usize>,
}

/// Cut polygons for every cut cell, by ascending cell id.
pub fn build_cut_polygons(
    grid: &GridTopology,
    values: &NodeValues,
    cell_labels: &[CellLabel],
) -> Result<CutCells, GeometryError> {
    let mut out = CutCells::default();
    let h = grid.h();
    for (cell, _) in cell_labels
        .iter()
        .enumerate()
        .filter(|&(_, &label)| label == CellLabel::Cut)
    {
        match cut_cell(grid, values, cell) {
            Ok(poly) => out.polygons.push(poly),
            Err(GeometryError::ZeroLengthSegment { .. }) => {
                let area = cut_interior_area(grid, values, cell)?;
                if area >= 0.5 * h * h {
                    out.filled.push(cell);
                } else {
                    return Err(GeometryError::DegeneratePolygon { cell });
                }
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
