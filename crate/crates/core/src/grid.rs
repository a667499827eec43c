//! Uniform square grid over a square region `R`.
//!
//! Nodes and cells are numbered row-major from the lower-left corner so that
//! every id is stable across runs and CSV output is reproducible.

use crate::Point;

/// Regular `N x N` grid of square cells over the region `R`.
#[derive(Clone, Copy, Debug)]
pub struct GridTopology {
    origin: Point,
    side: f64,
    n: usize,
    h: f64,
}

impl GridTopology {
    /// Grid with `n` subdivisions per side over the square with lower-left
    /// corner `origin` and side length `side`.
    ///
    /// Panics if `n == 0` or `side <= 0`. Only square cells are supported, so
    /// the region itself must be square.
    pub fn new(origin: Point, side: f64, n: usize) -> Self {
        assert!(n > 0, "grid needs at least one cell per side");
        assert!(
            side > 0.0 && side.is_finite(),
            "region side must be positive"
        );
        GridTopology {
            origin,
            side,
            n,
            h: side / n as f64,
        }
    }

    /// Grid over the unit square `[0,1]^2`.
    pub fn unit_square(n: usize) -> Self {
        Self::new(Point::new(0.0, 0.0), 1.0, n)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid spacing `h = side / N`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn origin(&self) -> Point {
        self.origin
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    /// Nodes per side, `N + 1`.
    pub fn nodes_per_side(&self) -> usize {
        self.n + 1
    }

    pub fn node_count(&self) -> usize {
        (self.n + 1) * (self.n + 1)
    }

    pub fn cell_count(&self) -> usize {
        self.n * self.n
    }

    /// Row-major node id for lattice coordinates `(i, j)`.
    pub fn node_id(&self, i: usize, j: usize) -> usize {
        debug_assert!(i <= self.n && j <= self.n);
        j * (self.n + 1) + i
    }

    /// Lattice coordinates of a node id.
    pub fn node_ij(&self, id: usize) -> (usize, usize) {
        assert!(id < self.node_count(), "node id {id} out of range");
        (id % (self.n + 1), id / (self.n + 1))
    }

    /// Exact coordinate of a node: `origin + (i*h, j*h)`.
    pub fn node_coord(&self, id: usize) -> Point {
        let (i, j) = self.node_ij(id);
        Point::new(
            self.origin.x + i as f64 * self.h,
            self.origin.y + j as f64 * self.h,
        )
    }

    /// Row-major cell id for cell lattice coordinates `(i, j)`.
    pub fn cell_id(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        j * self.n + i
    }

    /// Cell lattice coordinates of a cell id.
    pub fn cell_ij(&self, cell: usize) -> (usize, usize) {
        assert!(cell < self.cell_count(), "cell id {cell} out of range");
        (cell % self.n, cell / self.n)
    }

    /// The four vertex node ids of a cell, counterclockwise starting at the
    /// lower-left corner.
    pub fn cell_vertices(&self, cell: usize) -> [usize; 4] {
        let (i, j) = self.cell_ij(cell);
        [
            self.node_id(i, j),
            self.node_id(i + 1, j),
            self.node_id(i + 1, j + 1),
            self.node_id(i, j + 1),
        ]
    }

    /// Physical coordinates of the four cell vertices, same order as
    /// [`cell_vertices`](Self::cell_vertices).
    pub fn cell_corner_coords(&self, cell: usize) -> [Point; 4] {
        self.cell_vertices(cell).map(|id| self.node_coord(id))
    }

    /// Lower-left corner of a cell.
    pub fn cell_origin(&self, cell: usize) -> Point {
        let (i, j) = self.cell_ij(cell);
        Point::new(
            self.origin.x + i as f64 * self.h,
            self.origin.y + j as f64 * self.h,
        )
    }

    /// The up-to-8 lattice neighbors `(x±h, y), (x, y±h), (x±h, y±h)` of a node.
    pub fn neighbors8(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.node_ij(id);
        let n = self.n as isize;
        let (i, j) = (i as isize, j as isize);
        const OFFSETS: [(isize, isize); 8] = [
            (-1, -1),
            (0, -1),
            (1, -1),
            (-1, 0),
            (1, 0),
            (-1, 1),
            (0, 1),
            (1, 1),
        ];
        OFFSETS.iter().filter_map(move |&(di, dj)| {
            let (ni, nj) = (i + di, j + dj);
            if ni >= 0 && ni <= n && nj >= 0 && nj <= n {
                Some(self.node_id(ni as usize, nj as usize))
            } else {
                None
            }
        })
    }

    /// Cell containing point `p`, clamped to the grid.
    pub fn cell_containing(&self, p: Point) -> usize {
        let fi = ((p.x - self.origin.x) / self.h).floor();
        let fj = ((p.y - self.origin.y) / self.h).floor();
        let i = (fi.max(0.0) as usize).min(self.n - 1);
        let j = (fj.max(0.0) as usize).min(self.n - 1);
        self.cell_id(i, j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_coords_row_major() {
        let g = GridTopology::unit_square(2);
        assert_eq!(g.node_coord(0), Point::new(0.0, 0.0));
        assert_eq!(g.node_coord(4), Point::new(0.5, 0.5));
        assert_eq!(g.node_coord(8), Point::new(1.0, 1.0));
    }

    #[test]
    fn cell_vertices_ccw() {
        let g = GridTopology::unit_square(2);
        assert_eq!(g.cell_vertices(0), [0, 1, 4, 3]);
        let g1 = GridTopology::unit_square(1);
        assert_eq!(g1.cell_vertices(0), [0, 1, 3, 2]);
    }

    #[test]
    fn first_and_third_vertex_are_diagonal() {
        let g = GridTopology::unit_square(5);
        for cell in 0..g.cell_count() {
            let v = g.cell_vertices(cell);
            let a = g.node_coord(v[0]);
            let c = g.node_coord(v[2]);
            assert!((a.x - c.x).abs() > 0.0 && (a.y - c.y).abs() > 0.0);
        }
    }

    #[test]
    fn node_membership_counts() {
        let g = GridTopology::unit_square(4);
        let mut membership = vec![0usize; g.node_count()];
        for cell in 0..g.cell_count() {
            for v in g.cell_vertices(cell) {
                membership[v] += 1;
            }
        }
        // Corners belong to one cell, interior nodes to four.
        assert_eq!(membership[g.node_id(0, 0)], 1);
        assert_eq!(membership[g.node_id(4, 4)], 1);
        assert_eq!(membership[g.node_id(2, 2)], 4);
    }

    #[test]
    fn cell_areas_sum_to_region_area() {
        let g = GridTopology::new(Point::new(-1.0, -1.0), 2.0, 7);
        let sum = g.h() * g.h() * g.cell_count() as f64;
        let exact = g.side() * g.side();
        assert!((sum - exact).abs() <= f64::EPSILON * exact);
    }

    #[test]
    #[should_panic]
    fn out_of_range_node_panics() {
        let g = GridTopology::unit_square(2);
        g.node_coord(9);
    }

    #[test]
    fn neighbors8_interior_and_corner() {
        let g = GridTopology::unit_square(3);
        assert_eq!(g.neighbors8(g.node_id(1, 1)).count(), 8);
        assert_eq!(g.neighbors8(g.node_id(0, 0)).count(), 3);
    }
}
