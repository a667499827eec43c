//! Nodal ghost finite elements on a regular square grid.
//!
//! The domain is described implicitly by a level-set function sampled at the
//! nodes of a uniform grid over a square region `R`. Bilinear elements live on
//! the grid; Dirichlet data is imposed weakly through a symmetric Nitsche
//! penalty, boundary integrals are evaluated exactly on the polygonal cut
//! cells, and tiny cuts are removed by snapping nodal values back to the grid.
//!
//! Module map:
//! - [`grid`]: square-grid topology, node/cell indexing.
//! - [`levelset`]: implicit domains, snapping, node/cell classification.
//! - [`geometry`]: cut-cell polygons, boundary segments and normals.
//! - [`quadrature`]: exact polynomial integration over polygons and segments.
//! - [`assembly1d`]: the one-dimensional discrete systems in closed form.
//! - [`assembly2d`]: Dirichlet/Neumann/mixed assembly over active nodes.
//! - [`linalg`]: CSR storage, preconditioned CG, condition estimation.
//! - [`analysis`]: discrete error norms and convergence-order fits.
//! - [`mms`]: manufactured solutions used by the experiment harness.
//! - [`reference`]: brute-force quadrature and dense eigen oracles for
//!   verification; independent of the production code paths.

pub mod analysis;
pub mod assembly1d;
pub mod assembly2d;
pub mod geometry;
pub mod grid;
pub mod levelset;
pub mod linalg;
pub mod mms;
pub mod quadrature;
pub mod reference;

pub use analysis::{fit_order, l2_errors, l2_errors_1d, ErrorReport};
pub use assembly1d::{
    assemble_dirichlet_1d, assemble_mixed_1d, build_blocks_1d, Blocks1d, Interval1dSetup,
    SparseSystem,
};
pub use assembly2d::{
    apply_neumann_gauge, assemble, AssembledSystem, BcKind, BoundaryDataMode, BvpSpec,
    DomainGeometry, ExactSolution,
};
pub use geometry::CutPolygon;
pub use grid::GridTopology;
pub use levelset::{classify_cells, classify_nodes, CellLabel, LevelSet, NodeLabel, NodeValues};
pub use linalg::{cg_solve, cond_estimate, CgSolution, CsrMatrix, LinearOperator, Triplets};

/// A point (or free vector) in the plane.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn sub(self, other: Point) -> Point {
        Point::new(self.x - other.x, self.y - other.y)
    }

    pub fn add(self, other: Point) -> Point {
        Point::new(self.x + other.x, self.y + other.y)
    }

    pub fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    /// Midpoint of the segment from `self` to `other`.
    pub fn midpoint(self, other: Point) -> Point {
        Point::new(0.5 * (self.x + other.x), 0.5 * (self.y + other.y))
    }

    /// Convex combination `(1 - t) * self + t * other`.
    pub fn lerp(self, other: Point, t: f64) -> Point {
        Point::new(
            (1.0 - t) * self.x + t * other.x,
            (1.0 - t) * self.y + t * other.y,
        )
    }
}
