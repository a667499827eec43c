//! Shared fixtures for the pipeline benchmarks.

use std::sync::Arc;

use ghostfem::assembly2d::{assemble, AssembledSystem, BcKind, BvpSpec, DomainGeometry};
use ghostfem::{mms, GridTopology, LevelSet};

/// Circle geometry at the given resolution, snapped with exponent 2.
pub fn circle_geometry(n: usize) -> DomainGeometry {
    let phi = LevelSet::Circle {
        xc: 0.5,
        yc: 0.5,
        r: 0.4,
    };
    DomainGeometry::build(GridTopology::unit_square(n), &phi, Some(2.0)).unwrap()
}

/// Manufactured Dirichlet problem on the circle.
pub fn circle_problem(n: usize) -> (DomainGeometry, AssembledSystem) {
    let geom = circle_geometry(n);
    let mut spec = BvpSpec::new(BcKind::Dirichlet);
    spec.f = Arc::new(mms::source_2d);
    spec.g_d = Arc::new(mms::exact_value_2d);
    spec.exact = Some(mms::exact_solution_2d());
    let lambda = geom.grid.h().powi(-2);
    let sys = assemble(&spec, &geom, lambda).unwrap();
    (geom, sys)
}
