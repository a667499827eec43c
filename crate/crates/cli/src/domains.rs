//! The experiment domains, their regions, and the mixed-boundary partitions.

use ghostfem::assembly2d::RegionPredicate;
use ghostfem::{LevelSet, Point};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Domain {
    Interval,
    Circle,
    Flower,
    Leaf,
    Hourglass,
}

impl Domain {
    pub fn parse(name: &str) -> Option<Domain> {
        match name {
            "interval" => Some(Domain::Interval),
            "circle" => Some(Domain::Circle),
            "flower" => Some(Domain::Flower),
            "leaf" => Some(Domain::Leaf),
            "hourglass" => Some(Domain::Hourglass),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Domain::Interval => "interval",
            Domain::Circle => "circle",
            Domain::Flower => "flower",
            Domain::Leaf => "leaf",
            Domain::Hourglass => "hourglass",
        }
    }

    pub fn is_1d(&self) -> bool {
        *self == Domain::Interval
    }

    /// Lower-left corner and side of the square region `R`.
    pub fn region(&self) -> (Point, f64) {
        match self {
            Domain::Flower | Domain::Hourglass => (Point::new(-1.0, -1.0), 2.0),
            _ => (Point::new(0.0, 0.0), 1.0),
        }
    }

    /// Level set of the 2D domains; `center` overrides the circle center.
    pub fn level_set(&self, center: Option<(f64, f64)>) -> Option<LevelSet> {
        match self {
            Domain::Interval => None,
            Domain::Circle => {
                let (xc, yc) = center.unwrap_or((0.5, 0.5));
                Some(LevelSet::Circle { xc, yc, r: 0.4 })
            }
            Domain::Flower => Some(LevelSet::Flower),
            Domain::Leaf => Some(LevelSet::Leaf),
            Domain::Hourglass => Some(LevelSet::Hourglass),
        }
    }

    /// Dirichlet half of the boundary for mixed problems; the rest is Neumann.
    pub fn mixed_dirichlet_region(&self) -> Option<RegionPredicate> {
        match self {
            Domain::Circle => Some(Arc::new(|p: Point| p.x <= 0.5)),
            Domain::Leaf => Some(Arc::new(|p: Point| p.x < 0.5)),
            Domain::Hourglass => Some(Arc::new(|p: Point| p.x <= 0.0)),
            _ => None,
        }
    }
}
