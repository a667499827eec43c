//! Experiment harness for the nodal ghost finite element method.
//!
//! Three commands, all writing CSV:
//! - `solve`: one problem, per-node solution values with classification labels.
//! - `convergence`: refinement study over N and alpha lists; for the circle
//!   the errors are averaged over seeded random center placements.
//! - `sweep1d`: the interval problem swept over the cut parameter theta1.

pub mod config;
pub mod domains;
pub mod runner;

pub use config::{Command, ExperimentConfig};
pub use domains::Domain;
pub use runner::{
    bvp_for, geometry_for, paper_theta1_grid, run, run_1d, run_2d, Run2dParams, RunError,
    RunOutcome, SnapMode,
};
