//! Validated experiment configuration.

use std::path::PathBuf;

use ghostfem::assembly2d::{BcKind, BoundaryDataMode};

use crate::domains::Domain;
use crate::runner::{RunError, SnapMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Convergence,
    Sweep1d,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Convergence => "convergence",
            Command::Sweep1d => "sweep1d",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub command: Command,
    pub domain: Domain,
    pub bc: BcKind,
    pub n_list: Vec<usize>,
    pub alpha_list: Vec<f64>,
    pub snap: SnapMode,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub out: PathBuf,
    pub theta1_list: Vec<f64>,
    pub theta2: f64,
    pub data_mode: BoundaryDataMode,
    pub cond: bool,
}

pub fn parse_bc(s: &str) -> Result<BcKind, RunError> {
    match s {
        "dirichlet" => Ok(BcKind::Dirichlet),
        "neumann" => Ok(BcKind::Neumann),
        "mixed" => Ok(BcKind::Mixed),
        other => Err(RunError::Usage(format!(
            "unknown boundary condition '{other}' (expected dirichlet, neumann or mixed)"
        ))),
    }
}

pub fn parse_domain(s: &str) -> Result<Domain, RunError> {
    Domain::parse(s).ok_or_else(|| {
        RunError::Usage(format!(
            "unknown domain '{s}' (expected interval, circle, flower, leaf or hourglass)"
        ))
    })
}

pub fn parse_usize_list(s: &str, what: &str) -> Result<Vec<usize>, RunError> {
    let list: Result<Vec<usize>, _> = s.split(',').map(|t| t.trim().parse::<usize>()).collect();
    let list = list.map_err(|_| RunError::Usage(format!("cannot parse {what} list '{s}'")))?;
    if list.is_empty() {
        return Err(RunError::Usage(format!("{what} list is empty")));
    }
    Ok(list)
}

pub fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>, RunError> {
    let list: Result<Vec<f64>, _> = s.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let list = list.map_err(|_| RunError::Usage(format!("cannot parse {what} list '{s}'")))?;
    if list.is_empty() {
        return Err(RunError::Usage(format!("{what} list is empty")));
    }
    Ok(list)
}

impl ExperimentConfig {
    /// Cross-field validation shared by every command.
    pub fn validate(&self) -> Result<(), RunError> {
        if !self.n_list.windows(2).all(|w| w[0] < w[1]) {
            return Err(RunError::Usage(
                "N values must be strictly increasing".into(),
            ));
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n < 4) {
            return Err(RunError::Usage(format!(
                "N = {n} is too coarse (need N >= 4)"
            )));
        }
        if self.alpha_list.iter().any(|&a| a <= 0.0 || !a.is_finite()) {
            return Err(RunError::Usage("alpha values must be positive".into()));
        }
        if let SnapMode::Exponent(e) = self.snap {
            if e <= 0.0 || !e.is_finite() {
                return Err(RunError::Usage("alpha-snap must be positive".into()));
            }
        }
        if self.tol <= 0.0 || !self.tol.is_finite() {
            return Err(RunError::Usage("tol must be positive".into()));
        }
        for &t in &self.theta1_list {
            if !(0.0..=1.0).contains(&t) {
                return Err(RunError::Usage(format!("theta1 = {t} outside [0, 1]")));
            }
        }
        if !(0.0..=1.0).contains(&self.theta2) {
            return Err(RunError::Usage(format!(
                "theta2 = {} outside [0, 1]",
                self.theta2
            )));
        }
        if self.domain.is_1d() && self.bc == BcKind::Neumann {
            return Err(RunError::Usage(
                "the 1D pure-Neumann problem is not part of the harness".into(),
            ));
        }
        if self.bc == BcKind::Mixed
            && !self.domain.is_1d()
            && self.domain.mixed_dirichlet_region().is_none()
        {
            return Err(RunError::Usage(format!(
                "mixed boundary conditions are not defined for {}",
                self.domain.name()
            )));
        }
        Ok(())
    }
}
