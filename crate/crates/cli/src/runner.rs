//! Experiment execution: single solves, convergence studies, and the 1D
//! theta sweep, all emitting deterministic CSV.

use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use rand::Rng as _;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ghostfem::assembly1d::{assemble_dirichlet_1d, assemble_mixed_1d, Interval1dSetup};
use ghostfem::assembly2d::{
    apply_neumann_gauge, assemble, project_zero_mean, BcKind, BoundaryDataMode, BvpSpec,
    DomainGeometry, ExactSolution, NEUMANN_COMPAT_TOL,
};
use ghostfem::levelset::NodeLabel;
use ghostfem::linalg::{cg_solve, cond_estimate, cond_estimate_dense, cond_estimate_op, dense};
use ghostfem::{analysis, mms, GridTopology, Point};

use crate::config::{Command, ExperimentConfig};
use crate::domains::Domain;

/// Failures are split by exit code: usage errors exit with 2, numeric or I/O
/// failures with 1.
#[derive(Debug)]
pub enum RunError {
    Usage(String),
    Numeric(String),
    Io(std::io::Error),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Usage(m) => write!(f, "usage error: {m}"),
            RunError::Numeric(m) => write!(f, "numeric failure: {m}"),
            RunError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e)
    }
}

/// How the level set is snapped before assembly.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SnapMode {
    /// Snapping exponent equal to the penalty exponent (threshold `1/lambda`).
    SameAsAlpha,
    Exponent(f64),
    Off,
}

impl SnapMode {
    fn exponent(&self, alpha: f64) -> Option<f64> {
        match self {
            SnapMode::SameAsAlpha => Some(alpha),
            SnapMode::Exponent(e) => Some(*e),
            SnapMode::Off => None,
        }
    }
}

/// One 2D manufactured-solution solve.
#[derive(Clone, Debug)]
pub struct Run2dParams {
    pub domain: Domain,
    pub bc: BcKind,
    pub n: usize,
    pub alpha: f64,
    pub snap: SnapMode,
    /// Circle center override (ignored by the other domains).
    pub center: Option<(f64, f64)>,
    pub data_mode: BoundaryDataMode,
    pub tol: f64,
    pub compute_cond: bool,
    /// Also report the relative symmetry defect of the assembled matrix.
    pub check_symmetry: bool,
}

impl Run2dParams {
    pub fn new(domain: Domain, bc: BcKind, n: usize, alpha: f64) -> Self {
        Run2dParams {
            domain,
            bc,
            n,
            alpha,
            snap: SnapMode::SameAsAlpha,
            center: None,
            data_mode: BoundaryDataMode::AnalyticAtQuadrature,
            tol: 1e-10,
            compute_cond: false,
            check_symmetry: false,
        }
    }
}

/// Measured quantities of a single solve.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub error: f64,
    pub grad_error: f64,
    pub cond: f64,
    pub iterations: usize,
    pub wall_time: f64,
    /// Relative symmetry defect of the assembled matrix (NaN unless requested).
    pub symmetry_defect: f64,
}

/// Build the manufactured-solution problem for a 2D domain.
pub fn bvp_for(domain: Domain, bc: BcKind, data_mode: BoundaryDataMode) -> Result<BvpSpec, String> {
    let mut spec = BvpSpec::new(bc);
    spec.f = Arc::new(mms::source_2d);
    spec.g_d = Arc::new(mms::exact_value_2d);
    spec.g_n = Arc::new(mms::neumann_data_2d);
    spec.exact = Some(mms::exact_solution_2d());
    spec.data_mode = data_mode;
    if bc == BcKind::Mixed {
        spec.dirichlet_region = domain.mixed_dirichlet_region().ok_or_else(|| {
            format!(
                "mixed boundary conditions are not defined for {}",
                domain.name()
            )
        })?;
    }
    Ok(spec)
}

/// Geometry for a 2D run (level set sampled, snapped, classified, cut).
pub fn geometry_for(
    domain: Domain,
    n: usize,
    alpha: f64,
    snap: SnapMode,
    center: Option<(f64, f64)>,
) -> Result<DomainGeometry, String> {
    let phi = domain
        .level_set(center)
        .ok_or_else(|| format!("{} is not a 2D domain", domain.name()))?;
    let (origin, side) = domain.region();
    let grid = GridTopology::new(origin, side, n);
    DomainGeometry::build(grid, &phi, snap.exponent(alpha)).map_err(|e| e.to_string())
}

/// Assemble, solve and measure one 2D problem.
pub fn run_2d(params: &Run2dParams) -> Result<RunOutcome, String> {
    let start = Instant::now();
    let spec = bvp_for(params.domain, params.bc, params.data_mode)?;
    let geom = geometry_for(
        params.domain,
        params.n,
        params.alpha,
        params.snap,
        params.center,
    )?;
    let h = geom.grid.h();
    let lambda = ghostfem::assembly2d::PENALTY_SAFETY * h.powf(-params.alpha);
    let sys = assemble(&spec, &geom, lambda).map_err(|e| e.to_string())?;
    let nn = sys.matrix.n();
    let max_iter = 40 * nn;
    let symmetry_defect = if params.check_symmetry {
        sys.matrix.symmetry_defect()
    } else {
        f64::NAN
    };

    let exact = spec.exact.clone().expect("manufactured problem");
    let m_quad = analysis::default_sample_density(params.n);

    let (u, iterations, cond) = match params.bc {
        BcKind::Neumann => {
            let gauged =
                apply_neumann_gauge(&sys, NEUMANN_COMPAT_TOL).map_err(|e| e.to_string())?;
            let sol =
                cg_solve(&gauged, &gauged.rhs, params.tol, max_iter).map_err(|e| e.to_string())?;
            let cond = if params.compute_cond {
                cond_estimate_op(&gauged.restricted()).map_err(|e| e.to_string())?
            } else {
                f64::NAN
            };
            (
                project_zero_mean(&sol.x, &sys.lumped_mass, &sys.active),
                sol.iterations,
                cond,
            )
        }
        _ => {
            let sol =
                cg_solve(&sys.matrix, &sys.rhs, params.tol, max_iter).map_err(|e| e.to_string())?;
            let cond = if params.compute_cond {
                cond_estimate(&sys.matrix, &sys.active).map_err(|e| e.to_string())?
            } else {
                f64::NAN
            };
            (sol.x, sol.iterations, cond)
        }
    };

    let (error, grad_error) = match params.bc {
        BcKind::Neumann => {
            // Fix the gauge constant of both fields before comparing.
            let mean = analysis::domain_mean(&geom, &mms::exact_value_2d, m_quad)
                .map_err(|e| e.to_string())?;
            let shifted = ExactSolution {
                u: Arc::new(move |p: Point| mms::exact_value_2d(p) - mean),
                grad: Arc::new(mms::exact_gradient_2d),
            };
            analysis::l2_errors(&u, &shifted, &geom, m_quad).map_err(|e| e.to_string())?
        }
        _ => analysis::l2_errors(&u, &exact, &geom, m_quad).map_err(|e| e.to_string())?,
    };

    Ok(RunOutcome {
        error,
        grad_error,
        cond,
        iterations,
        wall_time: start.elapsed().as_secs_f64(),
        symmetry_defect,
    })
}

/// Assemble, solve (dense LU) and measure one 1D problem.
pub fn run_1d(
    bc: BcKind,
    n: usize,
    theta1: f64,
    theta2: f64,
    alpha: f64,
    compute_cond: bool,
) -> Result<RunOutcome, String> {
    let start = Instant::now();
    let lambda = ghostfem::assembly2d::PENALTY_SAFETY * (n as f64).powf(alpha);
    let setup =
        Interval1dSetup::from_thetas(n, theta1, theta2, lambda).map_err(|e| e.to_string())?;
    let f: Vec<f64> = (0..=n).map(|i| mms::source_1d(setup.node_x(i))).collect();
    let sys = match bc {
        BcKind::Dirichlet => assemble_dirichlet_1d(
            &setup,
            &f,
            mms::exact_value_1d(setup.a),
            mms::exact_value_1d(setup.b),
        ),
        BcKind::Mixed => assemble_mixed_1d(
            &setup,
            &f,
            mms::exact_value_1d(setup.a),
            mms::exact_derivative_1d(setup.b),
        ),
        BcKind::Neumann => {
            return Err("the 1D pure-Neumann problem is not part of the harness".into())
        }
    };
    // The sweep visits cut parameters for which the penalized matrix is
    // symmetric but indefinite; a pivoting direct solve handles them all.
    let u = dense::solve_lu(sys.matrix.to_dense(), sys.rhs.clone());
    let (error, grad_error) = analysis::l2_errors_1d(
        &u,
        &mms::exact_value_1d,
        &mms::exact_derivative_1d,
        &setup,
        3 * n + 1,
    )
    .map_err(|e| e.to_string())?;
    let cond = if compute_cond {
        cond_estimate_dense(&sys.matrix).map_err(|e| e.to_string())?
    } else {
        f64::NAN
    };
    Ok(RunOutcome {
        error,
        grad_error,
        cond,
        iterations: 0,
        wall_time: start.elapsed().as_secs_f64(),
        symmetry_defect: sys.matrix.symmetry_defect(),
    })
}

/// The full sweep grid for the interval cut parameter:
/// 0.0010, 0.0015, ..., 0.9900.
pub fn paper_theta1_grid() -> Vec<f64> {
    (2..=1980).map(|k| k as f64 * 5e-4).collect()
}

fn fmt_f(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v}")
    }
}

const CSV_HEADER: &str =
    "command,domain,bc,N,h,alpha,alpha_snap,seed,sample,error,grad_error,cond,iters";

fn bc_name(bc: BcKind) -> &'static str {
    match bc {
        BcKind::Dirichlet => "dirichlet",
        BcKind::Neumann => "neumann",
        BcKind::Mixed => "mixed",
    }
}

struct Row {
    n: usize,
    h: f64,
    alpha: f64,
    alpha_snap: f64,
    sample: usize,
    error: f64,
    grad_error: f64,
    cond: f64,
    iters: usize,
}

fn write_rows(config: &ExperimentConfig, rows: &[Row], footer: &[String]) -> Result<(), RunError> {
    let mut out = String::new();
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            config.command.name(),
            config.domain.name(),
            bc_name(config.bc),
            r.n,
            fmt_f(r.h),
            fmt_f(r.alpha),
            fmt_f(r.alpha_snap),
            config.seed,
            r.sample,
            fmt_f(r.error),
            fmt_f(r.grad_error),
            fmt_f(r.cond),
            r.iters
        )
        .expect("writing to a string cannot fail");
    }
    for line in footer {
        out.push_str(line);
        out.push('\n');
    }
    std::fs::write(&config.out, out)?;
    Ok(())
}

/// Least-squares order fits for the footer, computed on finite rows only.
fn fit_footer(label: &str, pts: &[(f64, f64, f64, f64)]) -> String {
    // (h, error, grad_error, cond)
    let finite = |sel: fn(&(f64, f64, f64, f64)) -> f64| {
        let data: Vec<(f64, f64)> = pts
            .iter()
            .filter(|p| sel(p).is_finite() && sel(p) > 0.0)
            .map(|p| (p.0, sel(p)))
            .collect();
        match ghostfem::fit_order(&data) {
            Ok(v) => fmt_f(v),
            Err(_) => "nan".to_string(),
        }
    };
    format!(
        "# fit,{label},l2_order={},grad_order={},cond_slope={}",
        finite(|p| p.1),
        finite(|p| p.2),
        finite(|p| p.3),
    )
}

pub fn run(config: &ExperimentConfig) -> Result<(), RunError> {
    match config.command {
        Command::Solve => run_solve(config),
        Command::Convergence => run_convergence(config),
        Command::Sweep1d => run_sweep1d(config),
    }
}

/// Random circle centers `(0.5 + e0 h, 0.5 + e1 h)`: the offsets are drawn
/// once per sample from the seeded generator, then scaled by each grid's `h`.
fn center_offsets(config: &ExperimentConfig, samples: usize) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    (0..samples)
        .map(|_| (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0)))
        .collect()
}

fn run_convergence(config: &ExperimentConfig) -> Result<(), RunError> {
    let samples = if config.domain == Domain::Circle {
        config.samples.max(1)
    } else {
        1
    };
    let offsets = center_offsets(config, samples);
    let theta1 = config.theta1_list.first().copied().unwrap_or(0.5);

    struct Task {
        alpha: f64,
        n: usize,
        sample: usize,
    }
    let mut tasks = Vec::new();
    for &alpha in &config.alpha_list {
        for &n in &config.n_list {
            for sample in 0..samples {
                tasks.push(Task { alpha, n, sample });
            }
        }
    }

    let results: Vec<Result<RunOutcome, String>> = tasks
        .par_iter()
        .map(|t| {
            if config.domain.is_1d() {
                run_1d(config.bc, t.n, theta1, config.theta2, t.alpha, config.cond)
            } else {
                let h = config.domain.region().1 / t.n as f64;
                let center = (config.domain == Domain::Circle).then(|| {
                    let (e0, e1) = offsets[t.sample];
                    (0.5 + e0 * h, 0.5 + e1 * h)
                });
                run_2d(&Run2dParams {
                    domain: config.domain,
                    bc: config.bc,
                    n: t.n,
                    alpha: t.alpha,
                    snap: config.snap,
                    center,
                    data_mode: config.data_mode,
                    tol: config.tol,
                    compute_cond: config.cond,
                    check_symmetry: false,
                })
            }
        })
        .collect();

    // Average the measured quantities over the samples of each (alpha, N).
    let mut rows = Vec::new();
    let mut footer = Vec::new();
    let mut k = 0;
    for &alpha in &config.alpha_list {
        let mut pts = Vec::new();
        for &n in &config.n_list {
            let mut sum = (0.0, 0.0, 0.0);
            let mut iters = 0usize;
            let mut ok = 0usize;
            for _ in 0..samples {
                match &results[k] {
                    Ok(o) => {
                        sum.0 += o.error;
                        sum.1 += o.grad_error;
                        sum.2 += o.cond;
                        iters = iters.max(o.iterations);
                        ok += 1;
                    }
                    Err(msg) => {
                        eprintln!("warning: alpha={alpha} N={n} sample aborted: {msg}");
                    }
                }
                k += 1;
            }
            let h = if config.domain.is_1d() {
                1.0 / n as f64
            } else {
                config.domain.region().1 / n as f64
            };
            let (error, grad_error, cond) = if ok > 0 {
                (sum.0 / ok as f64, sum.1 / ok as f64, sum.2 / ok as f64)
            } else {
                (f64::NAN, f64::NAN, f64::NAN)
            };
            // The closed-form 1D assembly has no level-set snapping.
            let alpha_snap = if config.domain.is_1d() {
                f64::NAN
            } else {
                config.snap.exponent(alpha).unwrap_or(f64::NAN)
            };
            rows.push(Row {
                n,
                h,
                alpha,
                alpha_snap,
                sample: samples,
                error,
                grad_error,
                cond,
                iters,
            });
            pts.push((h, error, grad_error, cond));
        }
        footer.push(fit_footer(&format!("alpha={}", fmt_f(alpha)), &pts));
    }
    write_rows(config, &rows, &footer)
}

fn run_sweep1d(config: &ExperimentConfig) -> Result<(), RunError> {
    if !config.domain.is_1d() {
        return Err(RunError::Usage(format!(
            "sweep1d runs on the interval domain, not {}",
            config.domain.name()
        )));
    }
    let thetas = if config.theta1_list.is_empty() {
        paper_theta1_grid()
    } else {
        config.theta1_list.clone()
    };

    struct Task {
        t_idx: usize,
        alpha: f64,
        n: usize,
    }
    let mut tasks = Vec::new();
    for (t_idx, _) in thetas.iter().enumerate() {
        for &alpha in &config.alpha_list {
            for &n in &config.n_list {
                tasks.push(Task { t_idx, alpha, n });
            }
        }
    }
    let results: Vec<Result<RunOutcome, String>> = tasks
        .par_iter()
        .map(|t| {
            run_1d(
                config.bc,
                t.n,
                thetas[t.t_idx],
                config.theta2,
                t.alpha,
                config.cond,
            )
        })
        .collect();

    let mut rows = Vec::new();
    let mut footer: Vec<String> = thetas
        .iter()
        .enumerate()
        .map(|(i, t)| format!("# sweep_theta1,sample={i},theta1={}", fmt_f(*t)))
        .collect();
    let mut k = 0;
    for (t_idx, &theta1) in thetas.iter().enumerate() {
        for &alpha in &config.alpha_list {
            let mut pts = Vec::new();
            for &n in &config.n_list {
                let h = 1.0 / n as f64;
                match &results[k] {
                    Ok(o) => {
                        rows.push(Row {
                            n,
                            h,
                            alpha,
                            alpha_snap: f64::NAN,
                            sample: t_idx,
                            error: o.error,
                            grad_error: o.grad_error,
                            cond: o.cond,
                            iters: o.iterations,
                        });
                        pts.push((h, o.error, o.grad_error, o.cond));
                    }
                    Err(msg) => {
                        eprintln!("warning: theta1={theta1} alpha={alpha} N={n} aborted: {msg}");
                        rows.push(Row {
                            n,
                            h,
                            alpha,
                            alpha_snap: f64::NAN,
                            sample: t_idx,
                            error: f64::NAN,
                            grad_error: f64::NAN,
                            cond: f64::NAN,
                            iters: 0,
                        });
                    }
                }
                k += 1;
            }
            footer.push(fit_footer(
                &format!("theta1={},alpha={}", fmt_f(theta1), fmt_f(alpha)),
                &pts,
            ));
        }
    }
    write_rows(config, &rows, &footer)
}

fn run_solve(config: &ExperimentConfig) -> Result<(), RunError> {
    let n = *config.n_list.first().expect("validated");
    let alpha = *config.alpha_list.first().expect("validated");
    let mut out = String::new();
    out.push_str("node,x,y,u,label\n");

    if config.domain.is_1d() {
        let theta1 = config.theta1_list.first().copied().unwrap_or(0.5);
        let lambda = ghostfem::assembly2d::PENALTY_SAFETY * (n as f64).powf(alpha);
        let setup = Interval1dSetup::from_thetas(n, theta1, config.theta2, lambda)
            .map_err(|e| RunError::Numeric(e.to_string()))?;
        let f: Vec<f64> = (0..=n).map(|i| mms::source_1d(setup.node_x(i))).collect();
        let sys = match config.bc {
            BcKind::Dirichlet => assemble_dirichlet_1d(
                &setup,
                &f,
                mms::exact_value_1d(setup.a),
                mms::exact_value_1d(setup.b),
            ),
            BcKind::Mixed => assemble_mixed_1d(
                &setup,
                &f,
                mms::exact_value_1d(setup.a),
                mms::exact_derivative_1d(setup.b),
            ),
            BcKind::Neumann => {
                return Err(RunError::Usage(
                    "the 1D pure-Neumann problem is not part of the harness".into(),
                ))
            }
        };
        let u = dense::solve_lu(sys.matrix.to_dense(), sys.rhs.clone());
        for i in 0..=n {
            let x = setup.node_x(i);
            let label = if x >= setup.a && x <= setup.b {
                "Interior"
            } else {
                "Ghost"
            };
            writeln!(out, "{i},{},0,{},{label}", fmt_f(x), fmt_f(u[i])).unwrap();
        }
    } else {
        let geom =
            geometry_for(config.domain, n, alpha, config.snap, None).map_err(RunError::Numeric)?;
        let spec = bvp_for(config.domain, config.bc, config.data_mode).map_err(RunError::Usage)?;
        let lambda = ghostfem::assembly2d::PENALTY_SAFETY * geom.grid.h().powf(-alpha);
        let sys = assemble(&spec, &geom, lambda).map_err(|e| RunError::Numeric(e.to_string()))?;
        let u = match config.bc {
            BcKind::Neumann => {
                let gauged = apply_neumann_gauge(&sys, NEUMANN_COMPAT_TOL)
                    .map_err(|e| RunError::Numeric(e.to_string()))?;
                let sol = cg_solve(&gauged, &gauged.rhs, config.tol, 40 * sys.matrix.n())
                    .map_err(|e| RunError::Numeric(e.to_string()))?;
                project_zero_mean(&sol.x, &sys.lumped_mass, &sys.active)
            }
            _ => {
                cg_solve(&sys.matrix, &sys.rhs, config.tol, 40 * sys.matrix.n())
                    .map_err(|e| RunError::Numeric(e.to_string()))?
                    .x
            }
        };
        for id in 0..geom.grid.node_count() {
            let p = geom.grid.node_coord(id);
            let label = match geom.node_labels[id] {
                NodeLabel::Interior => "Interior",
                NodeLabel::Ghost => "Ghost",
                NodeLabel::Inactive => "Inactive",
            };
            writeln!(
                out,
                "{id},{},{},{},{label}",
                fmt_f(p.x),
                fmt_f(p.y),
                fmt_f(u[id])
            )
            .unwrap();
        }
    }
    std::fs::write(&config.out, out)?;
    Ok(())
}
