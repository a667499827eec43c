use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ghostfem::assembly2d::BoundaryDataMode;
use ghostfem_cli::config::{
    parse_bc, parse_domain, parse_f64_list, parse_usize_list, Command, ExperimentConfig,
};
use ghostfem_cli::runner::{run, RunError, SnapMode};

#[derive(Parser)]
#[command(
    name = "ghostfem",
    about = "Nodal ghost finite elements on level-set domains: solves, convergence studies, theta sweeps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Solve one problem and write the per-node solution.
    Solve(CommonArgs),
    /// Refinement study over the N and alpha lists.
    Convergence(CommonArgs),
    /// Sweep the 1D cut parameter theta1 over the N and alpha lists.
    Sweep1d(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Domain name: interval, circle, flower, leaf, hourglass.
    #[arg(long)]
    domain: String,

    /// Boundary conditions: dirichlet, neumann, mixed.
    #[arg(long, default_value = "dirichlet")]
    bc: String,

    /// Comma-separated subdivisions per side, strictly increasing.
    #[arg(long, default_value = "20,40,80,160,320")]
    n: String,

    /// Comma-separated penalty exponents; the penalty is h^(-alpha).
    #[arg(long, default_value = "2")]
    alpha: String,

    /// Snapping exponent; defaults to alpha (threshold 1/lambda). 0 disables snapping.
    #[arg(long)]
    alpha_snap: Option<f64>,

    /// Random circle centers to average over.
    #[arg(long, default_value_t = 1)]
    samples: usize,

    /// RNG seed for the center placement.
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Relative residual tolerance of the conjugate gradient solver.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,

    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,

    /// Comma-separated theta1 values (sweep1d defaults to the full
    /// 0.0010:0.0005:0.9900 grid; solve/convergence default to 0.5).
    #[arg(long)]
    theta1: Option<String>,

    /// Fixed theta2 for the interval problem.
    #[arg(long, default_value_t = 1e-3)]
    theta2: f64,

    /// Boundary data mode: analytic (at quadrature points) or nodal.
    #[arg(long, default_value = "analytic")]
    data_mode: String,

    /// Compute condition numbers (on|off). Costly on fine grids.
    #[arg(long, default_value = "on")]
    cond: String,
}

fn build_config(command: Command, args: &CommonArgs) -> Result<ExperimentConfig, RunError> {
    let domain = parse_domain(&args.domain)?;
    let bc = parse_bc(&args.bc)?;
    let n_list = parse_usize_list(&args.n, "N")?;
    let alpha_list = parse_f64_list(&args.alpha, "alpha")?;
    let snap = match args.alpha_snap {
        None => SnapMode::SameAsAlpha,
        Some(0.0) => SnapMode::Off,
        Some(e) => SnapMode::Exponent(e),
    };
    let theta1_list = match &args.theta1 {
        Some(s) => parse_f64_list(s, "theta1")?,
        None if command == Command::Sweep1d => Vec::new(), // full paper grid
        None => vec![0.5],
    };
    let data_mode = match args.data_mode.as_str() {
        "analytic" => BoundaryDataMode::AnalyticAtQuadrature,
        "nodal" => BoundaryDataMode::NodalInterpolant,
        other => {
            return Err(RunError::Usage(format!(
                "unknown data mode '{other}' (expected analytic or nodal)"
            )))
        }
    };
    let cond = match args.cond.as_str() {
        "on" => true,
        "off" => false,
        other => {
            return Err(RunError::Usage(format!(
                "unknown cond setting '{other}' (expected on or off)"
            )))
        }
    };
    let config = ExperimentConfig {
        command,
        domain,
        bc,
        n_list,
        alpha_list,
        snap,
        samples: args.samples,
        seed: args.seed,
        tol: args.tol,
        out: args.out.clone(),
        theta1_list,
        theta2: args.theta2,
        data_mode,
        cond,
    };
    config.validate()?;
    Ok(config)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match &cli.command {
        CliCommand::Solve(a) => (Command::Solve, a),
        CliCommand::Convergence(a) => (Command::Convergence, a),
        CliCommand::Sweep1d(a) => (Command::Sweep1d, a),
    };
    let config = match build_config(command, args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    match run(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Usage(m)) => {
            eprintln!("usage error: {m}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(1)
        }
    }
}
