//! End-to-end checks of the command-line interface: output formats,
//! determinism of the CSV bytes, and exit codes.

use std::path::Path;
use std::process::Command;

fn ghostfem() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ghostfem"))
}

fn run_to_file(args: &[&str], out: &Path) -> std::process::Output {
    let mut all: Vec<&str> = args.to_vec();
    let out_str = out.to_str().unwrap().to_owned();
    all.push("--out");
    all.push(&out_str);
    ghostfem().args(&all).output().expect("spawn ghostfem")
}

#[test]
fn convergence_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "convergence",
        "--domain",
        "circle",
        "--bc",
        "dirichlet",
        "--n",
        "10,20",
        "--alpha",
        "2,1.5",
        "--samples",
        "3",
        "--seed",
        "7",
        "--cond",
        "on",
    ];
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert!(run_to_file(&args, &a).status.success());
    assert!(run_to_file(&args, &b).status.success());
    let bytes_a = std::fs::read(&a).unwrap();
    let bytes_b = std::fs::read(&b).unwrap();
    assert_eq!(
        bytes_a, bytes_b,
        "identical config + seed must give identical bytes"
    );
    assert!(!bytes_a.is_empty());
}

#[test]
fn convergence_header_and_row_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let args = [
        "convergence",
        "--domain",
        "circle",
        "--n",
        "10,20,40",
        "--alpha",
        "2",
        "--samples",
        "2",
        "--cond",
        "off",
    ];
    assert!(run_to_file(&args, &out).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "command,domain,bc,N,h,alpha,alpha_snap,seed,sample,error,grad_error,cond,iters"
    );
    let data: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("command"))
        .collect();
    // One row per (alpha, N), sample quantities averaged.
    assert_eq!(data.len(), 3);
    for row in &data {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 13);
        assert_eq!(fields[0], "convergence");
        assert_eq!(fields[1], "circle");
        assert_eq!(fields[8], "2"); // samples averaged
        let err: f64 = fields[9].parse().unwrap();
        assert!(err > 0.0 && err < 1.0);
    }
    assert!(text.lines().any(|l| l.starts_with("# fit,alpha=2")));
}

#[test]
fn convergence_emits_one_row_per_alpha_and_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ma.csv");
    let args = [
        "convergence",
        "--domain",
        "circle",
        "--n",
        "10,16,20",
        "--alpha",
        "2,1.5",
        "--samples",
        "4",
        "--cond",
        "off",
    ];
    assert!(run_to_file(&args, &out).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let data: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("command"))
        .collect();
    assert_eq!(data.len(), 6, "3 sizes x 2 alphas");
    assert_eq!(text.lines().filter(|l| l.starts_with("# fit")).count(), 2);
}

#[test]
fn one_dimensional_convergence_through_the_cli() {
    // Exercises the dense-LU solve and the indefinite-capable conditioning
    // estimate end to end.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("i.csv");
    let args = [
        "convergence",
        "--domain",
        "interval",
        "--bc",
        "mixed",
        "--n",
        "20,40,80",
        "--alpha",
        "2",
        "--theta1",
        "0.37",
        "--cond",
        "on",
    ];
    assert!(run_to_file(&args, &out).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    for row in text.lines().skip(1).filter(|l| !l.starts_with('#')) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[6], "nan"); // no level-set snapping in 1D
        assert_eq!(fields[12], "0"); // direct solve
        let cond: f64 = fields[11].parse().unwrap();
        assert!(cond.is_finite() && cond > 1.0);
    }
    let fit = text.lines().find(|l| l.starts_with("# fit")).unwrap();
    let order: f64 = fit
        .split("l2_order=")
        .nth(1)
        .unwrap()
        .split(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!((1.8..=2.2).contains(&order), "{order}");
}

#[test]
fn failed_row_aborts_with_diagnostic_not_the_run() {
    // At N = 4 the hourglass has no sample point inside the domain; the row
    // must be reported as nan with a stderr diagnostic while the finer rows
    // and the run itself survive.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("coarse.csv");
    let output = run_to_file(
        &["convergence", "--domain", "hourglass", "--n", "4,8,16", "--alpha", "2", "--cond", "off"],
        &out,
    );
    assert!(output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("aborted"), "stderr: {stderr}");
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("command"))
        .collect();
    assert_eq!(rows.len(), 3);
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(first[9], "nan");
    let last: Vec<&str> = rows[2].split(',').collect();
    let err: f64 = last[9].parse().unwrap();
    assert!(err.is_finite() && err > 0.0);
}

#[test]
fn paper_theta_grid_has_the_full_sweep_size() {
    let grid = ghostfem_cli::paper_theta1_grid();
    assert_eq!(grid.len(), 1979);
    assert!((grid[0] - 0.0010).abs() < 1e-15);
    assert!((grid[1] - 0.0015).abs() < 1e-15);
    assert!((grid[grid.len() - 1] - 0.9900).abs() < 1e-12);
}

#[test]
fn solve_outputs_one_row_per_node_with_zero_on_inactive() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve.csv");
    assert!(run_to_file(
        &["solve", "--domain", "circle", "--n", "40", "--alpha", "2"],
        &out
    )
    .status
    .success());
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 41 * 41);
    let mut saw_inactive = false;
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), 5);
        if fields[4] == "Inactive" {
            saw_inactive = true;
            assert_eq!(fields[3].parse::<f64>().unwrap(), 0.0);
        }
    }
    assert!(saw_inactive);
}

#[test]
fn solve_1d_mixed_matches_exact_solution_at_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("solve1d.csv");
    assert!(run_to_file(
        &["solve", "--domain", "interval", "--bc", "mixed", "--n", "20", "--alpha", "2"],
        &out
    )
    .status
    .success());
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 21);
    let mut max_dev: f64 = 0.0;
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        let x: f64 = fields[1].parse().unwrap();
        let u: f64 = fields[3].parse().unwrap();
        max_dev = max_dev.max((u - (5.0 * x + 1.0).sin()).abs());
    }
    assert!(max_dev < 0.05, "max nodal deviation {max_dev}");
}

#[test]
fn unknown_domain_is_a_usage_error_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let output = run_to_file(&["solve", "--domain", "pentagon", "--n", "10"], &out);
    assert_eq!(output.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn unsorted_n_list_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("never.csv");
    let output = run_to_file(&["convergence", "--domain", "circle", "--n", "40,20"], &out);
    assert_eq!(output.status.code(), Some(2));
    assert!(!out.exists());
}

#[test]
fn missing_required_flag_exits_with_usage_code() {
    let output = ghostfem()
        .args(["solve", "--domain", "circle"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
}

/// With theta1 = theta2 = 1 the interval covers [0, 1] and the assembled rows
/// are classical; an independently hand-written tridiagonal system (textbook
/// stiffness plus the explicit boundary terms) solved by the Thomas algorithm
/// must reproduce the solution to 1e-12.
#[test]
fn sweep_at_unit_thetas_matches_textbook_tridiagonal_solve() {
    use ghostfem::mms;

    let n = 64usize;
    let h = 1.0 / n as f64;
    let alpha = 2.0;
    let lambda = ghostfem::assembly2d::PENALTY_SAFETY * (n as f64).powf(alpha);

    // Hand-built tridiagonal mixed system at theta1 = theta2 = 1:
    // row i: (-1/h) u_{i-1} + (2/h) u_i + (-1/h) u_{i+1} = (h/6)(f_{i-1} + 4 f_i + f_{i+1})
    // with Nitsche modifications at row 0/1 and the Neumann datum at row N.
    let f: Vec<f64> = (0..=n).map(|i| mms::source_1d(i as f64 * h)).collect();
    let u_a = mms::exact_value_1d(0.0);
    let g_b = mms::exact_derivative_1d(1.0);
    let mut lower = vec![0.0; n + 1];
    let mut diag = vec![0.0; n + 1];
    let mut upper = vec![0.0; n + 1];
    let mut rhs = vec![0.0; n + 1];
    for i in 1..n {
        lower[i] = -1.0 / h;
        diag[i] = 2.0 / h;
        upper[i] = -1.0 / h;
        rhs[i] = h / 6.0 * (f[i - 1] + 4.0 * f[i] + f[i + 1]);
    }
    // Trace values at a = 0: phi_0(a) = 1, phi_1(a) = 0, phi_0'(a) = -1/h,
    // phi_1'(a) = 1/h. The Nitsche terms are phi_j'(a)phi_i(a) + phi_j(a)phi_i'(a).
    diag[0] = 1.0 / h + 2.0 * (-1.0 / h) + lambda;
    upper[0] = -1.0 / h + (1.0 / h * 1.0 + 0.0 * (-1.0 / h));
    lower[1] = -1.0 / h + ((-1.0 / h) * 0.0 + 1.0 * (1.0 / h));
    rhs[0] = h / 6.0 * (2.0 * f[0] + f[1]) + u_a * (-1.0 / h) + lambda * u_a;
    rhs[1] += u_a * (1.0 / h);
    // Neumann end: stiffness row N is (-1/h, 1/h); load picks up g_b.
    lower[n] = -1.0 / h;
    diag[n] = 1.0 / h;
    rhs[n] = h / 6.0 * (f[n - 1] + 2.0 * f[n]) + g_b;

    // Thomas algorithm.
    let mut c = vec![0.0; n + 1];
    let mut d = vec![0.0; n + 1];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..=n {
        let m = diag[i] - lower[i] * c[i - 1];
        c[i] = if i < n { upper[i] / m } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    let mut reference = vec![0.0; n + 1];
    reference[n] = d[n];
    for i in (0..n).rev() {
        reference[i] = d[i] - c[i] * reference[i + 1];
    }

    let setup = ghostfem::Interval1dSetup::from_thetas(n, 1.0, 1.0, lambda).unwrap();
    let sys = ghostfem::assemble_mixed_1d(&setup, &f, u_a, g_b);
    let u = ghostfem::linalg::dense::solve_lu(sys.matrix.to_dense(), sys.rhs.clone());
    for i in 0..=n {
        assert!(
            (u[i] - reference[i]).abs() < 1e-12,
            "node {i}: {} vs {}",
            u[i],
            reference[i]
        );
    }
}
