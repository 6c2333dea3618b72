use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lambert_core::harness::{self, BenchConfig, GridSpec};
use lambert_core::{solve, LambertProblem, SolverId, ToleranceSpec, Vector3};

const EXIT_INVALID: u8 = 2;
const EXIT_SOLVER_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "lambert",
    version,
    about = "Single-revolution Lambert solvers: solve, region scan, benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one Lambert problem
    Solve(SolveArgs),
    /// Scan the (theta, tof) plane and write one CSV row per cell and solver
    Scan(ScanArgs),
    /// Monte-Carlo timing benchmark
    Bench(BenchArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Departure position, "x,y,z"
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    r1: Vector3<f64>,
    /// Arrival position, "x,y,z"
    #[arg(long, value_parser = parse_vec3, allow_hyphen_values = true)]
    r2: Vector3<f64>,
    /// Time of flight
    #[arg(long)]
    tof: f64,
    /// Gravitational parameter
    #[arg(long)]
    mu: f64,
    /// Take the transfer angle greater than pi
    #[arg(long)]
    long_way: bool,
    /// Solver name, or "all"
    #[arg(long, default_value = "all")]
    solver: String,
    /// Convergence tolerance on normalized time
    #[arg(long, default_value_t = lambert_core::rootfind::DEFAULT_TIME_TOL)]
    time_tol: f64,
}

#[derive(Args)]
struct ScanArgs {
    /// Comma-separated solver names (default: all)
    #[arg(long, value_delimiter = ',')]
    solvers: Vec<String>,
    /// Steps per axis over (0, 2 pi)
    #[arg(long, default_value_t = 200)]
    grid: usize,
    /// r2 / r1
    #[arg(long, default_value_t = 2.0)]
    ratio: f64,
    /// Output CSV (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Timed repetitions per sample (median is kept)
    #[arg(long, default_value_t = 10)]
    repetitions: usize,
    /// Comma-separated solver names (default: all)
    #[arg(long, value_delimiter = ',')]
    solvers: Vec<String>,
    /// Output CSV with the timing table
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_vec3(s: &str) -> Result<Vector3<f64>, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("'{p}': {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, z] => Ok(Vector3::new(x, y, z)),
        _ => Err(format!("expected three comma-separated numbers, got {}", parts.len())),
    }
}

fn parse_solvers(names: &[String]) -> Result<Vec<SolverId>, String> {
    if names.is_empty() || names.iter().any(|n| n.eq_ignore_ascii_case("all")) {
        return Ok(SolverId::ALL.to_vec());
    }
    names
        .iter()
        .map(|n| n.parse::<SolverId>().map_err(|e| e.to_string()))
        .collect()
}

fn invalid(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_INVALID)
}

fn fmt_vec(v: &Vector3<f64>) -> String {
    format!("[{:.15e}, {:.15e}, {:.15e}]", v.x, v.y, v.z)
}

fn run_solve(args: SolveArgs) -> ExitCode {
    let ids = match parse_solvers(std::slice::from_ref(&args.solver)) {
        Ok(ids) => ids,
        Err(e) => return invalid(e),
    };
    let problem = match LambertProblem::new(args.r1, args.r2, args.tof, args.mu, args.long_way) {
        Ok(p) => p,
        Err(e) => return invalid(e),
    };
    let tol = match ToleranceSpec::new(args.time_tol, lambert_core::rootfind::DEFAULT_MAX_ITER) {
        Ok(t) => t,
        Err(e) => return invalid(e),
    };
    let mut any_converged = false;
    let mut out = io::stdout().lock();
    for id in &ids {
        let o = solve(*id, &problem, &tol);
        let status = match o.status.reason() {
            None => {
                any_converged = true;
                "Converged".to_string()
            }
            Some(r) => format!("Failed({r})"),
        };
        let _ = writeln!(
            out,
            "{:<16} {:<24} iterations={:<3} residual={:.3e} v1={} v2={}",
            id.name(),
            status,
            o.iterations,
            o.time_residual,
            fmt_vec(&o.v1),
            fmt_vec(&o.v2)
        );
    }
    // a single solver must converge; with "all", at least one must
    if any_converged {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_SOLVER_FAILURE)
    }
}

fn run_scan(args: ScanArgs) -> ExitCode {
    let ids = match parse_solvers(&args.solvers) {
        Ok(ids) => ids,
        Err(e) => return invalid(e),
    };
    if args.grid < 4 {
        return invalid("--grid must be at least 4");
    }
    if args.ratio.is_nan() || args.ratio <= 0.0 {
        return invalid("--ratio must be positive");
    }
    let grid = GridSpec {
        radius_ratio: args.ratio,
        ..GridSpec::square(args.grid)
    };
    let results = harness::scan_region(&ids, &grid);
    let written = match &args.out {
        Some(path) => harness::emit_csv(&results, path),
        None => harness::write_csv(&results, io::stdout().lock()),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::FAILURE;
    }
    let cells = grid.cells().len();
    for id in &ids {
        let conv = results.iter().filter(|r| r.solver == *id && r.converged()).count();
        eprintln!("{:<16} converged {conv}/{cells}", id.name());
    }
    ExitCode::SUCCESS
}

fn run_bench(args: BenchArgs) -> ExitCode {
    let ids = match parse_solvers(&args.solvers) {
        Ok(ids) => ids,
        Err(e) => return invalid(e),
    };
    if args.samples == 0 || args.repetitions == 0 {
        return invalid("--samples and --repetitions must be at least 1");
    }
    let cfg = BenchConfig {
        n_samples: args.samples,
        seed: args.seed,
        repetitions: args.repetitions,
        ..Default::default()
    };
    let report = harness::run_bench(&ids, &cfg);
    if let Some(path) = &args.out {
        if let Err(e) = harness::emit_bench_csv(&report, path) {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    let mut out = io::stdout().lock();
    let _ = writeln!(
        out,
        "{:>4} {:<16} {:>9} {:>11} {:>11} {:>11} {:>7}",
        "rank", "solver", "converged", "mean_ns", "median_ns", "p95_ns", "iters"
    );
    for (i, id) in report.ranking().iter().enumerate() {
        let r = report
            .rows
            .iter()
            .find(|r| r.solver == *id)
            .expect("ranked solvers have rows");
        let _ = writeln!(
            out,
            "{:>4} {:<16} {:>9} {:>11.1} {:>11.1} {:>11.1} {:>7.2}",
            i + 1,
            id.name(),
            r.converged,
            r.mean_ns,
            r.median_ns,
            r.p95_ns,
            r.mean_iterations
        );
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Scan(a) => run_scan(a),
        Command::Bench(a) => run_bench(a),
    }
}
