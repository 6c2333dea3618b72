//! Region-of-applicability scan, Monte-Carlo timing benchmark and CSV output.

use std::f64::consts::PI;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::geometry::{LambertProblem, TransferGeometry};
use crate::oracle::reference_solve;
use crate::rootfind::ToleranceSpec;
use crate::solvers::{solve_normalized, SolveStatus, SolverId};

/// Velocity error below which a converged result counts as correct.
pub const CORRECT_TOL: f64 = 1e-6;
/// Gauss is only expected to be good to about a percent.
pub const GAUSS_CORRECT_TOL: f64 = 1e-1;

pub fn correctness_tol(id: SolverId) -> f64 {
    if id == SolverId::GaussSS {
        GAUSS_CORRECT_TOL
    } else {
        CORRECT_TOL
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub theta_steps: usize,
    pub tof_steps: usize,
    pub theta_range: (f64, f64),
    pub tof_range: (f64, f64),
    pub radius_ratio: f64,
    /// Theta nodes dropped next to each end of the range.
    pub theta_guard: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::square(200)
    }
}

impl GridSpec {
    pub fn square(n: usize) -> Self {
        Self {
            theta_steps: n,
            tof_steps: n,
            theta_range: (0.0, 2.0 * PI),
            tof_range: (0.0, 2.0 * PI),
            radius_ratio: 2.0,
            theta_guard: 1,
        }
    }

    /// Interior nodes `lo + k (hi - lo) / n`, `k = 1 .. n-1`; with an even
    /// count, theta = pi is a node.
    fn nodes(range: (f64, f64), n: usize, skip: usize) -> Vec<f64> {
        (1 + skip..n.saturating_sub(skip))
            .map(|k| range.0 + (range.1 - range.0) * (k as f64 / n as f64))
            .collect()
    }

    pub fn theta_nodes(&self) -> Vec<f64> {
        Self::nodes(self.theta_range, self.theta_steps, self.theta_guard)
    }

    pub fn tof_nodes(&self) -> Vec<f64> {
        Self::nodes(self.tof_range, self.tof_steps, 0)
    }

    pub fn theta_step(&self) -> f64 {
        (self.theta_range.1 - self.theta_range.0) / self.theta_steps as f64
    }

    pub fn tof_step(&self) -> f64 {
        (self.tof_range.1 - self.tof_range.0) / self.tof_steps as f64
    }

    pub fn cells(&self) -> Vec<(f64, f64)> {
        let tofs = self.tof_nodes();
        self.theta_nodes()
            .into_iter()
            .flat_map(|th| tofs.iter().map(move |&t| (th, t)))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellResult {
    pub theta: f64,
    pub tof: f64,
    pub solver: SolverId,
    pub status: SolveStatus,
    pub iterations: usize,
    /// `|v1 - v1_ref| / |v1_ref|`; NaN when not converged.
    pub velocity_error: f64,
    pub wall_time_ns: u64,
}

impl CellResult {
    pub fn converged(&self) -> bool {
        self.status.is_converged()
    }

    /// Converged and within the correctness tolerance of the reference.
    pub fn correct(&self) -> bool {
        self.converged() && self.velocity_error <= correctness_tol(self.solver)
    }
}

fn planar_geometry(theta: f64, tof: f64, ratio: f64) -> Option<TransferGeometry> {
    TransferGeometry::planar(ratio, theta, tof).ok()
}

fn reference_v1(theta: f64, tof: f64, ratio: f64) -> Option<Vector3<f64>> {
    let p = LambertProblem::planar(1.0, ratio, theta, tof, 1.0).ok()?;
    reference_solve(&p).ok().map(|(v1, _)| v1)
}

fn relative_error(v: &Vector3<f64>, reference: Option<&Vector3<f64>>) -> f64 {
    match reference {
        Some(r) => (v - r).norm() / r.norm(),
        None => f64::NAN,
    }
}

fn scan_cell(ids: &[SolverId], theta: f64, tof: f64, ratio: f64, tol: &ToleranceSpec) -> Vec<CellResult> {
    let geom = planar_geometry(theta, tof, ratio);
    let v_ref = reference_v1(theta, tof, ratio);
    ids.iter()
        .map(|&id| {
            let Some(geom) = geom.as_ref() else {
                return CellResult {
                    theta,
                    tof,
                    solver: id,
                    status: SolveStatus::Failed(crate::solvers::FailureReason::NonReal),
                    iterations: 0,
                    velocity_error: f64::NAN,
                    wall_time_ns: 0,
                };
            };
            let start = Instant::now();
            let out = solve_normalized(id, geom, tol);
            let wall = start.elapsed().as_nanos() as u64;
            let velocity_error = if out.status.is_converged() {
                relative_error(&out.v1, v_ref.as_ref())
            } else {
                f64::NAN
            };
            CellResult {
                theta,
                tof,
                solver: id,
                status: out.status,
                iterations: out.iterations,
                velocity_error,
                wall_time_ns: wall,
            }
        })
        .collect()
}

/// One result per (cell, solver), ordered by theta, then tof, then solver
/// order in `ids`. Everything but `wall_time_ns` is deterministic.
pub fn scan_region(ids: &[SolverId], grid: &GridSpec) -> Vec<CellResult> {
    scan_region_with(ids, grid, &ToleranceSpec::default())
}

pub fn scan_region_with(ids: &[SolverId], grid: &GridSpec, tol: &ToleranceSpec) -> Vec<CellResult> {
    grid.cells()
        .into_par_iter()
        .flat_map_iter(|(th, t)| scan_cell(ids, th, t, grid.radius_ratio, tol))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub repetitions: usize,
    pub radius_ratio: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            seed: 0,
            repetitions: 10,
            radius_ratio: 2.0,
        }
    }
}

/// Theta samples avoid the degenerate ends by this much.
const BENCH_THETA_GUARD: f64 = 1e-3;

/// Uniform `(theta, tof)` samples over the single-revolution square.
pub fn bench_samples(cfg: &BenchConfig) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.n_samples)
        .map(|_| {
            let theta = rng.random_range(BENCH_THETA_GUARD..2.0 * PI - BENCH_THETA_GUARD);
            let tof = rng.random_range(BENCH_THETA_GUARD..2.0 * PI);
            (theta, tof)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub solver: SolverId,
    pub samples: usize,
    /// Converged and correct samples; the timing statistics use only these.
    pub converged: usize,
    pub mean_ns: f64,
    pub median_ns: f64,
    pub p95_ns: f64,
    pub mean_iterations: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// Solvers ordered by mean time, fastest first.
    pub fn ranking(&self) -> Vec<SolverId> {
        let mut rows: Vec<&BenchRow> = self.rows.iter().filter(|r| r.converged > 0).collect();
        rows.sort_by(|a, b| a.mean_ns.total_cmp(&b.mean_ns));
        rows.into_iter().map(|r| r.solver).collect()
    }
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let idx = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[idx]
}

/// Median-of-`repetitions` time of one solve, after an untimed warm-up.
fn time_solve(id: SolverId, geom: &TransferGeometry, tol: &ToleranceSpec, reps: usize) -> f64 {
    std::hint::black_box(solve_normalized(id, geom, tol));
    let mut times: Vec<f64> = (0..reps.max(1))
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(solve_normalized(id, std::hint::black_box(geom), tol));
            start.elapsed().as_nanos() as f64
        })
        .collect();
    times.sort_by(f64::total_cmp);
    times[times.len() / 2]
}

struct SampleResult {
    correct: bool,
    iterations: usize,
    time_ns: f64,
}

pub fn run_bench(ids: &[SolverId], cfg: &BenchConfig) -> BenchReport {
    let tol = ToleranceSpec::default();
    let samples = bench_samples(cfg);
    // one sample per worker at a time; the solvers of a sample run back to back
    let per_sample: Vec<Vec<SampleResult>> = samples
        .par_iter()
        .map(|&(theta, tof)| {
            let geom = planar_geometry(theta, tof, cfg.radius_ratio);
            let v_ref = reference_v1(theta, tof, cfg.radius_ratio);
            ids.iter()
                .map(|&id| {
                    let Some(geom) = geom.as_ref() else {
                        return SampleResult {
                            correct: false,
                            iterations: 0,
                            time_ns: f64::NAN,
                        };
                    };
                    let out = solve_normalized(id, geom, &tol);
                    let err = relative_error(&out.v1, v_ref.as_ref());
                    let correct = out.status.is_converged() && err <= correctness_tol(id);
                    let time_ns = if correct {
                        time_solve(id, geom, &tol, cfg.repetitions)
                    } else {
                        f64::NAN
                    };
                    SampleResult {
                        correct,
                        iterations: out.iterations,
                        time_ns,
                    }
                })
                .collect()
        })
        .collect();

    let rows = ids
        .iter()
        .enumerate()
        .map(|(j, &id)| {
            let good: Vec<&SampleResult> = per_sample.iter().map(|s| &s[j]).filter(|s| s.correct).collect();
            let mut times: Vec<f64> = good.iter().map(|s| s.time_ns).collect();
            times.sort_by(f64::total_cmp);
            let n = good.len();
            let mean = |v: &mut dyn Iterator<Item = f64>| if n == 0 { f64::NAN } else { v.sum::<f64>() / n as f64 };
            BenchRow {
                solver: id,
                samples: samples.len(),
                converged: n,
                mean_ns: mean(&mut times.iter().copied()),
                median_ns: percentile(&times, 0.5),
                p95_ns: percentile(&times, 0.95),
                mean_iterations: mean(&mut good.iter().map(|s| s.iterations as f64)),
            }
        })
        .collect();
    BenchReport { config: *cfg, rows }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Writes scan results as CSV (LF line endings, 17 significant digits).
pub fn emit_csv(results: &[CellResult], path: &Path) -> Result<(), csv::Error> {
    write_csv(results, File::create(path)?)
}

pub fn write_csv<W: Write>(results: &[CellResult], out: W) -> Result<(), csv::Error> {
    let mut w = csv_writer(out);
    w.write_record([
        "theta",
        "tof",
        "solver",
        "status",
        "reason",
        "iterations",
        "velocity_error",
        "wall_time_ns",
    ])?;
    for r in results {
        let (status, reason) = match r.status {
            SolveStatus::Converged => ("Converged", ""),
            SolveStatus::Failed(reason) => ("Failed", reason.name()),
        };
        w.write_record([
            fmt_f64(r.theta),
            fmt_f64(r.tof),
            r.solver.name().to_string(),
            status.to_string(),
            reason.to_string(),
            r.iterations.to_string(),
            fmt_f64(r.velocity_error),
            r.wall_time_ns.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the benchmark timing table, one row per solver, in ranking order
/// followed by any solver without correct samples.
pub fn emit_bench_csv(report: &BenchReport, path: &Path) -> Result<(), csv::Error> {
    write_bench_csv(report, File::create(path)?)
}

pub fn write_bench_csv<W: Write>(report: &BenchReport, out: W) -> Result<(), csv::Error> {
    let mut w = csv_writer(out);
    w.write_record([
        "rank",
        "solver",
        "samples",
        "converged",
        "mean_ns",
        "median_ns",
        "p95_ns",
        "mean_iterations",
    ])?;
    let ranking = report.ranking();
    let ordered = ranking
        .iter()
        .filter_map(|id| report.rows.iter().find(|r| r.solver == *id))
        .chain(report.rows.iter().filter(|r| r.converged == 0));
    for (i, row) in ordered.enumerate() {
        w.write_record([
            (i + 1).to_string(),
            row.solver.name().to_string(),
            row.samples.to_string(),
            row.converged.to_string(),
            fmt_f64(row.mean_ns),
            fmt_f64(row.median_ns),
            fmt_f64(row.p95_ns),
            fmt_f64(row.mean_iterations),
        ])?;
    }
    w.flush()?;
    Ok(())
}
