//! Acceptance runner: one PASS/FAIL line per criterion.
//!
//! Criteria known not to be met are listed in `KNOWN_FAIL` and still print
//! FAIL; the process exits non-zero only when some other criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::HashMap;
use std::f64::consts::PI;
use std::process::Command;
use std::time::Instant;

use lambert_core::harness::{scan_region, CellResult, GridSpec};
use lambert_core::solvers::solve_normalized;
use lambert_core::{FailureReason, SolverId, ToleranceSpec, TransferGeometry, Vector3};

const KNOWN_FAIL: &[u32] = &[1, 4, 5];
const GRID: usize = 200;

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn report(o: &Outcome) {
    println!(
        "{} {}. {}: {}",
        if o.pass { "PASS" } else { "FAIL" },
        o.id,
        o.title,
        o.detail
    );
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    sorted[((sorted.len() - 1) as f64 * q).round() as usize]
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    quantile(&v, 0.5)
}

struct Scan {
    grid: GridSpec,
    by_solver: HashMap<SolverId, Vec<CellResult>>,
}

impl Scan {
    fn run() -> Self {
        let grid = GridSpec::square(GRID);
        let mut by_solver: HashMap<SolverId, Vec<CellResult>> = HashMap::new();
        for r in scan_region(&SolverId::ALL, &grid) {
            by_solver.entry(r.solver).or_default().push(r);
        }
        Self { grid, by_solver }
    }

    fn cells(&self, id: SolverId) -> &[CellResult] {
        &self.by_solver[&id]
    }

    fn failed(&self, id: SolverId) -> impl Iterator<Item = &CellResult> {
        self.cells(id).iter().filter(|c| !c.converged())
    }

    fn step(&self) -> f64 {
        self.grid.theta_step()
    }

    fn on_pi_column(&self, c: &CellResult) -> bool {
        (c.theta - PI).abs() < 0.5 * self.step()
    }
}

fn hyperbolic(c: &CellResult, ratio: f64) -> bool {
    let g = TransferGeometry::planar(ratio, c.theta, c.tof).unwrap();
    c.tof < g.parabolic_time()
}

fn criterion_1() -> Outcome {
    let (pass, detail) = match common::oracle_suite(10_000, 2024) {
        Ok(s) => {
            let secs = s.elapsed.as_secs_f64();
            (
                s.over.is_empty() && secs < 30.0,
                format!(
                    "{} of {} problems over 1e-11 (worst {:.2e}) in {secs:.2} s",
                    s.over.len(),
                    s.problems,
                    s.worst
                ),
            )
        }
        Err(e) => (false, e),
    };
    Outcome {
        id: 1,
        title: "oracle suite",
        pass,
        detail,
    }
}

fn criterion_2(scan: &Scan) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for id in [SolverId::GoodingHalley, SolverId::IzzoHouseholder] {
        let cells = scan.cells(id);
        let conv = cells.iter().filter(|c| c.converged()).count();
        let worst =
            cells
                .iter()
                .map(|c| c.velocity_error)
                .fold(0.0f64, |a, e| if e.is_nan() { f64::INFINITY } else { a.max(e) });
        pass &= conv == cells.len() && worst <= 1e-9;
        parts.push(format!("{id} {conv}/{} worst error {worst:.2e}", cells.len()));
    }
    Outcome {
        id: 2,
        title: "robust-solver coverage",
        pass,
        detail: parts.join("; "),
    }
}

fn criterion_3(scan: &Scan) -> Outcome {
    let stats = |id: SolverId| {
        let mut it: Vec<f64> = scan
            .cells(id)
            .iter()
            .filter(|c| c.converged())
            .map(|c| c.iterations as f64)
            .collect();
        it.sort_by(f64::total_cmp);
        let mean = it.iter().sum::<f64>() / it.len() as f64;
        (mean, quantile(&it, 0.99), it[0], it[it.len() - 1])
    };
    let izzo = stats(SolverId::IzzoHouseholder);
    let rf = stats(SolverId::IzzoRegulaFalsi);
    let gooding = stats(SolverId::GoodingHalley);
    let bis = stats(SolverId::BateBisection);
    let battin = stats(SolverId::BattinSS);
    let pass = izzo.0 <= 3.5
        && izzo.1 <= 5.0
        && (4.0..=8.0).contains(&rf.0)
        && gooding.2 == 3.0
        && gooding.3 == 3.0
        && (30.0..=55.0).contains(&bis.0)
        && (3.0..=10.0).contains(&battin.0);
    let detail = format!(
        "IzzoHouseholder mean {:.2} p99 {}; IzzoRegulaFalsi mean {:.2}; GoodingHalley {}..{}; BateBisection mean {:.2}; BattinSS mean {:.2}",
        izzo.0, izzo.1, rf.0, gooding.2, gooding.3, bis.0, battin.0
    );
    Outcome {
        id: 3,
        title: "iteration counts",
        pass,
        detail,
    }
}

fn criterion_4(scan: &Scan) -> Outcome {
    let ratio = scan.grid.radius_ratio;
    let total = scan.grid.cells().len() as f64;
    let step = scan.step();
    let mut parts = Vec::new();
    let mut pass = true;
    let mut record = |ok: bool, text: String| {
        pass &= ok;
        parts.push(format!("[{}] {text}", if ok { "ok" } else { "no" }));
    };

    // Lagrange
    let lag: Vec<&CellResult> = scan.failed(SolverId::LagrangeNR).collect();
    let stragglers = lag
        .iter()
        .filter(|c| !(hyperbolic(c, ratio) && c.tof < PI / 4.0))
        .count();
    let frac = stragglers as f64 / total;
    record(
        frac <= 0.01,
        format!(
            "LagrangeNR {} failures, {stragglers} outside the hyperbolic TOF<pi/4 strip ({:.2}%)",
            lag.len(),
            100.0 * frac
        ),
    );

    // Gauss
    let gauss = scan.cells(SolverId::GaussSS);
    let conv: Vec<&CellResult> = gauss.iter().filter(|c| c.converged()).collect();
    let outside = conv
        .iter()
        .filter(|c| c.theta >= PI - c.tof + 2.0 * step + 1e-12)
        .count();
    record(
        outside == 0,
        format!(
            "GaussSS {} converged, {outside} ({:.1}%) beyond theta < pi - TOF + 2 cells",
            conv.len(),
            100.0 * outside as f64 / conv.len() as f64
        ),
    );
    let long_conv = gauss.iter().filter(|c| c.theta > PI + 1e-12 && c.converged()).count();
    record(
        long_conv == 0,
        format!("GaussSS converged on {long_conv} theta>pi cells"),
    );

    // Bate strips and recovery
    let bate: Vec<&CellResult> = scan
        .failed(SolverId::BateNR)
        .filter(|c| c.status.reason() != Some(FailureReason::GSingularity))
        .collect();
    let elliptic_strip = bate
        .iter()
        .filter(|c| !hyperbolic(c, ratio) && c.tof > PI && c.theta > PI)
        .count();
    let hyperbolic_strip = bate
        .iter()
        .filter(|c| hyperbolic(c, ratio) && c.theta < PI && c.tof < PI / 8.0)
        .count();
    let bracketed: HashMap<(u64, u64), bool> = scan
        .cells(SolverId::BateNRBracketed)
        .iter()
        .map(|c| ((c.theta.to_bits(), c.tof.to_bits()), c.converged()))
        .collect();
    let recovered = bate
        .iter()
        .filter(|c| bracketed[&(c.theta.to_bits(), c.tof.to_bits())])
        .count();
    let rate = recovered as f64 / bate.len().max(1) as f64;
    record(
        elliptic_strip > 0 && hyperbolic_strip > 0 && rate >= 0.95,
        format!(
            "BateNR {} failures ({elliptic_strip} elliptic strip, {hyperbolic_strip} hyperbolic strip), BateNRBracketed recovers {:.1}%",
            bate.len(),
            100.0 * rate
        ),
    );

    // Battin
    let battin: Vec<&CellResult> = scan.failed(SolverId::BattinSS).collect();
    let stray = battin.iter().filter(|c| !(c.theta > PI && c.tof > PI)).count();
    record(
        stray == 0,
        format!("BattinSS {} failures, {stray} outside TOF>pi, theta>pi", battin.len()),
    );

    // f and g column
    let column_cells = scan
        .cells(SolverId::BateNR)
        .iter()
        .filter(|c| scan.on_pi_column(c))
        .count();
    for id in SolverId::ALL.into_iter().filter(|id| id.uses_fg()) {
        let sing: Vec<&CellResult> = scan
            .cells(id)
            .iter()
            .filter(|c| c.status.reason() == Some(FailureReason::GSingularity))
            .collect();
        let on_column = sing.iter().filter(|c| scan.on_pi_column(c)).count();
        let column_failed = scan
            .cells(id)
            .iter()
            .filter(|c| scan.on_pi_column(c) && !c.converged())
            .count();
        record(
            on_column == sing.len() && column_failed == column_cells,
            format!(
                "{id} fails {column_failed}/{column_cells} theta=pi cells, {} singular cells elsewhere",
                sing.len() - on_column
            ),
        );
    }
    Outcome {
        id: 4,
        title: "failure regions",
        pass,
        detail: parts.join("; "),
    }
}

fn criterion_5(scan: &Scan) -> Outcome {
    let tol = ToleranceSpec::default();
    let ids: Vec<SolverId> = SolverId::ALL
        .into_iter()
        .filter(|&id| id != SolverId::GaussSS)
        .collect();
    let (mut worst, mut cells_compared, mut bad_cells) = (0.0f64, 0usize, 0usize);
    let mut worst_at = (0.0, 0.0, SolverId::GaussSS, SolverId::GaussSS);
    for (k, cell) in scan.cells(SolverId::IzzoHouseholder).iter().enumerate() {
        let conv: Vec<SolverId> = ids
            .iter()
            .copied()
            .filter(|id| scan.cells(*id)[k].converged())
            .collect();
        if conv.len() < 2 {
            continue;
        }
        let g = TransferGeometry::planar(scan.grid.radius_ratio, cell.theta, cell.tof).unwrap();
        let v: Vec<(SolverId, Vector3<f64>)> = conv.iter().map(|&id| (id, solve_normalized(id, &g, &tol).v1)).collect();
        cells_compared += 1;
        let mut cell_worst = 0.0f64;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                let d = (v[i].1 - v[j].1).norm() / v[i].1.norm().max(v[j].1.norm());
                cell_worst = cell_worst.max(d);
                if d > worst {
                    worst = d;
                    worst_at = (cell.theta, cell.tof, v[i].0, v[j].0);
                }
            }
        }
        if cell_worst > 1e-6 {
            bad_cells += 1;
        }
    }
    let gauss: Vec<f64> = scan
        .cells(SolverId::GaussSS)
        .iter()
        .filter(|c| c.converged())
        .map(|c| c.velocity_error)
        .collect();
    let gauss_max = gauss.iter().copied().fold(0.0f64, f64::max);
    let gauss_median = median(gauss);
    let gooding_median = median(
        scan.cells(SolverId::GoodingHalley)
            .iter()
            .filter(|c| c.converged())
            .map(|c| c.velocity_error)
            .collect(),
    );
    let ratio = gauss_median / gooding_median;
    let pass = bad_cells == 0 && gauss_max <= 1e-1 && ratio >= 1e3;
    let detail = format!(
        "{cells_compared} cells, {bad_cells} over 1e-6 (worst {worst:.2e}: {} vs {} at theta={:.4} tof={:.4}); GaussSS max error {gauss_max:.2e}, median {gauss_median:.2e} = {ratio:.0}x GoodingHalley median {gooding_median:.2e}",
        worst_at.2, worst_at.3, worst_at.0, worst_at.1
    );
    Outcome {
        id: 5,
        title: "cross-solver agreement",
        pass,
        detail,
    }
}

struct BenchRun {
    table: String,
    rows: Vec<Vec<String>>,
    secs: f64,
}

fn bench_once(path: &std::path::Path) -> Result<BenchRun, String> {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_lambert"))
        .args(["bench", "--samples", "100000", "--seed", "42", "--out"])
        .arg(path)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let csv = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let rows = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    Ok(BenchRun {
        table: String::from_utf8_lossy(&out.stdout).into_owned(),
        rows,
        secs: start.elapsed().as_secs_f64(),
    })
}

fn criterion_6() -> Outcome {
    let dir = std::env::temp_dir().join(format!("lambert-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let runs = (bench_once(&dir.join("a.csv")), bench_once(&dir.join("b.csv")));
    let _ = std::fs::remove_dir_all(&dir);
    let (a, b) = match runs {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => {
            return Outcome {
                id: 6,
                title: "benchmark protocol",
                pass: false,
                detail: e,
            }
        }
    };
    // columns: rank, solver, samples, converged, mean_ns, median_ns, p95_ns, mean_iterations
    let counts = |r: &BenchRun| {
        let mut c: Vec<(String, String, String)> = r
            .rows
            .iter()
            .map(|row| (row[1].clone(), row[2].clone(), row[3].clone()))
            .collect();
        c.sort();
        c
    };
    let reproducible = counts(&a) == counts(&b);
    let all_solvers = a.rows.len() == SolverId::ALL.len();
    let excludes = a.rows.iter().any(|row| row[3] != row[2]);
    let slowest = a
        .rows
        .iter()
        .map(|row| row[4].parse::<f64>().unwrap_or(f64::INFINITY))
        .fold(0.0f64, f64::max);
    println!("bench ranking (first run):\n{}", a.table.trim_end());
    Outcome {
        id: 6,
        title: "benchmark protocol",
        pass: reproducible && all_solvers && excludes && slowest <= 50_000.0,
        detail: format!(
            "counts reproducible: {reproducible}; non-converged excluded: {excludes}; slowest mean {:.2} us; runs took {:.1} s and {:.1} s",
            slowest / 1e3,
            a.secs,
            b.secs
        ),
    }
}

type Suite = fn() -> common::Check;

fn criterion_7() -> Outcome {
    let suites: [(&str, Suite); 6] = [
        ("Stumpff derivative identities", common::stumpff_identities),
        ("monotonicity", common::monotonicity),
        ("asymptotes", common::asymptotes),
        ("cross-formulation", common::cross_formulation),
        ("velocity equivalence", common::velocity_equivalence),
        ("reversibility", || common::reversibility(1000)),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, check) in suites {
        match check() {
            Ok(()) => parts.push(format!("{name} ok")),
            Err(e) => {
                pass = false;
                parts.push(format!("{name} FAILED ({e})"));
            }
        }
    }
    Outcome {
        id: 7,
        title: "property suites",
        pass,
        detail: parts.join("; "),
    }
}

fn main() {
    // `cargo test -- --list` and filters are not meaningful here
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let start = Instant::now();
    let scan = Scan::run();
    eprintln!("scan of {GRID}x{GRID} took {:.1} s", start.elapsed().as_secs_f64());
    let outcomes = [
        criterion_1(),
        criterion_2(&scan),
        criterion_3(&scan),
        criterion_4(&scan),
        criterion_5(&scan),
        criterion_6(),
        criterion_7(),
    ];
    for o in &outcomes {
        report(o);
    }
    let unexpected: Vec<u32> = outcomes
        .iter()
        .filter(|o| !o.pass && !KNOWN_FAIL.contains(&o.id))
        .map(|o| o.id)
        .collect();
    let fixed: Vec<u32> = outcomes
        .iter()
        .filter(|o| o.pass && KNOWN_FAIL.contains(&o.id))
        .map(|o| o.id)
        .collect();
    if !fixed.is_empty() {
        println!("note: criteria {fixed:?} now pass; update KNOWN_FAIL");
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
