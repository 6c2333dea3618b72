//! Checks shared by the core property tests and the acceptance runner.
//! Each returns `Err` with a description of the first violation.
#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use lambert_core::geometry::TransferGeometry;
use lambert_core::oracle::kepler_propagate;
use lambert_core::rootfind::ToleranceSpec;
use lambert_core::solvers::solve_normalized;
use lambert_core::specfun::stumpff;
use lambert_core::tof::{
    lancaster_x_to_bate_z, BateZ, LagrangeX, LancasterX, SimoZ, TimeOfFlight, BATE_ASYMPTOTE, SIMO_ASYMPTOTE,
};
use lambert_core::velocity::{
    elements_from_universal, velocity_from_elements, velocity_from_fg, velocity_from_radial_transversal,
    FgCoefficients, UniversalPoint, VelocityComponents,
};
use lambert_core::{reference_solve, validate_solution, LambertProblem, SolverId, TofEvaluation, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

pub fn random_geometry(rng: &mut ChaCha8Rng) -> TransferGeometry {
    let ratio = rng.random_range(0.3..5.0);
    let theta = rng.random_range(0.05..2.0 * PI - 0.05);
    TransferGeometry::planar(ratio, theta, 1.0).unwrap()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(move |i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
}

/// Direct Taylor sums of C', S' for an independent comparison.
fn stumpff_derivatives_taylor(z: f64) -> (f64, f64) {
    let (mut dc, mut ds) = (0.0, 0.0);
    let mut fact_c = 2.0; // (2k+2)!
    let mut fact_s = 6.0; // (2k+3)!
    let mut zk1 = 1.0; // z^(k-1)
    for k in 1..60 {
        let kf = k as f64;
        fact_c *= (2.0 * kf + 1.0) * (2.0 * kf + 2.0);
        fact_s *= (2.0 * kf + 2.0) * (2.0 * kf + 3.0);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        dc += sign * kf * zk1 / fact_c;
        ds += sign * kf * zk1 / fact_s;
        zk1 *= z;
    }
    (dc, ds)
}

pub fn stumpff_identities() -> Check {
    for mag in log_grid(1e-6, 4.0 * PI * PI * 0.99, 400) {
        for z in [mag, -mag] {
            let st = stumpff(z).map_err(|e| format!("z={z:e}: {e}"))?;
            // residual form: the right-hand sides cancel to O(z) near zero
            let rc = 2.0 * z * st.dc_dz - (1.0 - z * st.s_val - 2.0 * st.c_val);
            let scale_c = (2.0 * z * st.dc_dz).abs() + 1.0 + (z * st.s_val).abs() + 2.0 * st.c_val.abs();
            ensure!(rc.abs() <= 1e-10 * scale_c, "C' identity at z={z:e}: {rc:e}");
            let rs = 2.0 * z * st.ds_dz - (st.c_val - 3.0 * st.s_val);
            let scale_s = (2.0 * z * st.ds_dz).abs() + st.c_val.abs() + 3.0 * st.s_val.abs();
            ensure!(rs.abs() <= 1e-10 * scale_s, "S' identity at z={z:e}: {rs:e}");
        }
    }
    for mag in log_grid(1e-6, 20.0, 200) {
        for z in [mag, -mag] {
            let st = stumpff(z).map_err(|e| format!("z={z:e}: {e}"))?;
            let (dc, ds) = stumpff_derivatives_taylor(z);
            ensure!(
                (st.dc_dz - dc).abs() <= 1e-10 * dc.abs(),
                "C' at z={z:e}: {} vs {dc}",
                st.dc_dz
            );
            ensure!(
                (st.ds_dz - ds).abs() <= 1e-10 * ds.abs(),
                "S' at z={z:e}: {} vs {ds}",
                st.ds_dz
            );
        }
    }
    Ok(())
}

/// Strict monotonicity on `n` points inside `(lo, hi)`, skipping points the
/// formulation flags. Returns the number of adjacent pairs compared.
fn monotone(f: &dyn TimeOfFlight, lo: f64, hi: f64, n: usize, label: &str) -> Result<usize, String> {
    let mut prev: Option<(f64, f64)> = None;
    let mut checked = 0;
    for i in 1..=n {
        let w = lo + (hi - lo) * i as f64 / (n + 1) as f64;
        let e = f.eval(w);
        if !e.in_domain() {
            prev = None;
            continue;
        }
        if let Some((pw, pt)) = prev {
            let ok = if f.increasing() { e.t > pt } else { e.t < pt };
            ensure!(ok, "{label}: t({pw}) = {pt}, t({w}) = {}", e.t);
            checked += 1;
        }
        prev = Some((w, e.t));
    }
    Ok(checked)
}

/// 100 geometries x 200 points for each formulation with a known domain.
pub fn monotonicity() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let g = random_geometry(&mut rng);
        let label = format!("ratio={} theta={}", g.r2n, g.theta);
        let n = monotone(&LancasterX::new(&g), -1.0, 20.0, 200, &format!("Lancaster {label}"))?;
        ensure!(n > 150, "Lancaster {label}: only {n} pairs in domain");
        monotone(&LagrangeX::new(&g), -1.0, 20.0, 200, &format!("Lagrange {label}"))?;
        let b = BateZ::new(&g);
        let n = monotone(
            &b,
            b.domain().lower.max(-200.0),
            BATE_ASYMPTOTE,
            200,
            &format!("Bate {label}"),
        )?;
        ensure!(n > 150, "Bate {label}: only {n} pairs in domain");
        let s = SimoZ::new(&g);
        let n = monotone(
            &s,
            s.domain().lower.max(-50.0),
            SIMO_ASYMPTOTE,
            200,
            &format!("Simo {label}"),
        )?;
        ensure!(n > 150, "Simo {label}: only {n} pairs in domain");
    }
    Ok(())
}

/// Transfer time exceeds 1e6 within 1e-9 of each asymptote.
pub fn asymptotes() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..20 {
        let g = random_geometry(&mut rng);
        ensure!(
            LancasterX::new(&g).eval(-1.0 + 1e-9).t > 1e6,
            "Lancaster at theta={}",
            g.theta
        );
        ensure!(
            BateZ::new(&g).eval(BATE_ASYMPTOTE - 1e-9).t > 1e6,
            "Bate at theta={}",
            g.theta
        );
        ensure!(
            SimoZ::new(&g).eval(SIMO_ASYMPTOTE - 1e-9).t > 1e6,
            "Simo at theta={}",
            g.theta
        );
    }
    Ok(())
}

/// The Izzo root, mapped into each other variable, reproduces the same time.
pub fn cross_formulation() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let tol = ToleranceSpec::default();
    let mut lagrange_checked = 0;
    for _ in 0..200 {
        let ratio = rng.random_range(0.3..5.0);
        let theta = rng.random_range(0.05..2.0 * PI - 0.05);
        let t_norm = rng.random_range(0.2..2.0 * PI);
        let g = TransferGeometry::planar(ratio, theta, t_norm).unwrap();
        let out = solve_normalized(SolverId::IzzoHouseholder, &g, &tol);
        ensure!(out.status.is_converged(), "Izzo failed at theta={theta} t={t_norm}");
        let x = out.trace.final_w;
        let z = lancaster_x_to_bate_z(x, &g);
        let limit = 1e-10 * t_norm.max(1.0);
        let check = |e: TofEvaluation, what: &str| -> Check {
            ensure!(e.in_domain(), "{what}: flagged at theta={theta} t={t_norm}");
            ensure!((e.t - t_norm).abs() <= limit, "{what}: {} vs {t_norm}", e.t);
            Ok(())
        };
        check(LancasterX::new(&g).eval(x), "Lancaster")?;
        check(BateZ::new(&g).eval(z), "Bate")?;
        check(SimoZ::new(&g).eval(0.25 * z), "Simo")?;
        // the hypergeometric form only exists inside its convergence radius
        let e = LagrangeX::new(&g).eval(x);
        if e.in_domain() {
            check(e, "Lagrange")?;
            lagrange_checked += 1;
        }
    }
    ensure!(
        lagrange_checked > 150,
        "Lagrange compared on only {lagrange_checked} cases"
    );
    Ok(())
}

/// Radial/transversal, elements and f&g give the same velocities.
pub fn velocity_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut done = 0;
    while done < 100 {
        let ratio = rng.random_range(0.3..5.0);
        let theta = rng.random_range(0.05..2.0 * PI - 0.05);
        if (theta - PI).abs() < 0.05 {
            // the f and g route is singular at theta = pi
            continue;
        }
        let g = TransferGeometry::planar(ratio, theta, 1.0).unwrap();
        // elliptic means -1 < x < 1
        let x: f64 = rng.random_range(-0.95..0.95);
        let z = lancaster_x_to_bate_z(x, &g);
        let Some(p) = BateZ::new(&g).point(z) else { continue };
        let comp = VelocityComponents::from_lancaster_x(&g, x);
        let (a1, a2) = velocity_from_radial_transversal(&comp, &g.r1_vec, &g.r2_vec, &g.plane_normal)
            .map_err(|e| e.to_string())?;
        let u = UniversalPoint {
            z,
            y: p.y,
            c_val: p.c_val,
            s_val: p.s_val,
        };
        let (b1, b2) = velocity_from_elements(&elements_from_universal(&g, &u), 1.0).map_err(|e| e.to_string())?;
        let (c1, c2) =
            velocity_from_fg(&FgCoefficients::from_bate(&g, p.y), &g.r1_vec, &g.r2_vec).map_err(|e| e.to_string())?;
        for (what, p, q) in [
            ("el v1", a1, b1),
            ("el v2", a2, b2),
            ("fg v1", a1, c1),
            ("fg v2", a2, c2),
            ("el/fg v1", b1, c1),
        ] {
            let rel = (p - q).norm() / p.norm();
            ensure!(rel <= 1e-10, "{what} theta={theta} ratio={ratio} x={x}: {rel:e}");
        }
        // same conic at both ends
        let energy = |r: &Vector3<f64>, v: &Vector3<f64>| 0.5 * v.norm_squared() - 1.0 / r.norm();
        let (e1, e2) = (energy(&g.r1_vec, &a1), energy(&g.r2_vec, &a2));
        ensure!(
            (e1 - e2).abs() <= 1e-10 * e1.abs().max(1.0),
            "energy theta={theta}: {e1} vs {e2}"
        );
        let (h1, h2) = (g.r1_vec.cross(&a1), g.r2_vec.cross(&a2));
        ensure!((h1 - h2).norm() <= 1e-10 * h1.norm(), "h theta={theta}");
        done += 1;
    }
    Ok(())
}

/// Forward then backward propagation returns to the start.
pub fn reversibility(cases: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut done = 0;
    while done < cases {
        let r = Vector3::new(
            rng.random_range(-2.0..2.0),
            rng.random_range(-2.0..2.0),
            rng.random_range(-1.0..1.0),
        );
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-0.5..0.5),
        );
        let dt = rng.random_range(-20.0..20.0);
        if r.norm() <= 0.3 {
            continue;
        }
        let (r1, v1) = kepler_propagate(&r, &v, dt, 1.0).map_err(|e| e.to_string())?;
        // keep away from near-collision arcs where any error is amplified
        if r1.norm() <= 0.1 {
            continue;
        }
        let (r0, v0) = kepler_propagate(&r1, &v1, -dt, 1.0).map_err(|e| e.to_string())?;
        ensure!(
            (r0 - r).norm() <= 1e-10 * r.norm(),
            "r={r:?} v={v:?} dt={dt}: {:e}",
            (r0 - r).norm()
        );
        ensure!(
            (v0 - v).norm() <= 1e-10 * v.norm().max(1.0),
            "r={r:?} v={v:?} dt={dt}: {:e}",
            (v0 - v).norm()
        );
        done += 1;
    }
    Ok(())
}

/// A random non-planar problem with the given normalized angle and time.
pub fn random_problem(rng: &mut ChaCha8Rng, theta: f64, t_norm: f64) -> LambertProblem {
    let r1n = rng.random_range(0.5..3.0);
    let ratio = rng.random_range(0.3..4.0);
    let mu = rng.random_range(0.5..2.0);
    // orthonormal in-plane basis from a random rotation
    let axis = Vector3::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    );
    let rot = nalgebra::Rotation3::new(axis);
    let (e1, e2) = (rot * Vector3::x(), rot * Vector3::y());
    let r1 = r1n * e1;
    let r2 = ratio * r1n * (theta.cos() * e1 + theta.sin() * e2);
    let tof = t_norm * (r1n.powi(3) / mu).sqrt();
    LambertProblem::new(r1, r2, tof, mu, theta > PI).unwrap()
}

/// Angle and time stay this far from the degenerate ends.
pub const ORACLE_GUARD: f64 = 1e-3;

pub struct OracleSummary {
    pub problems: usize,
    /// `(theta, t_norm, residual)` of every problem over `1e-11`.
    pub over: Vec<(f64, f64, f64)>,
    pub worst: f64,
    pub elapsed: Duration,
}

/// Reference solutions of `n` seeded random problems checked by propagation.
pub fn oracle_suite(n: usize, seed: u64) -> Result<OracleSummary, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = Instant::now();
    let (mut over, mut worst) = (Vec::new(), 0.0f64);
    for _ in 0..n {
        let theta = rng.random_range(ORACLE_GUARD..2.0 * PI - ORACLE_GUARD);
        let t_norm = rng.random_range(ORACLE_GUARD..2.0 * PI);
        let p = random_problem(&mut rng, theta, t_norm);
        let (v1, v2) = reference_solve(&p).map_err(|e| format!("theta={theta} t={t_norm}: {e}"))?;
        let rep = validate_solution(&p, &v1, &v2);
        ensure!(rep.direction_ok, "wrong direction at theta={theta} t={t_norm}");
        worst = worst.max(rep.position_residual);
        if rep.position_residual > 1e-11 {
            over.push((theta, t_norm, rep.position_residual));
        }
    }
    Ok(OracleSummary {
        problems: n,
        over,
        worst,
        elapsed: start.elapsed(),
    })
}
