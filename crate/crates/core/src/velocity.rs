//! Terminal velocities from a converged formulation, by one of three routes:
//! classical elements, Lagrange f and g coefficients, or radial/transversal
//! components. Everything here works in normalized units (`mu = 1`).

use nalgebra::{Rotation3, Vector3};
use thiserror::Error;

use crate::geometry::TransferGeometry;

/// `|g|` at or below this is treated as singular.
pub const G_FLOOR: f64 = 1e-12;

const NORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum VelocityError {
    #[error("f and g coefficient g = {0:e} is below the floor")]
    GSingularity(f64),
    #[error("plane normal is not a unit vector orthogonal to both radii")]
    BadNormal,
    #[error("invalid elements (p = {0:e})")]
    InvalidElements(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicElements {
    /// Semi-latus rectum.
    pub p: f64,
    /// Semi-major axis; negative for hyperbolas, infinite for a parabola.
    pub a: f64,
    pub e: f64,
    pub inclination: f64,
    pub raan: f64,
    pub arg_periapsis: f64,
    pub nu1: f64,
    pub nu2: f64,
}

/// Universal-variable state at the solution: Bate's `z` together with `y`
/// and the Stumpff values `C(z)`, `S(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniversalPoint {
    pub z: f64,
    pub y: f64,
    pub c_val: f64,
    pub s_val: f64,
}

/// Elements of the transfer conic through `r1` and `r2` for a universal
/// state. The true anomaly at departure comes from the transfer-angle
/// relation where `|sin theta|` is large, and from the universal Kepler
/// equation where `dE` is away from `pi`; the two are never both singular
/// for a non-degenerate transfer.
pub fn elements_from_universal(geom: &TransferGeometry, u: &UniversalPoint) -> ConicElements {
    let (r1, r2) = (geom.r1n, geom.r2n);
    let p = r1 * r2 * (1.0 - geom.cos_theta) / u.y;
    let inv_a = u.z * u.c_val / u.y;
    let e_cos1 = p / r1 - 1.0;
    let e_cos2 = p / r2 - 1.0;

    let by_angle = (e_cos1 * geom.cos_theta - e_cos2) / geom.sin_theta;
    // r2 = chi^2 C + sigma0 chi (1 - z S) + r1 (1 - z C), sigma0 = r1 vr1
    let chi = (u.y / u.c_val).sqrt();
    let c1 = 1.0 - u.z * u.s_val;
    let sigma0 = (r2 - chi * chi * u.c_val - r1 * (1.0 - u.z * u.c_val)) / (chi * c1);
    let by_kepler = sigma0 * p.sqrt() / r1;
    let (cond_angle, cond_kepler) = (geom.sin_theta.abs(), c1.abs());
    let pick = if cond_angle >= cond_kepler { by_angle } else { by_kepler };
    let e_sin1 = if cond_angle.max(cond_kepler) < 1e-6 {
        let e2 = (1.0 - p * inv_a).max(0.0);
        pick.signum() * (e2 - e_cos1 * e_cos1).max(0.0).sqrt()
    } else {
        pick
    };
    let e = e_cos1.hypot(e_sin1);
    let nu1 = e_sin1.atan2(e_cos1);
    let (inclination, raan, u1) = orientation(&geom.plane_normal, &geom.r1_vec);
    ConicElements {
        p,
        a: 1.0 / inv_a,
        e,
        inclination,
        raan,
        arg_periapsis: u1 - nu1,
        nu1,
        nu2: nu1 + geom.theta,
    }
}

/// Inclination, node and argument of latitude of `r` for an orbit with unit
/// normal `n`. Equatorial orbits put the node on the x axis.
fn orientation(n: &Vector3<f64>, r: &Vector3<f64>) -> (f64, f64, f64) {
    let inclination = n.z.clamp(-1.0, 1.0).acos();
    let raan = if n.x.hypot(n.y) < 1e-14 { 0.0 } else { n.x.atan2(-n.y) };
    let node = Vector3::new(raan.cos(), raan.sin(), 0.0);
    let rhat = r.normalize();
    let u = node.cross(&rhat).dot(n).atan2(node.dot(&rhat));
    (inclination, raan, u)
}

/// Perifocal velocities rotated by `Rz(raan) Rx(i) Rz(omega)`.
pub fn velocity_from_elements(el: &ConicElements, mu: f64) -> Result<(Vector3<f64>, Vector3<f64>), VelocityError> {
    if !(el.p > 0.0) || !el.p.is_finite() {
        return Err(VelocityError::InvalidElements(el.p));
    }
    let rot = Rotation3::from_axis_angle(&Vector3::z_axis(), el.raan)
        * Rotation3::from_axis_angle(&Vector3::x_axis(), el.inclination)
        * Rotation3::from_axis_angle(&Vector3::z_axis(), el.arg_periapsis);
    let k = (mu / el.p).sqrt();
    let pf = |nu: f64| {
        let (s, c) = nu.sin_cos();
        Vector3::new(-k * s, k * (el.e + c), 0.0)
    };
    Ok((rot * pf(el.nu1), rot * pf(el.nu2)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FgCoefficients {
    pub f: f64,
    pub g: f64,
    pub gdot: f64,
    pub fdot: Option<f64>,
}

impl FgCoefficients {
    /// From Bate's `y` at the solution: `f = 1 - y/r1`, `g = A sqrt(y)`,
    /// `gdot = 1 - y/r2`.
    pub fn from_bate(geom: &TransferGeometry, y: f64) -> Self {
        Self {
            f: 1.0 - y / geom.r1n,
            g: geom.universal_a() * y.sqrt(),
            gdot: 1.0 - y / geom.r2n,
            fdot: None,
        }
    }

    /// From Gauss's sector-to-triangle ratio `y`.
    pub fn from_gauss(geom: &TransferGeometry, y: f64) -> Self {
        let (r1, r2) = (geom.r1n, geom.r2n);
        let sqrt_p = y * r1 * r2 * geom.sin_theta / geom.t_norm;
        let p = sqrt_p * sqrt_p;
        let one_minus_cos = 1.0 - geom.cos_theta;
        Self {
            f: 1.0 - r2 * one_minus_cos / p,
            g: geom.t_norm / y,
            gdot: 1.0 - r1 * one_minus_cos / p,
            fdot: None,
        }
    }
}

pub fn velocity_from_fg(
    fg: &FgCoefficients,
    r1: &Vector3<f64>,
    r2: &Vector3<f64>,
) -> Result<(Vector3<f64>, Vector3<f64>), VelocityError> {
    if !(fg.g.abs() > G_FLOOR) {
        return Err(VelocityError::GSingularity(fg.g));
    }
    let v1 = (r2 - fg.f * r1) / fg.g;
    let v2 = (fg.gdot * r2 - r1) / fg.g;
    Ok((v1, v2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityComponents {
    pub vr1: f64,
    pub vt1: f64,
    pub vr2: f64,
    pub vt2: f64,
}

impl VelocityComponents {
    /// Components at a Lancaster/Lagrange `x`.
    pub fn from_lancaster_x(geom: &TransferGeometry, x: f64) -> Self {
        let lambda = geom.lambda;
        let l2 = lambda * lambda;
        let y = (1.0 - l2 + l2 * x * x).sqrt();
        let gamma = (0.5 * geom.s).sqrt();
        let rho = geom.rho();
        let sigma = (1.0 - rho * rho).max(0.0).sqrt();
        let (a, b) = (lambda * y - x, lambda * y + x);
        let vt = gamma * sigma * (y + lambda * x);
        Self {
            vr1: gamma * (a - rho * b) / geom.r1n,
            vt1: vt / geom.r1n,
            vr2: -gamma * (a + rho * b) / geom.r2n,
            vt2: vt / geom.r2n,
        }
    }
}

pub fn velocity_from_radial_transversal(
    comp: &VelocityComponents,
    r1: &Vector3<f64>,
    r2: &Vector3<f64>,
    normal: &Vector3<f64>,
) -> Result<(Vector3<f64>, Vector3<f64>), VelocityError> {
    let r1hat = r1.normalize();
    let r2hat = r2.normalize();
    if (normal.norm() - 1.0).abs() > NORMAL_TOL
        || normal.dot(&r1hat).abs() > NORMAL_TOL
        || normal.dot(&r2hat).abs() > NORMAL_TOL
    {
        return Err(VelocityError::BadNormal);
    }
    let t1 = normal.cross(&r1hat);
    let t2 = normal.cross(&r2hat);
    Ok((comp.vr1 * r1hat + comp.vt1 * t1, comp.vr2 * r2hat + comp.vt2 * t2))
}
