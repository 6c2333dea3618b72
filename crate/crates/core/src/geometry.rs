//! Transfer geometry and the canonical normalization.
//!
//! Every solver works on normalized quantities: `mu = 1`, `|r1| = 1`, so the
//! circular orbit through `r1` has unit mean motion. [`ScaleFactors`] carries
//! the conversion back to the caller's units.

use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("position vector has zero norm")]
    ZeroVector,
    #[error("transfer angle is exactly 0 or 2*pi (collinear, same direction)")]
    DegenerateAngle,
    #[error("time of flight must be finite and > 0")]
    NonPositiveTof,
    #[error("gravitational parameter must be finite and > 0")]
    NonPositiveMu,
    #[error("non-finite input component")]
    NonFinite,
}

/// The boundary-value input: two positions, the elapsed time, `mu` and the
/// direction flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambertProblem {
    r1: Vector3<f64>,
    r2: Vector3<f64>,
    tof: f64,
    mu: f64,
    long_way: bool,
}

impl LambertProblem {
    pub fn new(r1: Vector3<f64>, r2: Vector3<f64>, tof: f64, mu: f64, long_way: bool) -> Result<Self, GeometryError> {
        if r1.iter().chain(r2.iter()).any(|c| !c.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if !(tof.is_finite() && tof > 0.0) {
            return Err(GeometryError::NonPositiveTof);
        }
        if !(mu.is_finite() && mu > 0.0) {
            return Err(GeometryError::NonPositiveMu);
        }
        // rejects zero radii and the rectilinear theta = 0 case
        transfer_angle(&r1, &r2, long_way)?;
        Ok(Self {
            r1,
            r2,
            tof,
            mu,
            long_way,
        })
    }

    /// In-plane problem with `r1 = (r1n, 0, 0)` and `r2` at angle `theta`
    /// (measured counter-clockwise about +z). `theta > pi` selects the long way.
    pub fn planar(r1n: f64, r2n: f64, theta: f64, tof: f64, mu: f64) -> Result<Self, GeometryError> {
        let r1 = Vector3::new(r1n, 0.0, 0.0);
        let r2 = Vector3::new(r2n * theta.cos(), r2n * theta.sin(), 0.0);
        Self::new(r1, r2, tof, mu, theta > PI)
    }

    pub fn r1(&self) -> &Vector3<f64> {
        &self.r1
    }

    pub fn r2(&self) -> &Vector3<f64> {
        &self.r2
    }

    pub fn tof(&self) -> f64 {
        self.tof
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn long_way(&self) -> bool {
        self.long_way
    }
}

/// Transfer angle with its trigonometric values and the unit normal of the
/// transfer plane oriented along the direction of motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferAngle {
    pub theta: f64,
    pub sin_theta: f64,
    pub cos_theta: f64,
    pub normal: Vector3<f64>,
}

pub fn transfer_angle(r1: &Vector3<f64>, r2: &Vector3<f64>, long_way: bool) -> Result<TransferAngle, GeometryError> {
    let n1 = r1.norm();
    let n2 = r2.norm();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(GeometryError::ZeroVector);
    }
    let cross = r1.cross(r2);
    let cross_norm = cross.norm();
    let dot = r1.dot(r2);
    let principal = cross_norm.atan2(dot);
    if principal == 0.0 {
        return Err(GeometryError::DegenerateAngle);
    }
    let mut normal = if cross_norm > 0.0 {
        cross / cross_norm
    } else {
        // antiparallel radii: any normal orthogonal to r1 is valid, prefer +z
        antiparallel_normal(&(r1 / n1))
    };
    let sin_principal = cross_norm / (n1 * n2);
    let cos_theta = dot / (n1 * n2);
    let (theta, sin_theta) = if long_way {
        normal = -normal;
        (TAU - principal, -sin_principal)
    } else {
        (principal, sin_principal)
    };
    Ok(TransferAngle {
        theta,
        sin_theta,
        cos_theta,
        normal,
    })
}

fn antiparallel_normal(r1_hat: &Vector3<f64>) -> Vector3<f64> {
    let z = Vector3::z();
    let candidate = z - r1_hat * r1_hat.dot(&z);
    if candidate.norm() > 1e-8 {
        candidate.normalize()
    } else {
        let x = Vector3::x();
        (x - r1_hat * r1_hat.dot(&x)).normalize()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleFactors {
    /// `|r1|` in caller units.
    pub length_scale: f64,
    /// `sqrt(|r1|^3 / mu)`: inverse mean motion of the circular orbit at `|r1|`.
    pub time_scale: f64,
    pub velocity_scale: f64,
}

impl ScaleFactors {
    pub fn new(length_scale: f64, mu: f64) -> Self {
        let time_scale = (length_scale * length_scale * length_scale / mu).sqrt();
        Self {
            length_scale,
            time_scale,
            velocity_scale: (mu / length_scale).sqrt(),
        }
    }

    pub fn normalize_length(&self, l: f64) -> f64 {
        l / self.length_scale
    }

    pub fn normalize_time(&self, t: f64) -> f64 {
        t / self.time_scale
    }

    pub fn normalize_velocity(&self, v: &Vector3<f64>) -> Vector3<f64> {
        v / self.velocity_scale
    }

    pub fn denormalize_length(&self, l: f64) -> f64 {
        l * self.length_scale
    }

    pub fn denormalize_time(&self, t: f64) -> f64 {
        t * self.time_scale
    }

    pub fn denormalize_velocity(&self, v: &Vector3<f64>) -> Vector3<f64> {
        v * self.velocity_scale
    }
}

/// Normalized geometric invariants of a transfer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferGeometry {
    /// Always 1 after normalization.
    pub r1n: f64,
    pub r2n: f64,
    /// Chord `|r2 - r1|`.
    pub c: f64,
    /// Semiperimeter `(r1 + r2 + c) / 2`.
    pub s: f64,
    pub theta: f64,
    pub sin_theta: f64,
    pub cos_theta: f64,
    /// `sqrt(r1 r2) cos(theta/2) / s`; `lambda^2 = (s - c) / s`.
    pub lambda: f64,
    pub t_norm: f64,
    pub plane_normal: Vector3<f64>,
    /// Normalized position vectors (`|r1_vec| = 1`).
    pub r1_vec: Vector3<f64>,
    pub r2_vec: Vector3<f64>,
}

impl TransferGeometry {
    /// Geometry for a normalized planar problem, used by the formulation
    /// tests and the region scan.
    pub fn planar(r2n: f64, theta: f64, t_norm: f64) -> Result<Self, GeometryError> {
        let p = LambertProblem::planar(1.0, r2n, theta, t_norm, 1.0)?;
        Ok(build_geometry(&p)?.0)
    }

    /// `|r1 - r2| / c`, the radial asymmetry used by the velocity formulas.
    pub fn rho(&self) -> f64 {
        (self.r1n - self.r2n) / self.c
    }

    /// `A = sin(theta) sqrt(r1 r2 / (1 - cos(theta)))`, the geometric constant
    /// of the universal-variable (z) formulations.
    pub fn universal_a(&self) -> f64 {
        // sqrt(r1 r2 (1 + cos)) with the sign of sin; stable at theta = pi
        let half = 0.5 * self.theta;
        std::f64::consts::SQRT_2 * (self.r1n * self.r2n).sqrt() * half.cos()
    }

    /// Parabolic transfer time (Euler's equation), normalized units.
    pub fn parabolic_time(&self) -> f64 {
        let sc = self.s - self.c;
        let sign = if self.theta < PI { -1.0 } else { 1.0 };
        (2.0f64).sqrt() / 3.0 * (self.s.powf(1.5) + sign * sc.max(0.0).powf(1.5))
    }

    /// Minimum-energy transfer time (`a = s/2`), normalized units.
    pub fn min_energy_time(&self) -> f64 {
        let a = 0.5 * self.s;
        let beta = 2.0 * ((self.s - self.c).max(0.0) / self.s).sqrt().asin();
        let beta = if self.theta > PI { -beta } else { beta };
        a.powf(1.5) * (PI - beta + beta.sin())
    }
}

pub fn build_geometry(problem: &LambertProblem) -> Result<(TransferGeometry, ScaleFactors), GeometryError> {
    let angle = transfer_angle(&problem.r1, &problem.r2, problem.long_way)?;
    let scale = ScaleFactors::new(problem.r1.norm(), problem.mu);
    let r1_vec = problem.r1 / scale.length_scale;
    let r2_vec = problem.r2 / scale.length_scale;
    let r1n = 1.0;
    let r2n = r2_vec.norm();
    let c = (r2_vec - r1_vec).norm();
    let s = 0.5 * (r1n + r2n + c);
    let lambda = ((r1n * r2n).sqrt() * (0.5 * angle.theta).cos() / s).clamp(-1.0, 1.0);
    let geom = TransferGeometry {
        r1n,
        r2n,
        c,
        s,
        theta: angle.theta,
        sin_theta: angle.sin_theta,
        cos_theta: angle.cos_theta,
        lambda,
        t_norm: scale.normalize_time(problem.tof),
        plane_normal: angle.normal,
        r1_vec,
        r2_vec,
    };
    Ok((geom, scale))
}
