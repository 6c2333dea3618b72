//! Simó's regularized universal variable, `z = (dE / 2)^2` (`-(dF / 2)^2`),
//! so `z_bate = 4 z` and the first asymptote sits at `pi^2`.
//!
//! With `c0 = cos(sqrt z)`, `c1 = sin(sqrt z) / sqrt z` and
//! `q = (sqrt z - sin(sqrt z) cos(sqrt z)) / (4 z^(3/2))`:
//!
//! ```text
//! y(z) = r1 + r2 - sqrt(2) A c0(z)
//! t(z) = (2 y)^(3/2) q(z) / c1(z)^3 + A sqrt(y)
//! ```
//!
//! The wall `y = 0` has the closed form `-acosh^2((r1 + r2) / (sqrt(2) A))`.

use std::f64::consts::{PI, SQRT_2};

use super::{DomainFlag, DomainSpec, TimeOfFlight, TofEvaluation};
use crate::geometry::TransferGeometry;

pub const SIMO_ASYMPTOTE: f64 = PI * PI;

/// Below this `|z|` the functions are summed as series.
const SERIES_THRESHOLD: f64 = 2.5e-3;
/// `cosh(sqrt(-z))` overflows past roughly this.
const Z_MIN: f64 = -4.0e5;

#[derive(Debug, Clone, Copy)]
pub struct SimoZ {
    a: f64,
    r_sum: f64,
    wall: f64,
}

/// Regularized functions at one `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimoFunctions {
    pub c0: f64,
    pub c1: f64,
    pub q: f64,
}

/// `c0`, `c1`, `q` at `z`. Past `pi/2` the sine is taken of `pi - sqrt z`
/// computed as `(pi^2 - z) / (pi + sqrt z)` to keep relative accuracy of
/// `c1` towards the asymptote.
pub fn simo_functions(z: f64) -> SimoFunctions {
    if z.abs() < SERIES_THRESHOLD {
        // c0 = sum (-z)^k/(2k)!, c1 = sum (-z)^k/(2k+1)!,
        // q = sum (-4z)^k/(2k+3)!
        let mut c0 = 1.0;
        let mut c1 = 1.0;
        let mut q = 1.0 / 6.0;
        let (mut t0, mut t1, mut tq) = (1.0, 1.0, 1.0 / 6.0);
        for k in 1..12 {
            let kf = k as f64;
            t0 *= -z / ((2.0 * kf - 1.0) * (2.0 * kf));
            t1 *= -z / ((2.0 * kf) * (2.0 * kf + 1.0));
            tq *= -4.0 * z / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
            c0 += t0;
            c1 += t1;
            q += tq;
        }
        return SimoFunctions { c0, c1, q };
    }
    if z > 0.0 {
        let psi = z.sqrt();
        let c0 = psi.cos();
        let sn = if psi > 0.5 * PI {
            ((PI * PI - z) / (PI + psi)).sin()
        } else {
            psi.sin()
        };
        let c1 = sn / psi;
        let q = (psi - sn * c0) / (4.0 * z * psi);
        SimoFunctions { c0, c1, q }
    } else {
        let psi = (-z).sqrt();
        let (sh, ch) = (psi.sinh(), psi.cosh());
        SimoFunctions {
            c0: ch,
            c1: sh / psi,
            q: (sh * ch - psi) / (-4.0 * z * psi),
        }
    }
}

impl SimoZ {
    pub fn new(geom: &TransferGeometry) -> Self {
        let a = geom.universal_a();
        let r_sum = geom.r1n + geom.r2n;
        let wall = if a > 0.0 {
            let ratio = (r_sum / (SQRT_2 * a)).max(1.0);
            let h = ratio.acosh();
            -h * h
        } else {
            f64::NEG_INFINITY
        };
        Self { a, r_sum, wall }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn wall(&self) -> f64 {
        self.wall
    }

    /// `y(z)` and the regularized functions.
    pub fn point(&self, z: f64) -> (f64, SimoFunctions) {
        let f = simo_functions(z);
        (self.r_sum - SQRT_2 * self.a * f.c0, f)
    }
}

impl TimeOfFlight for SimoZ {
    fn eval(&self, z: f64) -> TofEvaluation {
        if z >= SIMO_ASYMPTOTE {
            return TofEvaluation::flagged(DomainFlag::BeyondAsymptote);
        }
        if z < Z_MIN {
            let flag = if self.a > 0.0 {
                DomainFlag::NonReal
            } else {
                DomainFlag::BelowLowerLimit
            };
            return TofEvaluation::flagged(flag);
        }
        let (y, f) = self.point(z);
        if y < 0.0 {
            return TofEvaluation::flagged(DomainFlag::NonReal);
        }
        if y == 0.0 || z <= self.wall {
            return TofEvaluation::flagged(DomainFlag::BelowLowerLimit);
        }
        let t = (2.0 * y).powf(1.5) * f.q / (f.c1 * f.c1 * f.c1) + self.a * y.sqrt();
        TofEvaluation {
            t,
            dt: None,
            d2t: None,
            d3t: None,
            domain_flag: DomainFlag::InDomain,
        }
    }

    fn domain(&self) -> DomainSpec {
        DomainSpec {
            lower: self.wall,
            upper: SIMO_ASYMPTOTE,
            singularities: vec![SIMO_ASYMPTOTE],
        }
    }
}

pub fn tof_simo_z(z: f64, geom: &TransferGeometry) -> TofEvaluation {
    SimoZ::new(geom).eval(z)
}
