//! Lancaster-Blanchard transfer time in the universal variable `x`
//! (`x^2 = 1 - s / 2a`), with three analytic derivatives.
//!
//! Internally the time is Izzo's non-dimensional `T = sqrt(2 / s^3) t`; the
//! public evaluation rescales to normalized time. Within
//! [`NEAR_PARABOLIC_BAND`] of `x = 1` the closed form loses digits, so the
//! hypergeometric (Battin) series is used and differentiated with jets.

use std::ops::{Add, Mul, Sub};

use super::{DomainFlag, DomainSpec, TimeOfFlight, TofEvaluation};
use crate::geometry::TransferGeometry;
use crate::specfun::gauss_2f1;

/// Half-width of the series branch around `x = 1`.
pub const NEAR_PARABOLIC_BAND: f64 = 1e-2;

#[derive(Debug, Clone, Copy)]
pub struct LancasterX {
    lambda: f64,
    lambda2: f64,
    /// `t_norm = scale * T`.
    scale: f64,
}

impl LancasterX {
    pub fn new(geom: &TransferGeometry) -> Self {
        Self {
            lambda: geom.lambda,
            lambda2: geom.lambda * geom.lambda,
            scale: (0.5 * geom.s * geom.s * geom.s).sqrt(),
        }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Factor converting Izzo's `T` to normalized time.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `T` and its first three x-derivatives in Izzo's normalization.
    pub fn nondimensional(&self, x: f64) -> [f64; 4] {
        if (x - 1.0).abs() < NEAR_PARABOLIC_BAND {
            return self.series(x);
        }
        let lambda = self.lambda;
        let e = (x - 1.0) * (x + 1.0);
        let z = (1.0 + self.lambda2 * e).sqrt();
        let y = e.abs().sqrt();
        // z - lambda x without cancellation when lambda x > 0
        let eta = if lambda * x > 0.0 {
            (1.0 - self.lambda2) / (z + lambda * x)
        } else {
            z - lambda * x
        };
        let f = y * eta;
        let g = x * z - lambda * e;
        let psi = if e < 0.0 { f.atan2(g) } else { f.asinh() };
        let t = (x - lambda * z - psi / y) / e;
        let one_minus_x2 = -e;
        let l3 = self.lambda2 * lambda;
        let l5 = l3 * self.lambda2;
        let om = 1.0 - self.lambda2;
        let dt = (3.0 * t * x - 2.0 + 2.0 * l3 * x / z) / one_minus_x2;
        let d2t = (3.0 * t + 5.0 * x * dt + 2.0 * om * l3 / (z * z * z)) / one_minus_x2;
        let d3t = (7.0 * x * d2t + 8.0 * dt - 6.0 * om * l5 * x / (z * z * z * z * z)) / one_minus_x2;
        [t, dt, d2t, d3t]
    }

    /// `T = (eta^3 Q + 4 lambda eta) / 2`, `Q = 4/3 2F1(3, 1; 5/2; S)`,
    /// `S = (1 - lambda - x eta) / 2`, carried through third-order jets.
    fn series(&self, x: f64) -> [f64; 4] {
        let lambda = self.lambda;
        let xj = Jet::variable(x);
        let z = (Jet::constant(1.0 - self.lambda2) + xj * xj * self.lambda2).sqrt();
        let eta = z - xj * lambda;
        let s = (Jet::constant(1.0 - lambda) - xj * eta) * 0.5;
        let q = hyp_jet(s) * (4.0 / 3.0);
        let t = (eta * eta * eta * q + eta * (4.0 * lambda)) * 0.5;
        t.0
    }
}

/// `2F1(3, 1; 5/2; S)` composed with a jet `S(x)`. Near `x = 1` the argument
/// is O(1e-2), far inside the disk of convergence.
fn hyp_jet(s: Jet) -> Jet {
    let arg = s.0[0];
    let f0 = gauss_2f1(3.0, 1.0, 2.5, arg).map_or(f64::NAN, |v| v.value);
    let f1 = 1.2 * gauss_2f1(4.0, 2.0, 3.5, arg).map_or(f64::NAN, |v| v.value);
    let f2 = 1.2 * (4.0 * 2.0 / 3.5) * gauss_2f1(5.0, 3.0, 4.5, arg).map_or(f64::NAN, |v| v.value);
    let f3 = 1.2 * (8.0 / 3.5) * (5.0 * 3.0 / 4.5) * gauss_2f1(6.0, 4.0, 5.5, arg).map_or(f64::NAN, |v| v.value);
    s.compose([f0, f1, f2, f3])
}

/// Value and first three derivatives of a scalar function of one variable.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Jet([f64; 4]);

impl Jet {
    fn constant(v: f64) -> Self {
        Self([v, 0.0, 0.0, 0.0])
    }

    fn variable(v: f64) -> Self {
        Self([v, 1.0, 0.0, 0.0])
    }

    /// `f(self)` given `f` and its derivatives at `self.0[0]` (Faa di Bruno).
    fn compose(self, f: [f64; 4]) -> Self {
        let [_, u1, u2, u3] = self.0;
        Self([
            f[0],
            f[1] * u1,
            f[2] * u1 * u1 + f[1] * u2,
            f[3] * u1 * u1 * u1 + 3.0 * f[2] * u1 * u2 + f[1] * u3,
        ])
    }

    fn sqrt(self) -> Self {
        let r = self.0[0].sqrt();
        let inv = 1.0 / self.0[0];
        self.compose([r, 0.5 * r * inv, -0.25 * r * inv * inv, 0.375 * r * inv * inv * inv])
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet(std::array::from_fn(|i| self.0[i] + o.0[i]))
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet(std::array::from_fn(|i| self.0[i] - o.0[i]))
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let a = self.0;
        let b = o.0;
        Jet([
            a[0] * b[0],
            a[1] * b[0] + a[0] * b[1],
            a[2] * b[0] + 2.0 * a[1] * b[1] + a[0] * b[2],
            a[3] * b[0] + 3.0 * a[2] * b[1] + 3.0 * a[1] * b[2] + a[0] * b[3],
        ])
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, k: f64) -> Jet {
        Jet(self.0.map(|v| v * k))
    }
}

impl TimeOfFlight for LancasterX {
    fn eval(&self, x: f64) -> TofEvaluation {
        if !(x > -1.0) {
            return TofEvaluation::flagged(DomainFlag::BeyondAsymptote);
        }
        let [t, dt, d2t, d3t] = self.nondimensional(x);
        let k = self.scale;
        TofEvaluation {
            t: k * t,
            dt: Some(k * dt),
            d2t: Some(k * d2t),
            d3t: Some(k * d3t),
            domain_flag: DomainFlag::InDomain,
        }
    }

    fn domain(&self) -> DomainSpec {
        DomainSpec {
            lower: -1.0,
            upper: f64::INFINITY,
            singularities: vec![-1.0],
        }
    }

    fn increasing(&self) -> bool {
        false
    }
}

pub fn tof_lancaster_x(x: f64, geom: &TransferGeometry) -> TofEvaluation {
    LancasterX::new(geom).eval(x)
}
