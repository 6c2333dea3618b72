//! Lagrange's time equation written with Battin's hypergeometric function,
//! on the same `x` as the Lancaster form:
//! `T = (eta^3 Q(S) + 4 lambda eta) / 2`, `Q = 4/3 2F1(3, 1; 5/2; S)`.
//!
//! The series is used over the whole domain, so for `S` at or past 1 (large
//! hyperbolic or deep elliptic `x`) there is no value and the evaluation is
//! flagged `NonReal`.

use super::{DomainFlag, DomainSpec, TimeOfFlight, TofEvaluation};
use crate::geometry::TransferGeometry;
use crate::specfun::gauss_2f1;

#[derive(Debug, Clone, Copy)]
pub struct LagrangeX {
    lambda: f64,
    lambda2: f64,
    scale: f64,
}

impl LagrangeX {
    pub fn new(geom: &TransferGeometry) -> Self {
        Self {
            lambda: geom.lambda,
            lambda2: geom.lambda * geom.lambda,
            scale: (0.5 * geom.s * geom.s * geom.s).sqrt(),
        }
    }
}

impl TimeOfFlight for LagrangeX {
    fn eval(&self, x: f64) -> TofEvaluation {
        if !(x > -1.0) {
            return TofEvaluation::flagged(DomainFlag::BeyondAsymptote);
        }
        let lambda = self.lambda;
        let z = (1.0 - self.lambda2 + self.lambda2 * x * x).sqrt();
        let eta = if lambda * x > 0.0 {
            (1.0 - self.lambda2) / (z + lambda * x)
        } else {
            z - lambda * x
        };
        let s1 = 0.5 * (1.0 - lambda - x * eta);
        let (f, df) = match (gauss_2f1(3.0, 1.0, 2.5, s1), gauss_2f1(4.0, 2.0, 3.5, s1)) {
            (Ok(f), Ok(df)) => (f.value, 1.2 * df.value),
            _ => return TofEvaluation::flagged(DomainFlag::NonReal),
        };
        let q = 4.0 / 3.0 * f;
        let dq = 4.0 / 3.0 * df;
        let eta2 = eta * eta;
        let t = 0.5 * (eta2 * eta * q + 4.0 * lambda * eta);
        let deta = self.lambda2 * x / z - lambda;
        let ds1 = -0.5 * (eta + x * deta);
        let dt = 0.5 * (3.0 * eta2 * deta * q + eta2 * eta * dq * ds1 + 4.0 * lambda * deta);
        TofEvaluation {
            t: self.scale * t,
            dt: Some(self.scale * dt),
            d2t: None,
            d3t: None,
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

pub fn tof_lagrange_x(x: f64, geom: &TransferGeometry) -> TofEvaluation {
    LagrangeX::new(geom).eval(x)
}
