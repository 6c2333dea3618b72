//! Battin's successive-substitution algorithm on the mean-point variable `x`
//! (`x = tan^2(dE / 4)` on the elliptic side), using the continued fraction
//! `xi(x)` and a cubic in `y`.

use std::f64::consts::PI;

use super::SubstitutionError;
use crate::geometry::TransferGeometry;
use crate::specfun::{battin_xi, cubic_largest_positive_root};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BattinConstants {
    /// Mean-point radius.
    pub r_op: f64,
    pub l: f64,
    pub m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BattinState {
    pub x_next: f64,
    pub y: f64,
    pub h1: f64,
    pub h2: f64,
    pub xi: f64,
}

impl BattinConstants {
    pub fn new(geom: &TransferGeometry) -> Self {
        let (r1, r2) = (geom.r1n, geom.r2n);
        let eps = (r2 - r1) / r1;
        let ratio = r2 / r1;
        let sr = ratio.sqrt();
        let tan2_2w = 0.25 * eps * eps / (sr + ratio * (2.0 + sr));
        let q = 0.25 * geom.theta;
        let (s4, c4) = q.sin_cos();
        let (s4, c4) = (s4 * s4, c4 * c4);
        let cos_half = (0.5 * geom.theta).cos();
        let r_op = (r1 * r2).sqrt() * (c4 + tan2_2w);
        let l = if geom.theta < PI {
            (s4 + tan2_2w) / (s4 + tan2_2w + cos_half)
        } else {
            (c4 + tan2_2w - cos_half) / (c4 + tan2_2w)
        };
        let m = geom.t_norm * geom.t_norm / (8.0 * r_op * r_op * r_op);
        Self { r_op, l, m }
    }

    pub fn step(&self, x: f64) -> Result<BattinState, SubstitutionError> {
        let l = self.l;
        let xi = battin_xi(x).map_err(|_| SubstitutionError::SeriesDivergence)?.value;
        let denom = 1.0 / ((1.0 + 2.0 * x + l) * (4.0 * x + xi * (3.0 + x)));
        let h1 = (l + x) * (l + x) * (1.0 + 3.0 * x + xi) * denom;
        let h2 = self.m * (x - l + xi) * denom;
        let p = 1.0 + h1;
        let b = 27.0 * h2 / (4.0 * p * p * p);
        if !(b >= -1.0) {
            return Err(SubstitutionError::NegativeRadicand);
        }
        let y = cubic_largest_positive_root(-p, 0.0, -h2).ok_or(SubstitutionError::NegativeRadicand)?;
        let half = 0.5 * (1.0 - l);
        let x_next = (half * half + self.m / (y * y)).sqrt() - 0.5 * (1.0 + l);
        Ok(BattinState { x_next, y, h1, h2, xi })
    }

    /// `m` implied by a pair `(x, y)`; equals `m` at the fixed point.
    pub fn implied_m(&self, x: f64, y: f64) -> f64 {
        y * y * (x + 1.0) * (x + self.l)
    }

    /// Semi-major axis at the fixed point.
    pub fn semi_major_axis(&self, x: f64, y: f64) -> f64 {
        self.m * self.r_op / (2.0 * x * y * y)
    }
}

pub fn battin_step(x: f64, geom: &TransferGeometry) -> Result<BattinState, SubstitutionError> {
    BattinConstants::new(geom).step(x)
}
