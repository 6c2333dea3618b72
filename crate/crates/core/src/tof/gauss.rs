//! Gauss's method: successive substitution on the sector-to-triangle ratio
//! `y`, with `X(x1)` summed from its power series.

use super::SubstitutionError;
use crate::geometry::TransferGeometry;

const SERIES_REL_TOL: f64 = 1e-15;
const SERIES_MAX_TERMS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussConstants {
    pub l: f64,
    pub m: f64,
    pub cos_half: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussState {
    pub y_next: f64,
    pub x1: f64,
    pub big_x: f64,
}

impl GaussConstants {
    pub fn new(geom: &TransferGeometry) -> Self {
        let cos_half = (0.5 * geom.theta).cos();
        let rr = (geom.r1n * geom.r2n).sqrt();
        let k = 2.0 * rr * cos_half;
        Self {
            l: (geom.r1n + geom.r2n) / (2.0 * k) - 0.5,
            m: geom.t_norm * geom.t_norm / (k * k * k),
            cos_half,
        }
    }

    /// One update `y -> 1 + X(x1) (l + x1)`, `x1 = m / y^2 - l`.
    pub fn step(&self, y: f64) -> Result<GaussState, SubstitutionError> {
        if !(y > 0.0) || self.cos_half < 0.0 {
            return Err(SubstitutionError::NonPhysicalY);
        }
        let x1 = self.m / (y * y) - self.l;
        let big_x = gauss_x_series(x1)?;
        let y_next = 1.0 + big_x * (self.l + x1);
        if !(y_next > 0.0) {
            return Err(SubstitutionError::NonPhysicalY);
        }
        Ok(GaussState { y_next, x1, big_x })
    }
}

/// `X = 4/3 (1 + 6/5 x + 6*8/(5*7) x^2 + ...)`.
pub fn gauss_x_series(x1: f64) -> Result<f64, SubstitutionError> {
    if !(x1.abs() < 1.0) {
        return Err(SubstitutionError::SeriesDivergence);
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..SERIES_MAX_TERMS {
        let kf = k as f64;
        term *= x1 * (2.0 * kf + 6.0) / (2.0 * kf + 5.0);
        sum += term;
        if term.abs() < SERIES_REL_TOL * sum.abs() {
            return Ok(4.0 / 3.0 * sum);
        }
    }
    Err(SubstitutionError::SeriesDivergence)
}

pub fn gauss_step(y: f64, geom: &TransferGeometry) -> Result<GaussState, SubstitutionError> {
    GaussConstants::new(geom).step(y)
}
