//! Transfer-time formulations `t(w; geometry)`.
//!
//! Every formulation returns time in the normalized units of
//! [`TransferGeometry`](crate::geometry::TransferGeometry) (`mu = 1`,
//! `|r1| = 1`), so values from different parameterizations are directly
//! comparable.

mod bate;
mod battin;
mod gauss;
mod lagrange;
mod lancaster;
mod simo;

pub use bate::{tof_bate_z, BateZ, BATE_ASYMPTOTE};
pub use battin::{battin_step, BattinConstants, BattinState};
pub use gauss::{gauss_step, GaussConstants, GaussState};
pub use lagrange::{tof_lagrange_x, LagrangeX};
pub use lancaster::{tof_lancaster_x, LancasterX, NEAR_PARABOLIC_BAND};
pub use simo::{tof_simo_z, SimoZ, SIMO_ASYMPTOTE};

use thiserror::Error;

use crate::geometry::TransferGeometry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DomainFlag {
    InDomain,
    /// At or below the parameter value where the transfer time reaches zero.
    BelowLowerLimit,
    /// At or past the first (single-revolution) asymptote.
    BeyondAsymptote,
    /// The formulation has no real value here (negative radicand, divergent
    /// series).
    NonReal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TofEvaluation {
    pub t: f64,
    pub dt: Option<f64>,
    pub d2t: Option<f64>,
    pub d3t: Option<f64>,
    pub domain_flag: DomainFlag,
}

impl TofEvaluation {
    pub fn flagged(flag: DomainFlag) -> Self {
        let t = match flag {
            DomainFlag::BeyondAsymptote => f64::INFINITY,
            DomainFlag::BelowLowerLimit => 0.0,
            _ => f64::NAN,
        };
        Self {
            t,
            dt: None,
            d2t: None,
            d3t: None,
            domain_flag: flag,
        }
    }

    pub fn in_domain(&self) -> bool {
        self.domain_flag == DomainFlag::InDomain
    }
}

/// Parameter domain of a formulation for single-revolution transfers.
#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    /// Lower wall; `-inf` when the formulation has none.
    pub lower: f64,
    /// First asymptote (`t -> inf`).
    pub upper: f64,
    pub singularities: Vec<f64>,
}

/// A transfer-time formulation prepared for one geometry.
pub trait TimeOfFlight {
    fn eval(&self, w: f64) -> TofEvaluation;

    fn domain(&self) -> DomainSpec;

    /// Whether `t` increases with the parameter.
    fn increasing(&self) -> bool {
        true
    }
}

/// Failures of one successive-substitution update.
#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SubstitutionError {
    #[error("sector-to-triangle ratio is not positive")]
    NonPhysicalY,
    #[error("negative radicand")]
    NegativeRadicand,
    #[error("series argument outside its convergence range")]
    SeriesDivergence,
}

/// Maps a Lancaster/Lagrange `x` to Bate's `z = dE^2` (or `-dF^2`).
pub fn lancaster_x_to_bate_z(x: f64, geom: &TransferGeometry) -> f64 {
    let lambda = geom.lambda;
    let one_minus_x2 = (1.0 - x) * (1.0 + x);
    if one_minus_x2 > 0.0 {
        let alpha_half = one_minus_x2.sqrt().atan2(x);
        let beta_half = (lambda * one_minus_x2.sqrt()).asin();
        let de = 2.0 * (alpha_half - beta_half);
        de * de
    } else if one_minus_x2 < 0.0 {
        let q = (-one_minus_x2).sqrt();
        let df = 2.0 * (q.asinh() - (lambda * q).asinh());
        -df * df
    } else {
        0.0
    }
}
