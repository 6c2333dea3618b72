//! Universal-variable transfer time in Bate's `z = dE^2` (`-dF^2` for
//! hyperbolas), with `mu = 1`:
//!
//! ```text
//! y(z) = r1 + r2 + A (z S - 1) / sqrt(C)
//! t(z) = (y / C)^(3/2) S + A sqrt(y)
//! ```

use std::f64::consts::PI;

use super::{DomainFlag, DomainSpec, TimeOfFlight, TofEvaluation};
use crate::geometry::TransferGeometry;
use crate::specfun::{stumpff, STUMPFF_Z_MIN};

/// First elliptic asymptote, `z = (2 pi)^2`.
pub const BATE_ASYMPTOTE: f64 = 4.0 * PI * PI;

const WALL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct BateZ {
    a: f64,
    r_sum: f64,
}

/// Intermediate quantities at one `z`, reused by the velocity stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatePoint {
    pub y: f64,
    pub c_val: f64,
    pub s_val: f64,
}

impl BateZ {
    pub fn new(geom: &TransferGeometry) -> Self {
        Self {
            a: geom.universal_a(),
            r_sum: geom.r1n + geom.r2n,
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `y(z)`, or `None` where the Stumpff functions are out of range.
    pub fn point(&self, z: f64) -> Option<BatePoint> {
        let st = stumpff(z).ok()?;
        let y = self.r_sum + self.a * (z * st.s_val - 1.0) / st.c_val.sqrt();
        Some(BatePoint {
            y,
            c_val: st.c_val,
            s_val: st.s_val,
        })
    }

    /// Zero of `y(z)` for `A > 0`, by bisection on the sign of `y`; `-inf`
    /// when `A <= 0` (y stays positive as `z -> -inf`).
    pub fn wall(&self) -> f64 {
        if self.a <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let y_at = |z: f64| self.point(z).map_or(-1.0, |p| p.y);
        let mut hi = 0.0;
        if y_at(hi) <= 0.0 {
            // y(z) increases with z; find a positive point below the asymptote
            let mut lo = 0.0;
            let mut top = BATE_ASYMPTOTE;
            while top - lo > WALL_TOL {
                let mid = 0.5 * (lo + top);
                if y_at(mid) > 0.0 {
                    top = mid;
                } else {
                    lo = mid;
                }
            }
            return top;
        }
        let mut lo = -1.0;
        while y_at(lo) > 0.0 {
            hi = lo;
            lo *= 2.0;
            if lo < STUMPFF_Z_MIN {
                return f64::NEG_INFINITY;
            }
        }
        while hi - lo > WALL_TOL {
            let mid = 0.5 * (lo + hi);
            if y_at(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

impl TimeOfFlight for BateZ {
    fn eval(&self, z: f64) -> TofEvaluation {
        if z >= BATE_ASYMPTOTE {
            return TofEvaluation::flagged(DomainFlag::BeyondAsymptote);
        }
        let st = match stumpff(z) {
            Ok(st) => st,
            // the far hyperbolic end: t -> 0 for A < 0, already past the
            // wall for A > 0
            Err(_) if self.a <= 0.0 => return TofEvaluation::flagged(DomainFlag::BelowLowerLimit),
            Err(_) => return TofEvaluation::flagged(DomainFlag::NonReal),
        };
        let (c, s) = (st.c_val, st.s_val);
        let sqrt_c = c.sqrt();
        let zs1 = z * s - 1.0;
        let y = self.r_sum + self.a * zs1 / sqrt_c;
        if y < 0.0 {
            return TofEvaluation::flagged(DomainFlag::NonReal);
        }
        if y == 0.0 {
            return TofEvaluation::flagged(DomainFlag::BelowLowerLimit);
        }
        let sqrt_y = y.sqrt();
        let chi2 = y / c;
        let chi = chi2.sqrt();
        let chi3 = chi2 * chi;
        let t = chi3 * s + self.a * sqrt_y;

        let dy = self.a * ((s + z * st.ds_dz) * sqrt_c - zs1 * st.dc_dz / (2.0 * sqrt_c)) / c;
        let dchi2 = (dy * c - y * st.dc_dz) / (c * c);
        let dchi3 = 1.5 * chi * dchi2;
        let dt = dchi3 * s + chi3 * st.ds_dz + self.a * dy / (2.0 * sqrt_y);
        TofEvaluation {
            t,
            dt: Some(dt),
            d2t: None,
            d3t: None,
            domain_flag: DomainFlag::InDomain,
        }
    }

    fn domain(&self) -> DomainSpec {
        DomainSpec {
            lower: self.wall(),
            upper: BATE_ASYMPTOTE,
            singularities: vec![BATE_ASYMPTOTE],
        }
    }
}

pub fn tof_bate_z(z: f64, geom: &TransferGeometry) -> TofEvaluation {
    BateZ::new(geom).eval(z)
}
