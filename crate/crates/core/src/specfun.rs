//! Special functions used by the time-of-flight formulations: the Stumpff
//! pair, the Gauss hypergeometric series, Battin's continued fraction and a
//! cubic root selector.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum SpecFunError {
    #[error("argument {0} outside the guard range")]
    OutOfGuardRange(f64),
    #[error("hypergeometric series diverges for |x| = {0} >= 1")]
    DivergentSeries(f64),
    #[error("no convergence after {0} terms")]
    NoConvergence(usize),
    #[error("invalid parameter")]
    InvalidParameter,
}

/// Below this |z| the Stumpff functions are summed as power series.
pub const STUMPFF_SERIES_THRESHOLD: f64 = 1e-2;
/// Below this |z| the derivatives still come from the series.
pub const STUMPFF_DERIVATIVE_SERIES_THRESHOLD: f64 = 1.0;
/// Guard range for z. The upper bound admits 100 elliptic revolutions; the
/// lower bound keeps cosh(sqrt(-z)) finite.
pub const STUMPFF_Z_MIN: f64 = -4.0e5;
pub const STUMPFF_Z_MAX: f64 = 3.9e5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StumpffPair {
    pub c_val: f64,
    pub s_val: f64,
    pub dc_dz: f64,
    pub ds_dz: f64,
}

/// Stumpff functions `C(z)`, `S(z)` and their z-derivatives.
#[inline]
pub fn stumpff(z: f64) -> Result<StumpffPair, SpecFunError> {
    if !(z > STUMPFF_Z_MIN && z < STUMPFF_Z_MAX) {
        return Err(SpecFunError::OutOfGuardRange(z));
    }
    if z.abs() < STUMPFF_SERIES_THRESHOLD {
        return Ok(stumpff_series(z));
    }
    let (c_val, s_val) = if z > 0.0 {
        let sz = z.sqrt();
        // 1 - cos u = 2 sin^2(u/2) keeps C accurate as sqrt(z) -> 2 pi
        let half = (0.5 * sz).sin();
        (2.0 * half * half / z, (sz - sz.sin()) / (z * sz))
    } else {
        let sz = (-z).sqrt();
        ((sz.cosh() - 1.0) / -z, (sz.sinh() - sz) / (-z * sz))
    };
    if z.abs() < STUMPFF_DERIVATIVE_SERIES_THRESHOLD {
        // the closed-form derivatives cancel to O(z) and lose digits here
        let series = stumpff_series(z);
        return Ok(StumpffPair { c_val, s_val, ..series });
    }
    let inv_2z = 0.5 / z;
    Ok(StumpffPair {
        c_val,
        s_val,
        dc_dz: (1.0 - z * s_val - 2.0 * c_val) * inv_2z,
        ds_dz: (c_val - 3.0 * s_val) * inv_2z,
    })
}

fn stumpff_series(z: f64) -> StumpffPair {
    // C = sum (-z)^k / (2k+2)!,  S = sum (-z)^k / (2k+3)!
    let mut c_term = 0.5;
    let mut s_term = 1.0 / 6.0;
    let mut c_val = c_term;
    let mut s_val = s_term;
    let mut dc = 0.0;
    let mut ds = 0.0;
    let mut zpow_prev = 1.0; // (-z)^(k-1)
    for k in 1..30 {
        let kf = k as f64;
        let c_coef = c_term / ((2.0 * kf + 1.0) * (2.0 * kf + 2.0));
        let s_coef = s_term / ((2.0 * kf + 2.0) * (2.0 * kf + 3.0));
        // d/dz (-z)^k = -k (-z)^(k-1)
        dc -= kf * c_coef * zpow_prev;
        ds -= kf * s_coef * zpow_prev;
        zpow_prev *= -z;
        c_term = c_coef;
        s_term = s_coef;
        let c_add = c_coef * zpow_prev;
        let s_add = s_coef * zpow_prev;
        c_val += c_add;
        s_val += s_add;
        if c_add.abs() < 1e-18 && s_add.abs() < 1e-18 && k > 2 {
            break;
        }
    }
    StumpffPair {
        c_val,
        s_val,
        dc_dz: dc,
        ds_dz: ds,
    }
}

pub const HYPERGEOMETRIC_REL_TOL: f64 = 1e-14;
pub const HYPERGEOMETRIC_MAX_TERMS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub terms: usize,
}

/// Gauss hypergeometric function `2F1(a, b; c; x)` by direct summation.
///
/// The series is only used inside its disk of convergence; `|x| >= 1` is
/// reported as [`SpecFunError::DivergentSeries`] rather than attempted.
pub fn gauss_2f1(a: f64, b: f64, c: f64, x: f64) -> Result<SeriesValue, SpecFunError> {
    if !x.is_finite() {
        return Err(SpecFunError::OutOfGuardRange(x));
    }
    if c <= 0.0 && c.fract() == 0.0 {
        return Err(SpecFunError::InvalidParameter);
    }
    if x.abs() >= 1.0 {
        return Err(SpecFunError::DivergentSeries(x.abs()));
    }
    let mut sum = 1.0;
    let mut term = 1.0;
    for n in 0..HYPERGEOMETRIC_MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * x;
        sum += term;
        if term.abs() <= HYPERGEOMETRIC_REL_TOL * sum.abs() {
            return Ok(SeriesValue {
                value: sum,
                terms: n + 1,
            });
        }
    }
    Err(SpecFunError::NoConvergence(HYPERGEOMETRIC_MAX_TERMS))
}

pub const BATTIN_XI_REL_TOL: f64 = 1e-14;
pub const BATTIN_XI_MAX_DEPTH: usize = 200;

/// Coefficient `c_n` of the continued fraction inside Battin's `xi(x)`:
/// `1/5, 9/35, 16/63, 25/99, ...`, i.e. `(n+1)^2 / ((2n+1)(2n+3))` for n >= 2.
fn xi_coefficient(n: usize) -> f64 {
    if n == 1 {
        0.2
    } else {
        let n = n as f64;
        (n + 1.0) * (n + 1.0) / ((2.0 * n + 1.0) * (2.0 * n + 3.0))
    }
}

/// Battin's `xi(x)`:
///
/// ```text
/// xi(x) = 8 (sqrt(1+x) + 1) / (3 + 1 / (5 + eta + (9/7) eta / (1 + (16/63) eta / (1 + ...))))
/// eta   = x / (sqrt(1+x) + 1)^2
/// ```
///
/// Coefficients from Battin, *An Introduction to the Mathematics and Methods
/// of Astrodynamics* (1999), sec. 7.4; the tail is summed with the forward
/// (Euler-Wallis) recurrence.
pub fn battin_xi(x: f64) -> Result<SeriesValue, SpecFunError> {
    battin_xi_with_depth(x, BATTIN_XI_MAX_DEPTH)
}

pub fn battin_xi_with_depth(x: f64, max_depth: usize) -> Result<SeriesValue, SpecFunError> {
    if !(x.is_finite() && x >= -1.0) {
        return Err(SpecFunError::OutOfGuardRange(x));
    }
    let sq = (1.0 + x).sqrt();
    let eta = x / ((1.0 + sq) * (1.0 + sq));
    // K = c1 / (1 + c2 eta / (1 + c3 eta / ...)) as a sum of corrections
    let mut del = 1.0;
    let mut term = xi_coefficient(1);
    let mut sum = term;
    let mut depth = 1;
    while term.abs() > BATTIN_XI_REL_TOL * sum.abs() {
        if depth >= max_depth {
            return Err(SpecFunError::NoConvergence(depth));
        }
        del = 1.0 / (1.0 + xi_coefficient(depth + 1) * eta * del);
        term *= del - 1.0;
        sum += term;
        depth += 1;
    }
    Ok(SeriesValue {
        value: 8.0 * (1.0 + sq) / (3.0 + sum / (1.0 + eta * sum)),
        terms: depth,
    })
}

/// Largest positive real root of the monic cubic `y^3 + b2 y^2 + b1 y + b0`,
/// by the trigonometric (three real roots) or Cardano (one real root) closed
/// form followed by two Newton polishing steps.
pub fn cubic_largest_positive_root(b2: f64, b1: f64, b0: f64) -> Option<f64> {
    let shift = b2 / 3.0;
    let p = b1 - b2 * shift;
    let q = 2.0 * shift * shift * shift - shift * b1 + b0;
    let half_q = 0.5 * q;
    let third_p = p / 3.0;
    let disc = half_q * half_q + third_p * third_p * third_p;
    let t = if disc > 0.0 {
        let sd = disc.sqrt();
        // avoid cancellation: pick the larger-magnitude cube first
        let u = (-half_q - half_q.signum() * sd).cbrt();
        let u = if half_q == 0.0 { sd.cbrt() } else { u };
        if u == 0.0 {
            0.0
        } else {
            u - third_p / u
        }
    } else if third_p == 0.0 {
        0.0
    } else {
        let m = 2.0 * (-third_p).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        m * (arg.acos() / 3.0).cos()
    };
    let mut y = t - shift;
    for _ in 0..2 {
        let f = ((y + b2) * y + b1) * y + b0;
        let df = (3.0 * y + 2.0 * b2) * y + b1;
        if df != 0.0 {
            y -= f / df;
        }
    }
    (y > 0.0 && y.is_finite()).then_some(y)
}
