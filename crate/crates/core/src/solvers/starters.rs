//! Initial guesses for the x-based solvers.

use std::f64::consts::{LN_2, PI};

/// Gooding's bilinear starter for the single-revolution case. `t_gooding`
/// is Gooding's non-dimensional time, twice Izzo's.
pub fn gooding_starter(lambda: f64, t_gooding: f64, t0_gooding: f64) -> f64 {
    const C0: f64 = 1.7;
    const C1: f64 = 0.5;
    const C2: f64 = 0.03;
    let thr2 = (1.0 - lambda * lambda).atan2(2.0 * lambda) / PI;
    let tdiff = t_gooding - t0_gooding;
    if tdiff <= 0.0 {
        return t0_gooding * tdiff / (-4.0 * t_gooding);
    }
    let mut x = -tdiff / (tdiff + 4.0);
    let w = x + C0 * (2.0 * (1.0 - thr2)).sqrt();
    if w < 0.0 {
        x -= (-w).powf(1.0 / 16.0) * (x + (tdiff / (tdiff + 1.5 * t0_gooding)).sqrt());
    }
    let w = 4.0 / (4.0 + tdiff);
    x * (1.0 + x * (C1 * w - C2 * x * w.sqrt()))
}

/// Izzo's piecewise starter in his non-dimensional time `t`.
pub fn izzo_starter(lambda: f64, t: f64) -> f64 {
    let t0 = lambda.acos() + lambda * (1.0 - lambda * lambda).sqrt();
    let t1 = 2.0 / 3.0 * (1.0 - lambda * lambda * lambda);
    if t >= t0 {
        (t0 / t).powf(2.0 / 3.0) - 1.0
    } else if t < t1 {
        2.5 * t1 / t * (t1 - t) / (1.0 - lambda.powi(5)) + 1.0
    } else {
        // passes through (t0, 0) and (t1, 1) in log-log
        (LN_2 * (t / t0).ln() / (t1 / t0).ln()).exp() - 1.0
    }
}

/// Single-revolution regula falsi starters on `x`, from the older Izzo
/// implementation in the PyKEP/PaGMO toolbox.
pub const IZZO_RF_X1: f64 = -0.5233;
pub const IZZO_RF_X2: f64 = 0.5233;
