use nalgebra::Vector3;

use super::starters::{gooding_starter, izzo_starter, IZZO_RF_X1, IZZO_RF_X2};
use super::{FailureReason, NormalizedOutcome, SolveStatus};
use crate::geometry::TransferGeometry;
use crate::rootfind::{
    bisection, bracket_expand, halley_fixed, householder3, newton_bracketed, newton_raphson, regula_falsi,
    IterationTrace, RootFindError, ToleranceSpec, TraceStatus,
};
use crate::specfun::STUMPFF_Z_MIN;
use crate::tof::{
    BateZ, BattinConstants, DomainFlag, GaussConstants, LagrangeX, LancasterX, SimoZ, SubstitutionError, TimeOfFlight,
    TofEvaluation, BATE_ASYMPTOTE,
};
use crate::velocity::{
    elements_from_universal, velocity_from_elements, velocity_from_fg, velocity_from_radial_transversal,
    FgCoefficients, UniversalPoint, VelocityComponents, VelocityError, G_FLOOR,
};

/// Halley steps in Gooding's method.
const GOODING_ITERATIONS: usize = 3;
/// Fixed bisection bracket for Bate's z.
const BATE_BISECTION_LO: f64 = -4.0 * std::f64::consts::PI;
const BATE_BISECTION_HI: f64 = BATE_ASYMPTOTE;
/// Seed half-width around Simó's starter.
const SIMO_SEED_HALF_WIDTH: f64 = 0.5;

type Velocities = Result<(Vector3<f64>, Vector3<f64>), VelocityError>;

fn nan3() -> Vector3<f64> {
    Vector3::repeat(f64::NAN)
}

fn empty_trace(w: f64) -> IterationTrace {
    IterationTrace::start(w, &TofEvaluation::flagged(DomainFlag::NonReal))
}

fn failed(reason: FailureReason, trace: IterationTrace, time_residual: f64) -> NormalizedOutcome {
    NormalizedOutcome {
        v1: nan3(),
        v2: nan3(),
        status: SolveStatus::Failed(reason),
        iterations: trace.iterations,
        time_residual,
        trace,
    }
}

fn velocity_failure(e: VelocityError) -> FailureReason {
    match e {
        VelocityError::GSingularity(_) => FailureReason::GSingularity,
        VelocityError::BadNormal | VelocityError::InvalidElements(_) => FailureReason::NonReal,
    }
}

/// Common tail: classify the trace, then build velocities.
fn finish<V>(
    geom: &TransferGeometry,
    trace: IterationTrace,
    non_real: FailureReason,
    velocities: V,
) -> NormalizedOutcome
where
    V: FnOnce(f64) -> Velocities,
{
    let residual = trace.residual(geom.t_norm);
    let reason = match trace.status {
        TraceStatus::Converged => None,
        TraceStatus::MaxIterations => Some(FailureReason::MaxIterations),
        TraceStatus::Diverged => Some(FailureReason::AsymptoteJump),
        TraceStatus::NonRealEncountered => Some(non_real),
    };
    if let Some(reason) = reason {
        return failed(reason, trace, residual);
    }
    match velocities(trace.final_w) {
        Ok((v1, v2)) if v1.iter().chain(v2.iter()).all(|c| c.is_finite()) => NormalizedOutcome {
            v1,
            v2,
            status: SolveStatus::Converged,
            iterations: trace.iterations,
            time_residual: residual,
            trace,
        },
        Ok(_) => failed(FailureReason::NonReal, trace, residual),
        Err(e) => failed(velocity_failure(e), trace, residual),
    }
}

fn root_error(e: RootFindError, w: f64) -> NormalizedOutcome {
    let reason = match e {
        RootFindError::NotBracketed | RootFindError::DomainExhausted => FailureReason::NotBracketed,
        RootFindError::ZeroDenominator => FailureReason::NonReal,
        RootFindError::InvalidTolerance => FailureReason::MaxIterations,
    };
    failed(reason, empty_trace(w), f64::NAN)
}

fn radial_transversal(geom: &TransferGeometry, x: f64) -> Velocities {
    let comp = VelocityComponents::from_lancaster_x(geom, x);
    velocity_from_radial_transversal(&comp, &geom.r1_vec, &geom.r2_vec, &geom.plane_normal)
}

fn bate_fg(geom: &TransferGeometry, bate: &BateZ, z: f64) -> Velocities {
    let y = bate.point(z).map_or(f64::NAN, |p| p.y);
    velocity_from_fg(&FgCoefficients::from_bate(geom, y), &geom.r1_vec, &geom.r2_vec)
}

fn universal_elements(geom: &TransferGeometry, u: &UniversalPoint) -> Velocities {
    velocity_from_elements(&elements_from_universal(geom, u), 1.0)
}

pub(super) fn lagrange_nr(geom: &TransferGeometry, tol: &ToleranceSpec) -> NormalizedOutcome {
    let f = LagrangeX::new(geom);
    match newton_raphson(|x| f.eval(x), geom.t_norm, 0.0, tol) {
        Ok(trace) => finish(geom, trace, FailureReason::DivergentSeries, |x| {
            radial_transversal(geom, x)
        }),
        Err(e) => root_error(e, 0.0),
    }
}

pub(super) fn gauss_ss(geom: &TransferGeometry, tol: &ToleranceSpec) -> NormalizedOutcome {
    // g = r1 r2 sin(theta) / sqrt(p) vanishes with the triangle area
    if (geom.r1n * geom.r2n * geom.sin_theta).abs() <= G_FLOOR {
        return failed(FailureReason::GSingularity, empty_trace(1.0), f64::NAN);
    }
    let c = GaussConstants::new(geom);
    let target = geom.t_norm;
    // the time implied by y_k is target * y_{k+1} / y_k: at the fixed point
    // both sides of the time equation agree
    let implied = |y: f64, y_next: f64| TofEvaluation {
        t: target * y_next / y,
        dt: None,
        d2t: None,
        d3t: None,
        domain_flag: DomainFlag::InDomain,
    };
    let mut y = 1.0;
    let mut trace: Option<IterationTrace> = None;
    loop {
        let state = match c.step(y) {
            Ok(s) => s,
            Err(e) => {
                let reason = match e {
                    SubstitutionError::NonPhysicalY => FailureReason::NonPhysicalY,
                    SubstitutionError::SeriesDivergence => FailureReason::DivergentSeries,
                    SubstitutionError::NegativeRadicand => FailureReason::NonReal,
                };
                return failed(reason, trace.unwrap_or_else(|| empty_trace(y)), f64::NAN);
            }
        };
        let e = implied(y, state.y_next);
        let tr = match trace.as_mut() {
            None => trace.insert(IterationTrace::start(y, &e)),
            Some(tr) => {
                tr.push(y, &e);
                tr
            }
        };
        let residual = (e.t - target).abs();
        if residual <= tol.time_tol {
            let tr = trace.take().expect("set above").finish(TraceStatus::Converged);
            let y_star = state.y_next;
            return finish(geom, tr, FailureReason::NonReal, |_| {
                velocity_from_fg(&FgCoefficients::from_gauss(geom, y_star), &geom.r1_vec, &geom.r2_vec)
            });
        }
        if tr.iterations >= tol.max_iter {
            let tr = trace.take().expect("set above").finish(TraceStatus::MaxIterations);
            return failed(FailureReason::MaxIterations, tr, residual);
        }
        y = state.y_next;
    }
}

pub(super) fn bate_nr(geom: &TransferGeometry, tol: &ToleranceSpec) -> NormalizedOutcome {
    let b = BateZ::new(geom);
    match newton_raphson(|z| b.eval(z), geom.t_norm, 0.0, tol) {
        Ok(trace) => finish(geom, trace, FailureReason::NonReal, |z| bate_fg(geom, &b, z)),
        Err(e) => root_error(e, 0.0),
    }
}

pub(super) fn bate_nr_bracketed(geom: &TransferGeometry, tol: &ToleranceSpec) -> NormalizedOutcome {
    let b = BateZ::new(geom);
    let domain = b.domain();
    let br = match bracket_expand(
        |z| b.eval(z),
        BATE_BISECTION_LO,
        BATE_BISECTION_HI,
        geom.t_norm,
        &domain,
    ) {
        Ok(br) => br,
        Err(e) => return root_error(e, 0.0),
    };
    match newton_bracketed(|z| b.eval(z), geom.t_norm, br.lo, br.hi, br.starter, tol) {
        Ok(trace) => finish(geom, trace, FailureReason::NonReal, |z| bate_fg(geom, &b, z)),
        Err(e) => root_error(e, br.starter),
    }
}

pub(super) fn bate_bisection(geom: &TransferGeometry, tol: &ToleranceSpec) -> NormalizedOutcome {
    let b = BateZ::new(geom);
    let bis_tol = ToleranceSpec {
        max_iter: tol.max_iter.max(crate::rootfind::DEFAULT_BISECTION_MAX_ITER),
        ..*tol
    };
    let mut lo = BATE_BISECTION_LO;
    loop {
        match bisection(|z| b.eval(z), geom.t_norm, lo, BATE_BISECTION_HI, &bis_tol) {
            Ok(trace) => return finish(geom, trace, FailureReason::NonReal, |z| bate_fg(geom, &b, z)),
            // fast hyperbolic transfers need a lower z than the fixed bracket
            Err(RootFindError::NotBracketed) if 2.0 * lo > STUMPFF_Z_MIN => lo *= 2.0,
            Err(e) => return root_error(e, lo),
        }
    }
}

pub(super) fn simo_bisection(geom: &TransferGeometry, tol: &ToleranceSpec) -> NormalizedOutcome {
    let s = SimoZ::new(geom);
    let starter = if geom.t_norm >= geom.parabolic_time() {
        0.25 * geom.theta * geom.theta
    } else {
        0.0
    };
    let domain = s.domain();
    let br = match bracket_expand(
        |z| s.eval(z),
        starter - SIMO_SEED_HALF_WIDTH,
        starter + SIMO_SEED_HALF_WIDTH,
        geom.t_norm,
        &domain,
    ) {
        Ok(br) => br,
        Err(e) => return root_error(e, starter),
    };
    let bis_tol = ToleranceSpec {
        max_iter: tol.max_iter.max(crate::rootfind::DEFAULT_BISECTION_MAX_ITER),
        ..*tol
    };
    match bisection(|z| s.eval(z), geom.t_norm, br.lo, br.hi, &bis_tol) {
        Ok(trace) => finish(geom, trace, FailureReason::NonReal, |z| {
            let (y, f) = s.point(z);
            let u = UniversalPoint {
                z: 4.0 * z,
                y,
                c_val: 0.5 * f.c1 * f.c1,
                s_val: f.q,
            };
            universal_elements(geom, &u)
        }),
        Err(e) => root_error(e, starter),
    }
}

/// Bate's `z` for a Battin `x = tan^2(dE/4)` (`-tanh^2(dF/4)`).
pub(crate) fn battin_x_to_bate_z(x: f64) -> f64 {
    if x > 0.0 {
        let de = 4.0 * x.sqrt().atan();
        de * de
    } else if x < 0.0 {
        let df = 4.0 * (-x).sqrt().atanh();
        -df * df
    } else {
        0.0
    }
}

pub(super) fn battin_ss(geom: &TransferGeometry, tol: &ToleranceSpec) -> NormalizedOutcome {
    let c = BattinConstants::new(geom);
    let target = geom.t_norm;
    let mut x = if target >= geom.parabolic_time() { c.l } else { 0.0 };
    let mut trace: Option<IterationTrace> = None;
    loop {
        let state = match c.step(x) {
            Ok(s) if s.x_next.is_finite() => s,
            Ok(_) => {
                return failed(
                    FailureReason::NonReal,
                    trace.unwrap_or_else(|| empty_trace(x)),
                    f64::NAN,
                )
            }
            Err(e) => {
                let reason = match e {
                    SubstitutionError::SeriesDivergence => FailureReason::DivergentSeries,
                    SubstitutionError::NonPhysicalY => FailureReason::NonPhysicalY,
                    SubstitutionError::NegativeRadicand => FailureReason::NonReal,
                };
                return failed(reason, trace.unwrap_or_else(|| empty_trace(x)), f64::NAN);
            }
        };
        let m_impl = c.implied_m(x, state.y);
        let e = TofEvaluation {
            t: if m_impl >= 0.0 {
                target * (m_impl / c.m).sqrt()
            } else {
                f64::NAN
            },
            dt: None,
            d2t: None,
            d3t: None,
            domain_flag: DomainFlag::InDomain,
        };
        let tr = match trace.as_mut() {
            None => trace.insert(IterationTrace::start(x, &e)),
            Some(tr) => {
                tr.push(x, &e);
                tr
            }
        };
        let residual = (e.t - target).abs();
        if residual <= tol.time_tol {
            let tr = trace.take().expect("set above").finish(TraceStatus::Converged);
            return finish(geom, tr, FailureReason::NonReal, |x| {
                let z = battin_x_to_bate_z(x);
                let p = BateZ::new(geom).point(z);
                match p {
                    Some(p) if p.y > 0.0 => universal_elements(
                        geom,
                        &UniversalPoint {
                            z,
                            y: p.y,
                            c_val: p.c_val,
                            s_val: p.s_val,
                        },
                    ),
                    _ => Err(VelocityError::InvalidElements(f64::NAN)),
                }
            });
        }
        if tr.iterations >= tol.max_iter {
            let tr = trace.take().expect("set above").finish(TraceStatus::MaxIterations);
            let reason = if residual.is_nan() {
                FailureReason::NonReal
            } else {
                FailureReason::MaxIterations
            };
            return failed(reason, tr, residual);
        }
        x = state.x_next;
    }
}

pub(super) fn gooding_halley(geom: &TransferGeometry, tol: &ToleranceSpec) -> NormalizedOutcome {
    let f = LancasterX::new(geom);
    let t_izzo = geom.t_norm / f.scale();
    let t0 = f.nondimensional(0.0)[0];
    let x0 = gooding_starter(geom.lambda, 2.0 * t_izzo, 2.0 * t0);
    match halley_fixed(|x| f.eval(x), geom.t_norm, x0, GOODING_ITERATIONS, tol.time_tol) {
        Ok(trace) => finish(geom, trace, FailureReason::NonReal, |x| radial_transversal(geom, x)),
        Err(e) => root_error(e, x0),
    }
}

pub(super) fn izzo_householder(geom: &TransferGeometry, tol: &ToleranceSpec) -> NormalizedOutcome {
    let f = LancasterX::new(geom);
    let x0 = izzo_starter(geom.lambda, geom.t_norm / f.scale());
    match householder3(|x| f.eval(x), geom.t_norm, x0, tol) {
        Ok(trace) => finish(geom, trace, FailureReason::NonReal, |x| radial_transversal(geom, x)),
        Err(e) => root_error(e, x0),
    }
}

pub(super) fn izzo_regula_falsi(geom: &TransferGeometry, tol: &ToleranceSpec) -> NormalizedOutcome {
    let f = LancasterX::new(geom);
    let target = geom.t_norm;
    // iterate on xi = ln(1 + x), tau = ln t
    let log_eval = |xi: f64| {
        let e = f.eval(xi.exp_m1());
        TofEvaluation {
            t: e.t.ln(),
            dt: None,
            d2t: None,
            d3t: None,
            domain_flag: e.domain_flag,
        }
    };
    let log_tol = ToleranceSpec {
        time_tol: (tol.time_tol / target).ln_1p(),
        max_iter: tol.max_iter,
    };
    let xi1 = IZZO_RF_X1.ln_1p();
    let xi2 = IZZO_RF_X2.ln_1p();
    match regula_falsi(log_eval, target.ln(), xi1, xi2, &log_tol) {
        Ok(mut trace) => {
            // report the trace in x and t
            for s in trace.history.iter_mut() {
                s.w = s.w.exp_m1();
                s.t = s.t.exp();
            }
            trace.final_w = trace.final_w.exp_m1();
            finish(geom, trace, FailureReason::NonReal, |x| radial_transversal(geom, x))
        }
        Err(e) => root_error(e, IZZO_RF_X2),
    }
}
