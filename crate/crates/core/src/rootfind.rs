//! Iteration schemes over a scalar transfer-time evaluation.
//!
//! Every driver takes an evaluation closure `w -> TofEvaluation`, a target
//! time and a [`ToleranceSpec`], and returns an [`IterationTrace`] with every
//! evaluated point. Convergence is always declared on the time residual
//! `|t - target| <= time_tol`, never on the step size.

use thiserror::Error;

use crate::tof::{DomainFlag, DomainSpec, TofEvaluation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RootFindError {
    #[error("starting interval does not bracket the target")]
    NotBracketed,
    #[error("zero denominator in the update")]
    ZeroDenominator,
    #[error("domain wall reached without bracketing the target")]
    DomainExhausted,
    #[error("invalid tolerance specification")]
    InvalidTolerance,
}

pub const DEFAULT_TIME_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100;
pub const DEFAULT_BISECTION_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceSpec {
    pub time_tol: f64,
    pub max_iter: usize,
}

impl ToleranceSpec {
    pub fn new(time_tol: f64, max_iter: usize) -> Result<Self, RootFindError> {
        if !(time_tol > 0.0 && time_tol.is_finite()) || max_iter == 0 {
            return Err(RootFindError::InvalidTolerance);
        }
        Ok(Self { time_tol, max_iter })
    }

    pub fn bisection() -> Self {
        Self {
            time_tol: DEFAULT_TIME_TOL,
            max_iter: DEFAULT_BISECTION_MAX_ITER,
        }
    }
}

impl Default for ToleranceSpec {
    fn default() -> Self {
        Self {
            time_tol: DEFAULT_TIME_TOL,
            max_iter: DEFAULT_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TraceStatus {
    Converged,
    MaxIterations,
    Diverged,
    NonRealEncountered,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationStep {
    pub w: f64,
    pub t: f64,
    pub dt: Option<f64>,
    pub d2t: Option<f64>,
    pub d3t: Option<f64>,
    pub domain_flag: DomainFlag,
}

impl IterationStep {
    pub fn new(w: f64, e: &TofEvaluation) -> Self {
        Self {
            w,
            t: e.t,
            dt: e.dt,
            d2t: e.d2t,
            d3t: e.d3t,
            domain_flag: e.domain_flag,
        }
    }
}

/// Record of one root search. `history.len() == iterations + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub iterations: usize,
    pub history: Vec<IterationStep>,
    pub status: TraceStatus,
    pub final_w: f64,
}

impl IterationTrace {
    pub fn start(w: f64, e: &TofEvaluation) -> Self {
        let mut history = Vec::with_capacity(8);
        history.push(IterationStep::new(w, e));
        Self {
            iterations: 0,
            history,
            status: TraceStatus::MaxIterations,
            final_w: w,
        }
    }

    pub fn push(&mut self, w: f64, e: &TofEvaluation) {
        self.history.push(IterationStep::new(w, e));
        self.iterations += 1;
        self.final_w = w;
    }

    pub fn finish(mut self, status: TraceStatus) -> Self {
        self.status = status;
        self
    }

    pub fn last(&self) -> &IterationStep {
        self.history.last().expect("trace always holds the starting point")
    }

    /// `|t - target|` at the final point.
    pub fn residual(&self, target: f64) -> f64 {
        (self.last().t - target).abs()
    }

    pub fn converged(&self) -> bool {
        self.status == TraceStatus::Converged
    }
}

fn flag_status(flag: DomainFlag) -> Option<TraceStatus> {
    match flag {
        DomainFlag::InDomain => None,
        DomainFlag::NonReal => Some(TraceStatus::NonRealEncountered),
        DomainFlag::BelowLowerLimit | DomainFlag::BeyondAsymptote => Some(TraceStatus::Diverged),
    }
}

fn check_point(e: &TofEvaluation) -> Option<TraceStatus> {
    flag_status(e.domain_flag).or_else(|| (!e.t.is_finite()).then_some(TraceStatus::Diverged))
}

/// Shared loop of the single-starter Householder family. `update` returns the
/// step `w_next - w` from the current evaluation and `T = target - t`.
fn householder_family<E, U>(
    mut eval: E,
    target: f64,
    w0: f64,
    tol: &ToleranceSpec,
    mut update: U,
) -> Result<IterationTrace, RootFindError>
where
    E: FnMut(f64) -> TofEvaluation,
    U: FnMut(&TofEvaluation, f64) -> Result<f64, RootFindError>,
{
    let mut w = w0;
    let mut e = eval(w);
    let mut trace = IterationTrace::start(w, &e);
    if let Some(status) = check_point(&e) {
        return Ok(trace.finish(status));
    }
    loop {
        let big_t = target - e.t;
        if big_t.abs() <= tol.time_tol {
            return Ok(trace.finish(TraceStatus::Converged));
        }
        if trace.iterations >= tol.max_iter {
            return Ok(trace.finish(TraceStatus::MaxIterations));
        }
        let step = update(&e, big_t)?;
        w += step;
        e = eval(w);
        trace.push(w, &e);
        if let Some(status) = check_point(&e) {
            return Ok(trace.finish(status));
        }
    }
}

fn derivative(v: Option<f64>) -> Result<f64, RootFindError> {
    match v {
        Some(d) if d.is_finite() => Ok(d),
        _ => Err(RootFindError::ZeroDenominator),
    }
}

fn checked_ratio(num: f64, den: f64) -> Result<f64, RootFindError> {
    if den == 0.0 || !den.is_finite() {
        Err(RootFindError::ZeroDenominator)
    } else {
        Ok(num / den)
    }
}

/// First-order Householder (Newton-Raphson): `w <- w - (t - target) / dt`.
pub fn newton_raphson<E>(eval: E, target: f64, w0: f64, tol: &ToleranceSpec) -> Result<IterationTrace, RootFindError>
where
    E: FnMut(f64) -> TofEvaluation,
{
    householder_family(eval, target, w0, tol, |e, big_t| {
        checked_ratio(big_t, derivative(e.dt)?)
    })
}

/// Halley: `w <- w + T dt / (dt^2 + T d2t / 2)` with `T = target - t`.
pub fn halley<E>(eval: E, target: f64, w0: f64, tol: &ToleranceSpec) -> Result<IterationTrace, RootFindError>
where
    E: FnMut(f64) -> TofEvaluation,
{
    householder_family(eval, target, w0, tol, halley_step)
}

fn halley_step(e: &TofEvaluation, big_t: f64) -> Result<f64, RootFindError> {
    let dt = derivative(e.dt)?;
    let d2t = derivative(e.d2t)?;
    checked_ratio(big_t * dt, dt * dt + 0.5 * big_t * d2t)
}

/// Third-order Householder:
/// `w <- w + T (dt^2 + T d2t / 2) / (dt (dt^2 + T d2t) + d3t T^2 / 6)`.
pub fn householder3<E>(eval: E, target: f64, w0: f64, tol: &ToleranceSpec) -> Result<IterationTrace, RootFindError>
where
    E: FnMut(f64) -> TofEvaluation,
{
    householder_family(eval, target, w0, tol, |e, big_t| {
        let dt = derivative(e.dt)?;
        let d2t = derivative(e.d2t)?;
        let d3t = derivative(e.d3t)?;
        let dt2 = dt * dt;
        checked_ratio(
            big_t * (dt2 + 0.5 * big_t * d2t),
            dt * (dt2 + big_t * d2t) + d3t * big_t * big_t / 6.0,
        )
    })
}

/// Runs exactly `iterations` Halley updates with no residual test; the trace
/// status reflects the residual measured after the last update.
pub fn halley_fixed<E>(
    mut eval: E,
    target: f64,
    w0: f64,
    iterations: usize,
    time_tol: f64,
) -> Result<IterationTrace, RootFindError>
where
    E: FnMut(f64) -> TofEvaluation,
{
    let mut w = w0;
    let mut e = eval(w);
    let mut trace = IterationTrace::start(w, &e);
    for _ in 0..iterations {
        if let Some(status) = check_point(&e) {
            return Ok(trace.finish(status));
        }
        let big_t = target - e.t;
        // a zero derivative leaves the iterate in place
        if e.dt != Some(0.0) {
            w += halley_step(&e, big_t)?;
        }
        e = eval(w);
        trace.push(w, &e);
    }
    if let Some(status) = check_point(&e) {
        return Ok(trace.finish(status));
    }
    let status = if (e.t - target).abs() <= time_tol {
        TraceStatus::Converged
    } else {
        TraceStatus::MaxIterations
    };
    Ok(trace.finish(status))
}

/// Which side of the target an evaluation lies on. Points past the zero-time
/// wall or in a non-real region count as below; past the asymptote as above.
fn side(e: &TofEvaluation, target: f64) -> std::cmp::Ordering {
    use std::cmp::Ordering::*;
    match e.domain_flag {
        DomainFlag::BelowLowerLimit | DomainFlag::NonReal => Less,
        DomainFlag::BeyondAsymptote => Greater,
        DomainFlag::InDomain => {
            // NaN counts as below
            if e.t > target {
                Greater
            } else {
                Less
            }
        }
    }
}

/// Bisection on a monotone-increasing evaluation: the lower bound moves when
/// `t <= target`, the upper bound when `t > target`.
pub fn bisection<E>(
    mut eval: E,
    target: f64,
    lo: f64,
    hi: f64,
    tol: &ToleranceSpec,
) -> Result<IterationTrace, RootFindError>
where
    E: FnMut(f64) -> TofEvaluation,
{
    use std::cmp::Ordering::*;
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let e_lo = eval(lo);
    let e_hi = eval(hi);
    if side(&e_lo, target) != Less || side(&e_hi, target) != Greater {
        // endpoints that already satisfy the tolerance still count
        for (w, e) in [(lo, e_lo), (hi, e_hi)] {
            if e.in_domain() && (e.t - target).abs() <= tol.time_tol {
                return Ok(IterationTrace::start(w, &e).finish(TraceStatus::Converged));
            }
        }
        return Err(RootFindError::NotBracketed);
    }
    let mut mid = 0.5 * (lo + hi);
    let e = eval(mid);
    let mut trace = IterationTrace::start(mid, &e);
    let mut current = e;
    loop {
        if current.in_domain() && (current.t - target).abs() <= tol.time_tol {
            return Ok(trace.finish(TraceStatus::Converged));
        }
        match side(&current, target) {
            Less => lo = mid,
            _ => hi = mid,
        }
        let next = 0.5 * (lo + hi);
        // interval collapsed to adjacent floats
        if next <= lo || next >= hi || trace.iterations >= tol.max_iter {
            return Ok(trace.finish(TraceStatus::MaxIterations));
        }
        mid = next;
        current = eval(mid);
        trace.push(mid, &current);
    }
}

/// Regula falsi without bracket maintenance: the older point is always
/// replaced (`w1 <- w2`, `w2 <- w_new`).
pub fn regula_falsi<E>(
    mut eval: E,
    target: f64,
    w1: f64,
    w2: f64,
    tol: &ToleranceSpec,
) -> Result<IterationTrace, RootFindError>
where
    E: FnMut(f64) -> TofEvaluation,
{
    let e1 = eval(w1);
    let e2 = eval(w2);
    if let Some(status) = check_point(&e1) {
        return Ok(IterationTrace::start(w1, &e1).finish(status));
    }
    if e1.in_domain() && (e1.t - target).abs() <= tol.time_tol {
        return Ok(IterationTrace::start(w1, &e1).finish(TraceStatus::Converged));
    }
    let mut trace = IterationTrace::start(w2, &e2);
    if let Some(status) = check_point(&e2) {
        return Ok(trace.finish(status));
    }
    let (mut w1, mut w2) = (w1, w2);
    let mut big_t1 = e1.t - target;
    let mut big_t2 = e2.t - target;
    loop {
        if big_t2.abs() <= tol.time_tol {
            return Ok(trace.finish(TraceStatus::Converged));
        }
        if trace.iterations >= tol.max_iter {
            return Ok(trace.finish(TraceStatus::MaxIterations));
        }
        let w_new = checked_ratio(w1 * big_t2 - big_t1 * w2, big_t2 - big_t1)?;
        let e = eval(w_new);
        trace.push(w_new, &e);
        if let Some(status) = check_point(&e) {
            return Ok(trace.finish(status));
        }
        w1 = w2;
        big_t1 = big_t2;
        w2 = w_new;
        big_t2 = e.t - target;
    }
}

/// Newton-Raphson kept inside `[lo, hi]`: a step that leaves the bracket
/// (or lands on a flagged point) is replaced by the midpoint, and every
/// evaluation tightens the bracket.
pub fn newton_bracketed<E>(
    mut eval: E,
    target: f64,
    lo: f64,
    hi: f64,
    w0: f64,
    tol: &ToleranceSpec,
) -> Result<IterationTrace, RootFindError>
where
    E: FnMut(f64) -> TofEvaluation,
{
    use std::cmp::Ordering::*;
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut w = w0.clamp(lo, hi);
    let mut e = eval(w);
    let mut trace = IterationTrace::start(w, &e);
    loop {
        if e.in_domain() && (e.t - target).abs() <= tol.time_tol {
            return Ok(trace.finish(TraceStatus::Converged));
        }
        match side(&e, target) {
            Less => lo = w,
            _ => hi = w,
        }
        if trace.iterations >= tol.max_iter || !(lo < hi) {
            return Ok(trace.finish(TraceStatus::MaxIterations));
        }
        let newton = match (e.in_domain(), e.dt) {
            (true, Some(d)) if d != 0.0 && d.is_finite() => w - (e.t - target) / d,
            _ => f64::NAN,
        };
        w = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        e = eval(w);
        trace.push(w, &e);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    /// Geometric mean of the bounds on an axis shifted to be positive.
    pub starter: f64,
    /// Evaluations spent on the search.
    pub evaluations: usize,
}

const BRACKET_MAX_EXPANSIONS: usize = 200;

/// Expands the violated bound geometrically until `t(lo) <= target <= t(hi)`,
/// clamping at the domain walls.
pub fn bracket_expand<E>(
    mut eval: E,
    seed_lo: f64,
    seed_hi: f64,
    target: f64,
    domain: &DomainSpec,
) -> Result<Bracket, RootFindError>
where
    E: FnMut(f64) -> TofEvaluation,
{
    use std::cmp::Ordering::*;
    if !(target > 0.0) {
        return Err(RootFindError::DomainExhausted);
    }
    let (mut lo, mut hi) = if seed_lo <= seed_hi {
        (seed_lo, seed_hi)
    } else {
        (seed_hi, seed_lo)
    };
    lo = lo.max(domain.lower);
    hi = hi.min(domain.upper);
    let mut side_lo = side(&eval(lo), target);
    let mut side_hi = side(&eval(hi), target);
    let mut evaluations = 2;
    for _ in 0..BRACKET_MAX_EXPANSIONS {
        if side_lo == Less && side_hi == Greater {
            let shift = if domain.lower.is_finite() {
                domain.lower
            } else {
                lo - (hi - lo)
            };
            let starter = shift + ((lo - shift) * (hi - shift)).sqrt();
            return Ok(Bracket {
                lo,
                hi,
                starter: starter.clamp(lo, hi),
                evaluations,
            });
        }
        let width = (hi - lo).max(1e-3);
        if side_lo != Less {
            if lo <= domain.lower {
                return Err(RootFindError::DomainExhausted);
            }
            // the old lower bound is now a valid upper bound
            hi = lo;
            side_hi = Greater;
            lo = (lo - 2.0 * width).max(domain.lower);
            let e = eval(lo);
            evaluations += 1;
            if !e.in_domain() && e.domain_flag != DomainFlag::BelowLowerLimit && !domain.lower.is_finite() {
                return Err(RootFindError::DomainExhausted);
            }
            side_lo = side(&e, target);
        } else {
            if hi >= domain.upper {
                return Err(RootFindError::DomainExhausted);
            }
            lo = hi;
            side_lo = Less;
            hi = (hi + 2.0 * width).min(domain.upper);
            side_hi = side(&eval(hi), target);
            evaluations += 1;
        }
    }
    Err(RootFindError::DomainExhausted)
}
