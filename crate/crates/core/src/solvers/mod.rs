//! End-to-end Lambert solvers: each id binds one formulation, starter,
//! iteration scheme and velocity method.

mod pipelines;
pub mod starters;

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;

use crate::geometry::{build_geometry, LambertProblem, TransferGeometry};
use crate::rootfind::{IterationTrace, ToleranceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverId {
    LagrangeNR,
    GaussSS,
    BateNR,
    BateNRBracketed,
    BateBisection,
    SimoBisection,
    BattinSS,
    GoodingHalley,
    IzzoHouseholder,
    IzzoRegulaFalsi,
}

impl SolverId {
    pub const ALL: [SolverId; 10] = [
        SolverId::LagrangeNR,
        SolverId::GaussSS,
        SolverId::BateNR,
        SolverId::BateNRBracketed,
        SolverId::BateBisection,
        SolverId::SimoBisection,
        SolverId::BattinSS,
        SolverId::GoodingHalley,
        SolverId::IzzoHouseholder,
        SolverId::IzzoRegulaFalsi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverId::LagrangeNR => "LagrangeNR",
            SolverId::GaussSS => "GaussSS",
            SolverId::BateNR => "BateNR",
            SolverId::BateNRBracketed => "BateNRBracketed",
            SolverId::BateBisection => "BateBisection",
            SolverId::SimoBisection => "SimoBisection",
            SolverId::BattinSS => "BattinSS",
            SolverId::GoodingHalley => "GoodingHalley",
            SolverId::IzzoHouseholder => "IzzoHouseholder",
            SolverId::IzzoRegulaFalsi => "IzzoRegulaFalsi",
        }
    }

    /// Solvers whose velocities come from the f and g coefficients.
    pub fn uses_fg(self) -> bool {
        matches!(
            self,
            SolverId::GaussSS | SolverId::BateNR | SolverId::BateNRBracketed | SolverId::BateBisection
        )
    }
}

impl fmt::Display for SolverId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownSolver(pub String);

impl fmt::Display for UnknownSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown solver '{}'", self.0)
    }
}

impl std::error::Error for UnknownSolver {}

impl FromStr for SolverId {
    type Err = UnknownSolver;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverId::ALL
            .into_iter()
            .find(|id| id.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownSolver(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureReason {
    NonReal,
    NotBracketed,
    DivergentSeries,
    NonPhysicalY,
    GSingularity,
    MaxIterations,
    AsymptoteJump,
}

impl FailureReason {
    pub fn name(self) -> &'static str {
        match self {
            FailureReason::NonReal => "NonReal",
            FailureReason::NotBracketed => "NotBracketed",
            FailureReason::DivergentSeries => "DivergentSeries",
            FailureReason::NonPhysicalY => "NonPhysicalY",
            FailureReason::GSingularity => "GSingularity",
            FailureReason::MaxIterations => "MaxIterations",
            FailureReason::AsymptoteJump => "AsymptoteJump",
        }
    }
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Converged,
    Failed(FailureReason),
}

impl SolveStatus {
    pub fn is_converged(self) -> bool {
        self == SolveStatus::Converged
    }

    pub fn reason(self) -> Option<FailureReason> {
        match self {
            SolveStatus::Converged => None,
            SolveStatus::Failed(r) => Some(r),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOutcome {
    /// Departure and arrival velocities in the problem's units; NaN on
    /// failure.
    pub v1: Vector3<f64>,
    pub v2: Vector3<f64>,
    pub status: SolveStatus,
    pub iterations: usize,
    /// `|t - t_target|` in normalized time at the final iterate.
    pub time_residual: f64,
    pub trace: IterationTrace,
}

/// Result of a pipeline in normalized units.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedOutcome {
    pub v1: Vector3<f64>,
    pub v2: Vector3<f64>,
    pub status: SolveStatus,
    pub iterations: usize,
    pub time_residual: f64,
    pub trace: IterationTrace,
}

/// Runs one pipeline on a prepared normalized geometry.
pub fn solve_normalized(id: SolverId, geom: &TransferGeometry, tol: &ToleranceSpec) -> NormalizedOutcome {
    match id {
        SolverId::LagrangeNR => pipelines::lagrange_nr(geom, tol),
        SolverId::GaussSS => pipelines::gauss_ss(geom, tol),
        SolverId::BateNR => pipelines::bate_nr(geom, tol),
        SolverId::BateNRBracketed => pipelines::bate_nr_bracketed(geom, tol),
        SolverId::BateBisection => pipelines::bate_bisection(geom, tol),
        SolverId::SimoBisection => pipelines::simo_bisection(geom, tol),
        SolverId::BattinSS => pipelines::battin_ss(geom, tol),
        SolverId::GoodingHalley => pipelines::gooding_halley(geom, tol),
        SolverId::IzzoHouseholder => pipelines::izzo_householder(geom, tol),
        SolverId::IzzoRegulaFalsi => pipelines::izzo_regula_falsi(geom, tol),
    }
}

pub fn solve(id: SolverId, problem: &LambertProblem, tol: &ToleranceSpec) -> SolverOutcome {
    // a validated problem always has a geometry
    let (geom, scale) = build_geometry(problem).expect("LambertProblem is validated on construction");
    let n = solve_normalized(id, &geom, tol);
    SolverOutcome {
        v1: scale.denormalize_velocity(&n.v1),
        v2: scale.denormalize_velocity(&n.v2),
        status: n.status,
        iterations: n.iterations,
        time_residual: n.time_residual,
        trace: n.trace,
    }
}

pub fn solve_all(problem: &LambertProblem, tol: &ToleranceSpec) -> Vec<(SolverId, SolverOutcome)> {
    SolverId::ALL
        .into_iter()
        .map(|id| (id, solve(id, problem, tol)))
        .collect()
}
