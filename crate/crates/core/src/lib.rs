//! Single-revolution Lambert solvers built from interchangeable pieces:
//! transfer-time formulations, root finders, starters and velocity
//! reconstruction methods, plus an independent oracle and the harness that
//! maps each solver's region of applicability.

// `!(x > y)` is used on purpose where NaN must take the failing branch
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod geometry;
pub mod harness;
pub mod oracle;
pub mod rootfind;
pub mod solvers;
pub mod specfun;
pub mod tof;
pub mod velocity;

pub use geometry::{build_geometry, GeometryError, LambertProblem, ScaleFactors, TransferGeometry};
pub use harness::{BenchConfig, BenchReport, CellResult, GridSpec};
pub use oracle::{kepler_propagate, reference_solve, validate_solution, OracleError, ValidationReport};
pub use rootfind::{IterationTrace, ToleranceSpec, TraceStatus};
pub use solvers::{solve, solve_all, FailureReason, SolveStatus, SolverId, SolverOutcome};
pub use tof::{DomainFlag, TimeOfFlight, TofEvaluation};

pub use nalgebra::Vector3;
