//! Systems `x'_g = f(t, x)` with one derivator per component, solved by the
//! Stieltjes–Euler scheme or by Picard iteration on a fixed grid.

mod diagnostics;
mod euler;
mod grid;
mod ivp;
mod picard;
mod trajectory;

pub use diagnostics::{convergence_study, lipschitz_probe, residual, ConvergenceRow, Reference, Region};
pub use euler::euler_solve;
pub use grid::build_grid;
pub use ivp::{Guard, GuardPolicy, Limit, Rhs, StieltjesIvp};
pub use picard::{picard_solve, PicardReport};
pub use trajectory::{PostJump, Trajectory, TrajectoryMeta};

use thiserror::Error;

use crate::ls_measure::MeasureError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("system needs at least one component")]
    Empty,
    #[error("initial state has {got} components, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("derivator {index} has domain [{a}, {b}], which differs from the first one")]
    DomainMismatch { index: usize, a: f64, b: f64 },
    #[error("step must be positive and finite, got {0}")]
    Step(f64),
    #[error("tolerance must be positive and finite, got {0}")]
    Tolerance(f64),
    #[error("guard on component {component} refers to a missing component")]
    GuardTarget { component: usize },
    #[error("component {component} left its admissible interval [{lower}, {upper}] at t = {t}: {value}")]
    GuardViolation { component: usize, t: f64, value: f64, lower: f64, upper: f64 },
    #[error("component {component} became non-finite at t = {t}")]
    NonFiniteState { component: usize, t: f64 },
    #[error("Picard iteration stopped after {iterations} iterations with update {final_delta:e}")]
    NoConvergence { iterations: usize, final_delta: f64 },
    #[error("trajectory does not belong to this problem: {0}")]
    GridMismatch(String),
    #[error("sample count must be at least 2")]
    Samples,
    #[error(transparent)]
    Measure(#[from] MeasureError),
}
