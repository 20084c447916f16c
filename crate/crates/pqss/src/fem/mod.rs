//! P1 finite-element machinery: fields, quadrature, weak forms, the
//! damped-Newton Dirichlet solver, and the sub-/supersolution checker.

pub mod field;
pub mod forms;
pub mod linalg;
pub mod newton;
pub mod quad;
pub mod subcheck;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fem::field::Field;

#[derive(Debug, Error)]
pub enum FemError {
    #[error("fields live on different meshes")]
    MeshMismatch,
    #[error("value vector has length {got}, mesh has {expected} nodes")]
    Shape { expected: usize, got: usize },
    #[error("field contains non-finite values")]
    NonFinite,
    #[error("field is not zero on the boundary")]
    BoundaryCondition,
    #[error("exponent {0} must exceed 1")]
    BadExponent(f64),
    #[error("{what}: no convergence after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence {
        what: String,
        residual: f64,
        iterations: usize,
        last: Box<Field>,
    },
    #[error("linear solver failed: {0}")]
    LinearSolve(String),
    #[error("csv: {0}")]
    Csv(String),
}

/// Options for the scalar Dirichlet solver.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    /// Residual tolerance relative to the load scale.
    pub tolerance: f64,
    /// Newton iteration cap per continuation stage.
    pub max_newton: usize,
    /// Stagnation window before declaring nonconvergence.
    pub max_stall: usize,
    pub eps_start: f64,
    pub eps_end: f64,
    /// Geometric factor of the eps schedule, in (0, 1).
    pub eps_factor: f64,
    pub armijo_c: f64,
    pub armijo_max_backtracks: usize,
    /// Polynomial degree targeted by nonlinear-term quadrature.
    pub quad_degree: usize,
    pub cg_rtol: f64,
    /// CG iteration cap as a multiple of the unknown count.
    pub cg_max_iter_factor: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-10,
            max_newton: 60,
            max_stall: 12,
            eps_start: 1e-2,
            eps_end: 1e-10,
            eps_factor: 0.1,
            armijo_c: 1e-4,
            armijo_max_backtracks: 50,
            quad_degree: forms::DEFAULT_QUAD_DEGREE,
            cg_rtol: 1e-14,
            cg_max_iter_factor: 40,
        }
    }
}
