use thiserror::Error;

/// Errors raised by the geometry, reaction, solver, probe and inversion layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid inclusion: {0}")]
    InvalidInclusion(String),

    #[error("invalid corner: {0}")]
    InvalidCorner(String),

    #[error("invalid reaction: {0}")]
    InvalidReaction(String),

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("expression error: {0}")]
    Expression(String),

    #[error("stability bound violated: dt = {dt:e} exceeds {bound:e}")]
    Stability { dt: f64, bound: f64 },

    #[error("non-finite value in field {field} at node {node}")]
    NonFinite { field: String, node: usize },

    #[error("linear solve failed: {0}")]
    LinearSolve(String),

    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("Gamma function overflow at {0}")]
    GammaOverflow(f64),

    #[error("measurement layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("division guard: first-order factor {value:e} below threshold at {point:?}")]
    DivisionGuard { value: f64, point: [f64; 2] },

    #[error("point {point:?} is {distance:e} away from the interface, beyond {limit:e}")]
    FarFromInterface {
        point: [f64; 2],
        distance: f64,
        limit: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
