use thiserror::Error;

/// Errors raised by the geometry, potential, solver and census layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CcError {
    #[error("arcosh argument {value} is below 1 beyond roundoff; points are not on H^2")]
    ArgumentBelowOne { value: f64 },

    #[error("chart coordinate {value} outside the supported range |.| <= {limit}")]
    CoordinateRange { value: f64, limit: f64 },

    #[error("point ({x}, {y}, {w}) is not on the hyperboloid")]
    NotOnHyperboloid { x: f64, y: f64, w: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfiguration(String),

    #[error("collision between bodies {i} and {j} (distance {distance:e})")]
    Collision { i: usize, j: usize, distance: f64 },

    #[error("degenerate denominator {value:e}: all bodies are at the apex")]
    DegenerateDenominator { value: f64 },

    #[error("no convergence after {iterations} iterations (best residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("ordering violated: solver step crossed a collision")]
    OrderViolation,

    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetric { asymmetry: f64 },

    #[error("inertia mismatch: {0}")]
    InertiaMismatch(String),

    #[error("cone invariance violated: derivative {derivative:e} at sample {sample}")]
    ConeViolation { sample: usize, derivative: f64 },

    #[error("collision approach: minimum distance {distance:e} below floor {floor:e}")]
    CollisionApproach { distance: f64, floor: f64 },

    #[error("singular Newton system (condition estimate {condition:e}); degenerate CC suspected")]
    SingularSystem { condition: f64 },

    #[error("no rotation anchor: every body sits at the apex")]
    NoAnchor,

    #[error("degenerate cluster: {0}")]
    DegenerateCluster(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("integer overflow while evaluating {0}")]
    Overflow(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CcError>;
