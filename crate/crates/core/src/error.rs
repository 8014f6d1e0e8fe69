use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid too narrow: support needs |y| <= {required:.3} but y_max = {y_max:.3}")]
    GridTooNarrow { required: f64, y_max: f64 },

    #[error("grid too coarse: node spacing {spacing:.3e} exceeds the state width {width:.3e}")]
    GridTooCoarse { spacing: f64, width: f64 },

    #[error("states live on different quadrature grids")]
    GridMismatch,

    #[error("divergent quadrature: {quantity} grows by factors {growth:?} per grid doubling")]
    DivergenceDetected { quantity: String, growth: [f64; 2] },

    #[error("state has no weight in either half-line sector")]
    EmptySupport,

    #[error("state is outside the domain of D^(1/2): {0}")]
    DomainViolation(String),

    #[error("window captures only {mass:.4} of the probability (need > {required})")]
    InsufficientMass { mass: f64, required: f64 },

    #[error("state has mass {mass:.3e} at y < 0 (limit {limit:.1e})")]
    SupportViolation { mass: f64, limit: f64 },

    #[error("root finding did not converge: {0}")]
    NoConvergence(String),

    #[error("Fock cutoff too small: estimated dropped tail {tail:.3e} exceeds {tolerance:.1e}")]
    CutoffTooSmall { tail: f64, tolerance: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
