use thiserror::Error;

/// Errors raised by the geometric operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("point {coords:?} lies outside the chart domain (coordinate `{coord}`)")]
    OutOfDomain { coords: Vec<f64>, coord: String },

    #[error("metric is degenerate at {coords:?} (|det| = {det:e})")]
    DegenerateMetric { coords: Vec<f64>, det: f64 },

    #[error("metric is not symmetric at {coords:?} (max asymmetry {asymmetry:e})")]
    AsymmetricMetric { coords: Vec<f64>, asymmetry: f64 },

    #[error("finite-difference stencil leaves the chart domain at {coords:?}")]
    DerivativeFailure { coords: Vec<f64> },

    #[error("chart dimension {dim} exceeds the supported maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid geodesic case: {0}")]
    InvalidCase(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported warp `{0}` for this operation")]
    UnsupportedWarp(String),

    #[error("warp vanishes inside the domain at s = {0}")]
    DomainContainsWarpZero(f64),

    #[error("holonomy sample inconclusive: {0}")]
    InconclusiveSample(String),

    #[error("parallel-field case mismatch: {0}")]
    CaseMismatch(String),

    #[error("causal type {0} is not normalised to -1, 0 or +1")]
    NotNormalised(f64),

    #[error("gradient vanishes at {coords:?}")]
    GradientVanishes { coords: Vec<f64> },

    #[error("flow left the chart domain at t = {t}")]
    FlowLeftDomain { t: f64 },

    #[error("f1 vanishes at u = {u}")]
    F1HasZero { u: f64 },

    #[error("ODE solve failed: {0}")]
    OdeSolveFailure(String),

    #[error("vector pair violates g(V,V)=0, g(Z,Z)=1, g(V,Z)=0 (residual {residual:e})")]
    PairNotAdmissible { residual: f64 },

    #[error("Dirac current has an imaginary part of size {0:e}")]
    NonRealCurrent(f64),

    #[error("hermitian form (.,.)_T is not positive definite (smallest eigenvalue {0:e})")]
    FormNotPositive(f64),
}

pub type Result<T> = std::result::Result<T, GeomError>;
