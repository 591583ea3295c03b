use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An exact computation would exceed its configured work budget.
    #[error("{what}: estimated cost {estimate} exceeds cap {cap}")]
    CostCapExceeded {
        what: &'static str,
        estimate: u128,
        cap: u128,
    },

    #[error("point is near-singular: |r| = {abs_r} >= 1 - {eps}")]
    NearSingular { abs_r: f64, eps: f64 },

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("quadrature did not converge: residual estimate {residual:e} after {evaluations} evaluations")]
    QuadratureNonConvergence { residual: f64, evaluations: usize },

    #[error("non-finite integrand at x = {x:?}")]
    NonFiniteIntegrand { x: [f64; 3] },

    #[error("pair-sum vector {0:?} is degenerate (need 0 < |tau|^2 < 4m)")]
    DegenerateTau([i64; 3]),

    #[error("excluded fraction {fraction} exceeds 0.5; refine the grid or lower eps_sing")]
    ExcessiveExclusion { fraction: f64 },

    #[error("grid node coincides with the singular point {0:?}; choose a different grid size")]
    NodeOnSingularPoint([f64; 3]),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("malformed lattice file {path}: {reason}")]
    Parse { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
