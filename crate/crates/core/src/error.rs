use thiserror::Error;

#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("outside domain: {0}")]
    Domain(String),
    #[error("point is not on the manifold (max residual {residual:.3e})")]
    NotOnManifold { residual: f64 },
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("point is not in chart {nu}")]
    NotInChart { nu: usize },
    #[error("singular derivative: {0}")]
    Singular(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("eigenvalue polish failed (residual {residual:.3e}, condition {condition:.3e})")]
    PolishFailed { residual: f64, condition: f64 },
    #[error("self-check failed: {0}")]
    SelfCheck(String),
}

pub type Result<T> = std::result::Result<T, Error>;
