use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed case or scenario document. `context` carries the
    /// line/column or field path reported by the parser.
    #[error("parse error in {what}: {context}")]
    Parse { what: String, context: String },

    /// A well-formed document that violates a model invariant.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian in algebraic solve")]
    SingularJacobian,

    #[error("value {value} outside the cost domain ({lo}, {hi})")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("dispatch infeasible: total input {u_s} outside ({lo}, {hi})")]
    Infeasible { u_s: f64, lo: f64, hi: f64 },

    #[error("scalar price search did not converge (residual {residual:.3e})")]
    PriceNonConvergence { residual: f64 },

    #[error("area {area}: {source}")]
    Area {
        area: String,
        #[source]
        source: Box<Error>,
    },

    #[error("algebraic solve failed at t = {t:.6} s: {source}")]
    AlgebraicDivergence {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("unknown area index {0}")]
    UnknownArea(usize),

    #[error("unknown node id {0}")]
    UnknownNode(u32),

    #[error("scenario mismatch: {0}")]
    Mismatch(String),

    #[error("invalid sweep parameter `{0}` (expected k, k_gb or dt)")]
    InvalidParameter(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
