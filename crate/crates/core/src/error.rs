use crate::exprlang::ExprError;

/// Errors shared by the geometry and limit pipelines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("metric is degenerate at {point:?}: {detail}")]
    DegenerateMetric { point: Vec<f64>, detail: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("could not build an orthonormal complement: {0}")]
    Frame(String),
    #[error("{quantity} drifted by {value:.3e} (limit {limit:.1e}); try a smaller tolerance")]
    Drift {
        quantity: String,
        value: f64,
        limit: f64,
    },
    #[error("integration failed at t = {t}: {detail}")]
    Integration { t: f64, detail: String },
    #[error("geodesic is not causally independent relative to the supplied frame (cross residual {residual:.3e})")]
    CausallyDependent { residual: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
