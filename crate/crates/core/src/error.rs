use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("polyomino must be nonempty and edge-connected")]
    NotPolyomino,

    #[error("regions overlap at cell ({0}, {1})")]
    OverlappingRegions(i64, i64),

    #[error("point ({0}, {1}) lies in no region of the layout")]
    UncoveredPoint(f64, f64),

    #[error("vertex packing saturated after {0} consecutive rejections")]
    Saturation(usize),

    #[error("correlation decay violated: d * theta_bar = {0} >= 1")]
    CorrelationDecay(f64),

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("cell has {found} vertices, below the minimum occupancy {min}")]
    Unresolvable { found: usize, min: usize },

    #[error("curve is not {0}")]
    BadCurve(&'static str),

    #[error("root finding failed: {0}")]
    RootFinding(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("config: {0}")]
    Config(String),

    #[error("format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
