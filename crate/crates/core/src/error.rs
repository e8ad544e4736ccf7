use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix shape mismatch: {0}")]
    Shape(String),
    #[error("singular matrix: pivot {pivot:e} at column {column} below threshold {threshold:e}")]
    Singular {
        column: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    Asymmetric(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("non-finite coordinate at point {0}")]
    NonFinite(usize),
    #[error("spatial index is empty")]
    EmptyIndex,
    #[error("negative search radius {0}")]
    NegativeRadius(f64),
    #[error("too few points: need at least {needed}, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("parameter out of range: {0}")]
    ParameterRange(String),
    #[error("invalid kernel order {order} for {manifold}")]
    KernelOrder { order: u32, manifold: &'static str },
    #[error("duplicate data-site parameters at indices {0} and {1}")]
    DuplicateParameter(usize, usize),
    #[error("zero tangent at evaluation point {0}: parametrization is degenerate")]
    ZeroTangent(usize),
    #[error("unknown shape `{0}`")]
    UnknownShape(String),
    #[error("unknown shape parameter `{param}` for shape `{shape}`")]
    UnknownShapeParameter { shape: String, param: String },
    #[error("degenerate point cloud: {0}")]
    DegenerateCloud(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown embedded boundary id {0}")]
    UnknownBoundary(u32),
    #[error("embedded boundary {0} was already removed")]
    AlreadyRemoved(u32),
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular { .. } | Error::ZeroTangent(_) | Error::DegenerateCloud(_)
        )
    }

    pub fn is_format(&self) -> bool {
        matches!(
            self,
            Error::Format(_) | Error::UnknownShape(_) | Error::UnknownShapeParameter { .. }
        )
    }
}
