use thiserror::Error;

/// Failures raised by manifold operations, ladder schemes and the analysis
/// helpers built on top of them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("DomainEscape: {0}")]
    DomainEscape(String),

    #[error("InvalidBase: tangent vector is not based at the given point (offset {offset:.3e})")]
    InvalidBase { offset: f64 },

    #[error("NoConvergence: shooting stopped after {iterations} iterations with residual {residual:.3e}")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("CutLocus: {0}")]
    CutLocus(String),

    #[error("Unsupported: {0}")]
    Unsupported(String),

    #[error("NotSPD: {0}")]
    NotSpd(String),

    #[error("LogBranch: rotation angle {angle:.6} is on the cut locus of SO(3)")]
    LogBranch { angle: f64 },

    #[error("MaxStepsExceeded: integration used {0} steps")]
    MaxStepsExceeded(usize),

    #[error("InsufficientData: {0}")]
    InsufficientData(String),

    #[error("DimensionMismatch: expected {expected} coordinates, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("InvalidArgument: {0}")]
    InvalidArgument(String),

    #[error("rung {index}: {source}")]
    RungFailed {
        index: usize,
        #[source]
        source: Box<GeometryError>,
    },
}

impl GeometryError {
    /// Short, stable name of the error kind (used on the CLI diagnostic stream
    /// and as the FFI error class).
    pub fn kind(&self) -> &'static str {
        match self {
            GeometryError::DomainEscape(_) => "DomainEscape",
            GeometryError::InvalidBase { .. } => "InvalidBase",
            GeometryError::NoConvergence { .. } => "NoConvergence",
            GeometryError::CutLocus(_) => "CutLocus",
            GeometryError::Unsupported(_) => "Unsupported",
            GeometryError::NotSpd(_) => "NotSPD",
            GeometryError::LogBranch { .. } => "LogBranch",
            GeometryError::MaxStepsExceeded(_) => "MaxStepsExceeded",
            GeometryError::InsufficientData(_) => "InsufficientData",
            GeometryError::DimensionMismatch { .. } => "DimensionMismatch",
            GeometryError::InvalidArgument(_) => "InvalidArgument",
            GeometryError::RungFailed { source, .. } => source.kind(),
        }
    }

    /// The innermost error, looking through rung wrappers.
    pub fn root(&self) -> &GeometryError {
        match self {
            GeometryError::RungFailed { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, GeometryError>;
