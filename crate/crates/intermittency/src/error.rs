use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("a delta covariance has no pointwise value")]
    EvalOfDelta,
    #[error("singular point: {0}")]
    SingularPoint(String),
    #[error("time must be positive, got {0}")]
    NonpositiveTime(f64),
    #[error("unsupported parameter: {0}")]
    UnsupportedParameter(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parameters outside the positivity range: {0}")]
    ParameterOutOfPositivityRange(String),
    #[error("quadrature did not converge ({what}): estimate {estimate:e}, error {error:e}")]
    QuadratureNonConvergence {
        what: String,
        estimate: f64,
        error: f64,
    },
    #[error("series/asymptotic overlap check failed: gap {0:e}")]
    SwitchOverlap(f64),
    #[error("point on the light cone |x| = t")]
    OnLightConeSingularity,
    #[error("ball radius {0} exceeds 1")]
    RadiusOutOfRange(f64),
    #[error("odd number of vertices ({0})")]
    OddVertexCount(usize),
    #[error("total vertex count {total} exceeds cap {cap}")]
    CapExceeded { total: usize, cap: usize },
    #[error("integration dimension cap exceeded: {0}")]
    DimensionCap(String),
    #[error("kernel is a measure without a density")]
    MeasureKernelNoDensity,
    #[error("singularity not integrable: {0}")]
    SingularityNotIntegrable(String),
    #[error("constraint violated: {0}")]
    ConstraintViolated(String),
    #[error("unstable discretization: {0}")]
    UnstableDiscretization(String),
    #[error("noise has no spectral density")]
    NoSpectralDensity,
    #[error("insufficient grid: {0}")]
    InsufficientGrid(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::EvalOfDelta => "EVAL_OF_DELTA",
            Error::SingularPoint(_) => "SINGULAR_POINT",
            Error::NonpositiveTime(_) => "NONPOSITIVE_TIME",
            Error::UnsupportedParameter(_) => "UNSUPPORTED_PARAMETER",
            Error::InvalidParameter(_) => "INVALID_PARAMETER",
            Error::ParameterOutOfPositivityRange(_) => "OUT_OF_POSITIVITY_RANGE",
            Error::QuadratureNonConvergence { .. } => "QUADRATURE_NONCONVERGENCE",
            Error::SwitchOverlap(_) => "SWITCH_OVERLAP",
            Error::OnLightConeSingularity => "LIGHT_CONE",
            Error::RadiusOutOfRange(_) => "RADIUS_OUT_OF_RANGE",
            Error::OddVertexCount(_) => "ODD_VERTEX_COUNT",
            Error::CapExceeded { .. } => "CAP_EXCEEDED",
            Error::DimensionCap(_) => "DIMENSION_CAP",
            Error::MeasureKernelNoDensity => "MEASURE_KERNEL_NO_DENSITY",
            Error::SingularityNotIntegrable(_) => "SINGULARITY_NOT_INTEGRABLE",
            Error::ConstraintViolated(_) => "CONSTRAINT_VIOLATED",
            Error::UnstableDiscretization(_) => "UNSTABLE_DISCRETIZATION",
            Error::NoSpectralDensity => "NO_SPECTRAL_DENSITY",
            Error::InsufficientGrid(_) => "INSUFFICIENT_GRID",
        }
    }

    /// True for failures of a numerical method rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNonConvergence { .. }
                | Error::SwitchOverlap(_)
                | Error::UnstableDiscretization(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
