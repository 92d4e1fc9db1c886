use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("point is not inside the domain")]
    NotInterior,
    #[error("closest boundary point is not unique")]
    AmbiguousProjection,
    #[error("point is not on the boundary")]
    NotOnBoundary,
    #[error("no touching ball of the requested radius exists")]
    NotSatisfied,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("operator is undefined at zero gradient")]
    DegenerateGradient,
    #[error("ellipticity depends on a distance that was not supplied")]
    MissingDistance,
    #[error("invalid operator parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdiError {
    #[error("invalid ODI specification: {0}")]
    InvalidSpec(String),
    #[error("no closed-form profile for this specification: {0}")]
    NotInCatalog(String),
    #[error("profile is not increasing: {0}")]
    MonotonicityViolated(String),
    #[error("boundary value {target} is not bracketed by slopes in [{lo_value}, {hi_value}]")]
    NoBracketingSlope { target: f64, lo_value: f64, hi_value: f64 },
    #[error("step size underflow at t = {t}")]
    StiffnessFailure { t: f64 },
    #[error("ratio of profiles is unbounded near t = 0")]
    UnboundedRatio,
    #[error("no exponential rate satisfies the lower inequality: {0}")]
    NoAdmissibleRate(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BarrierError {
    #[error("point at distance {rho} from the centre is outside the annulus [{r}, {two_r}]")]
    OutOfAnnulus { rho: f64, r: f64, two_r: f64 },
    #[error("sample violates the comparison hypothesis: {0}")]
    HypothesisViolated(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Odi(#[from] OdiError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("no monotone scheme for this operator: {0}")]
    UnsupportedScheme(String),
    #[error("grid has no interior nodes")]
    EmptyGrid,
    #[error("invalid grid parameter: {0}")]
    InvalidParameter(String),
    #[error("solver stopped after {iterations} sweeps with residual {residual:e}")]
    NotConverged { residual: f64, iterations: usize },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("band used to build the profiles is empty")]
    BandEmpty,
    #[error("trace on the reflection line is not zero (max |u| = {0})")]
    NonzeroTrace(f64),
    #[error("sector exponent radicand is negative")]
    ComplexRadicand,
    #[error("flat exponent {0} is not positive")]
    NonpositiveExponent(f64),
    #[error("denominator {min:e} is below the noise floor {floor:e}")]
    DivisionBand { min: f64, floor: f64 },
    #[error("angular shooting failed: {0}")]
    ShootingFailed(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Odi(#[from] OdiError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}
