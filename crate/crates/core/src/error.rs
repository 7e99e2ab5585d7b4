use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScalarError {
    #[error("cannot parse scalar: {0}")]
    Parse(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("malformed polynomial document: {0}")]
    Format(String),
    #[error(transparent)]
    Scalar(#[from] ScalarError),
    #[error("degree {degree} exceeds the allowed {limit}")]
    DegreeTooHigh { degree: usize, limit: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("numerical breakdown after {iterations} iterations: {reason}")]
    NumericalBreakdown { iterations: usize, reason: String },
    #[error("malformed SDP document: {0}")]
    Format(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelaxationError {
    #[error("epsilon must lie in [0,1], got {0}")]
    EpsilonOutOfRange(String),
    #[error("relaxation order must be at least 1")]
    OrderTooLow,
    #[error("relaxation order {order} is below half the problem degree {degree}")]
    OrderBelowDegree { order: usize, degree: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("relaxation solve ended with status {0}")]
    NotSolved(String),
    #[error(transparent)]
    Sdp(#[from] SdpError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertError {
    #[error("certificate check failed: {0}")]
    VerificationFailed(String),
    #[error("no certificate exists: {0}")]
    Infeasible(String),
    #[error("rounded certificate is not positive semidefinite: {0}")]
    RoundingFailed(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("undecided: {0}")]
    Undecided(String),
    #[error(transparent)]
    Sdp(#[from] SdpError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Relaxation(#[from] RelaxationError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StaircaseError {
    #[error("order must be at least 1")]
    OrderTooLow,
    #[error("target width must be positive")]
    BadTarget,
    #[error("bracket check failed at the upper end {hi}: {reason}")]
    BracketFailure { hi: String, reason: String },
    #[error("argument out of range: {0}")]
    Domain(String),
    #[error("witness check failed: {0}")]
    WitnessInvalid(String),
    #[error(transparent)]
    Cert(#[from] CertError),
    #[error(transparent)]
    Sdp(#[from] SdpError),
}
