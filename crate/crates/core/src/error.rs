use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("state vector has zero or non-finite norm")]
    NotNormalizable,

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("matrix is not Hermitian (defect {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    BadTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("overlap {0} lies outside [0, 1]; density matrix is not physical")]
    NonPhysicalOverlap(f64),

    #[error("target amplitudes are not normalized: |mu|^2 + |nu|^2 = {0}")]
    TargetNotNormalized(f64),

    #[error("duration must be positive and finite (got {0})")]
    InvalidDuration(f64),

    #[error("time {t} lies outside [0, {duration}]")]
    TimeOutOfRange { t: f64, duration: f64 },

    #[error("consistency condition sin(theta(0)) = 0 violated (sin = {0:e})")]
    InconsistentInitialAngle(f64),

    #[error("three-level control requires theta(0) = alpha(0) = 0 and beta = 0")]
    InvalidThreeLevelSchedule,

    #[error("curve is not finite on the schedule interval")]
    NonFiniteCurve,

    #[error("table does not cover [0, {0}]")]
    TableTooShort(f64),

    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("invalid noise model: {0}")]
    InvalidNoise(String),

    #[error("time grid is not uniform")]
    NonUniformGrid,

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("time {0} is not a grid point")]
    OffGrid(f64),

    #[error("noise path grid does not match the propagation grid")]
    GridMismatch,

    #[error("invalid propagator step: {0}")]
    InvalidStep(String),

    #[error("Kraus form is only available for unbiased noise (bias = {0})")]
    BiasedKraus(f64),

    #[error("closed form requires unbiased noise (bias = {0})")]
    BiasedNoise(f64),

    #[error("fidelity threshold {0} is outside the allowed range")]
    InvalidThreshold(f64),

    #[error("fidelity threshold {0} is unreachable: it is at or below the asymptotic value 1/sqrt(2)")]
    UnreachableThreshold(f64),

    #[error("phase-integral mode is not valid here: {0}")]
    UnsupportedPhaseIntegral(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),

    #[error("invalid ensemble configuration: {0}")]
    InvalidEnsemble(String),
}

pub type Result<T> = std::result::Result<T, Error>;
