use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoeffError {
    #[error("branch mismatch: s = {s_re}{s_im:+}i does not square to -beta = {}", -beta)]
    BranchMismatch { beta: f64, s_re: f64, s_im: f64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RingError {
    #[error("pole: f = {f} but the expression has negative powers of f")]
    Pole { f: f64 },
    #[error(transparent)]
    Coeff(#[from] CoeffError),
    #[error("malformed expression JSON: {0}")]
    Json(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OpError {
    /// The formal symbol `s` survived in an operator that must be real.
    #[error("internal error: sqrt(-beta) failed to cancel in {0}")]
    SurvivingS(&'static str),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PhaError {
    #[error("level n must be at least 1")]
    ZeroLevel,
    #[error("need at least two axes, got {0}")]
    TooFewAxes(usize),
    #[error("ladder shift a must be nonzero")]
    ZeroShift,
    #[error("ladder shift a = {0} is not an invertible constant")]
    NonInvertibleShift(String),
    #[error("{s} does not square to -({beta})")]
    NotSquareRoot { s: String, beta: String },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StateError {
    #[error("term ceiling {limit} exceeded at level {level} ({terms} terms)")]
    ResourceLimit { level: usize, terms: usize, limit: usize },
    #[error("zero mode is not an eigenstate: H applied to the gauge factor left {0}")]
    NotAnEigenstate(String),
    #[error("malformed state JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Op(#[from] OpError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("|f0| = {f0:e} is below f_min = {f_min:e}; the trajectory starts at a singularity")]
    ImmediateSingularity { f0: f64, f_min: f64 },
    #[error("adaptive step collapsed to {step:e} at x = {x}")]
    StepCollapse { x: f64, step: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("gauge W1 needs beta < 0 for a real prefactor, got beta = {beta}")]
    GaugeIncompatible { beta: f64 },
    #[error("grid has {got} points, need at least {need}")]
    GridTooSmall { got: usize, need: usize },
    #[error(transparent)]
    Ring(#[from] RingError),
}
