use thiserror::Error;

use crate::model::SwarmState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("heading list is empty")]
    EmptyHeadings,

    #[error("harmonic index must be at least 1")]
    ZeroHarmonic,

    #[error("need at least {min} agents, got {got}")]
    TooFewAgents { min: usize, got: usize },

    #[error("{what}: expected length {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("initial order parameter vanishes; its phase is undefined")]
    PsiUndefined,

    #[error("angular rate omega0 is zero; circular orbit has no finite center")]
    ZeroOmega,

    #[error("gain of agent {index} is zero")]
    ZeroGain { index: usize },

    #[error("gain condition violated: {0}")]
    GainCondition(String),

    #[error("outside proven scope: {0}")]
    OutOfScope(String),

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("target {target} rad is not reachable: {reason}")]
    Unreachable { target: f64, reason: String },

    #[error("simulation did not converge before the horizon")]
    NotConverged,

    #[error("steady-state check failed: |u - omega0| = {residual:e} exceeds {threshold:e}")]
    NotSteady { residual: f64, threshold: f64 },

    #[error("non-finite state at step {step} (t = {t})")]
    NumericalBlowup {
        step: u64,
        t: f64,
        last_good: Box<SwarmState>,
    },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("config: {0}")]
    Config(String),
}
