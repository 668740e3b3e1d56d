use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parameters are not allowable: {0}")]
    NotAllowable(String),
    #[error("orbit hits an address boundary at step {step}")]
    GoodSetViolation { step: usize },
    #[error("word has no period block")]
    FinitePrefixWord,
    #[error("invalid kappa pair: {0}")]
    InvalidKappaPair(String),
    #[error("mu = {mu} outside [0, {max}]")]
    InvalidMu { mu: i64, max: i64 },
    #[error("orbit is not periodic of the stated type")]
    NotPeriodic,
    #[error("orbit leaves the positive-slope region at step {step}")]
    EscapedPositiveRegion { step: usize },
    #[error("rotation number not locked within the iteration budget: {0}")]
    NonLockingWithinBudget(String),
    #[error("set is not kfsm: ordering fails at j = {j}")]
    NotKfsm { j: usize },
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
