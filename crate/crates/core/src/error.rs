use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} components, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("value {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("enumeration refused: n0 = {n0} outside supported range 1..={max}")]
    EnumerationGuard { n0: usize, max: usize },

    #[error("inconsistent equilibrium datum: |chi(xi)| = {chi_abs}, a/K = {beta}")]
    Consistency { chi_abs: f64, beta: f64 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    Asymmetric(f64),

    #[error("invalid flip set: {0}")]
    FlipSet(String),

    #[error("invalid sign sequence: {0}")]
    Sigma(String),

    #[error("non-finite state at t = {t}: component {index} = {value}")]
    NonFinite { t: f64, index: usize, value: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
