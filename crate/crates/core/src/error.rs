use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("truncation order must be at least 2, got {0}")]
    InvalidTruncation(usize),

    #[error("exponent m = {0} outside the supported range")]
    InvalidExponent(f64),

    #[error("lattice size must be at least 4, got {0}")]
    InvalidLatticeSize(usize),

    #[error("truncation order {ell} exceeds lattice size {n}")]
    TruncationExceedsLattice { ell: usize, n: usize },

    #[error("no particle within the scan window of edge {edge}")]
    EmptyLattice { edge: usize },

    #[error("window too small: need radius {needed}, have {available}")]
    WindowTooSmall { needed: usize, available: usize },

    #[error("negative rate {value} at edge {edge}")]
    NegativeRate { edge: usize, value: f64 },

    #[error("invalid configuration string: {0}")]
    Parse(String),

    #[error("invalid density profile: {0}")]
    InvalidProfile(String),

    #[error("system is frozen (total rate zero) at t = {t}")]
    FrozenState { t: f64 },

    #[error("time step {dt} violates the stability bound {bound}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("density {value} at cell {cell} fell below the floor {floor}")]
    FloorBreach { cell: usize, value: f64, floor: f64 },

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),

    #[error("wall-clock budget of {budget_secs} s exceeded")]
    BudgetExceeded { budget_secs: f64 },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
