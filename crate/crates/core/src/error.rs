use crate::rng::SeedTriple;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Structural problem: the pieces of an input do not agree on dimension.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("state blew up at t = {time} on path {seed}")]
    BlowUp { time: f64, seed: SeedTriple },

    #[error("payoff is non-finite on path {seed}")]
    NonFinitePayoff { seed: SeedTriple },

    #[error("scenario family has {size} members, exceeding the cap of {cap}")]
    CapExceeded { size: String, cap: usize },

    #[error("explicit scheme unstable: dt = {dt:e} exceeds the limit {limit:e}")]
    Unstable { dt: f64, limit: f64 },

    #[error("scenario families are not nested: {0}")]
    NotNested(String),

    #[error("volatility family is not elliptic: {0}")]
    NotElliptic(String),

    #[error("|grad V| = {value:e} at (t = {t}, x = {x:?}) is below the floor {floor:e}")]
    GradientFloor {
        t: f64,
        x: Vec<f64>,
        value: f64,
        floor: f64,
    },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
