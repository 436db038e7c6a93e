use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("third derivative of k requested (direction {direction}, existing index {existing:?})")]
    ThirdDerivative { direction: usize, existing: [u8; 3] },
    #[error("atom {0} is not allowed at this stage")]
    StageMismatch(String),
    #[error("unknown metric `{0}` (expected conformal3, nonconformal3 or conformal2)")]
    UnknownMetric(String),
    #[error("operator order {0} exceeds 2")]
    OrderTooHigh(usize),
    #[error("direction {0} out of range for dimension {1}")]
    BadDirection(usize, usize),
    #[error("b0 content is not of the expected shape: {0}")]
    Shape(String),
    #[error("non-integrable radial integrand: {0}")]
    NotIntegrable(String),
    #[error("unknown reference function `{0}`")]
    UnknownReference(String),
    #[error("limit at the origin does not converge for {0}")]
    NonConvergent(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;
