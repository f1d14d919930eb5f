use thiserror::Error;

use crate::money::Money;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("negative probability {prob} for outcome {money}")]
    NegativeProbability { money: Money, prob: f64 },

    #[error("probabilities sum to {sum}, which is not within 1e-9 of 1")]
    ProbabilitySumOutOfTolerance { sum: f64 },

    #[error("lottery has no outcomes")]
    EmptyLottery,

    #[error("cash value {value} lies outside the utility domain [0, {max}]")]
    DomainExceeded { value: f64, max: f64 },

    #[error("invalid utility parameter: {0}")]
    InvalidParameter(String),

    #[error("tabulated utility row {row}: {reason}")]
    InvalidTable { row: usize, reason: String },

    #[error("alpha ordering requires a < c < b, got a={a}, c={c}, b={b}")]
    InvalidAlphaSpec { a: Money, c: Money, b: Money },

    #[error("alpha denominator u(b+x) - u(a+x) = {gap} is below 1e-12 at x = {x}")]
    DegenerateDenominator { x: f64, gap: f64 },

    #[error("k = {k} is outside 0..={n}")]
    KOutOfRange { k: u32, n: u32 },

    #[error("ell = {ell} is outside 0..={r} (r must be at least 1)")]
    ROutOfRange { r: u32, ell: u32 },

    #[error("{0}")]
    UnsupportedUtility(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("{count} policies exceed the enumeration limit of {limit}")]
    TooLargeToEnumerate { count: u128, limit: u128 },

    #[error("malformed policy tree: {0}")]
    MalformedTree(String),
}

pub type Result<T> = std::result::Result<T, Error>;
