use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("exponent must be at least 1")]
    ZeroExponent,
    #[error("modulus {p}^{s} exceeds the configured cap of {cap}")]
    CapExceeded { p: u64, s: u32, cap: u64 },
    #[error("modulus mismatch: expected {expected}, found {found}")]
    ModulusMismatch { expected: u64, found: u64 },
    #[error("enumeration of {needed} candidates exceeds the budget of {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("inconsistent result: {0}")]
    Inconsistent(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
