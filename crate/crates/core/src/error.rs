use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not an odd prime")]
    NotOddPrime(u64),
    #[error("prime {0} is inert in Z[i] (p = 3 mod 4)")]
    InertPrime(u64),
    #[error("prime {0} does not satisfy q = 1 mod 4")]
    NoSqrtMinusOne(u64),
    #[error("valuation of zero is undefined")]
    ZeroValuation,
    #[error("matrix is not a similitude: g g* is not scalar")]
    NotSimilitude,
    #[error("similitude factor must be a positive rational")]
    BadSimilitudeFactor,
    #[error("the zero matrix has no projective class")]
    ZeroMatrix,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("element is not in the lattice: {0}")]
    NotInLattice(String),
    #[error("p-adic precision {0} exceeded")]
    PrecisionExceeded(u32),
    #[error("generator index {index} out of range for {len} generators")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("resource cap of {cap} elements exceeded")]
    CapExceeded { cap: usize },
    #[error("matrix of size {n} exceeds the dense limit {limit}")]
    TooLarge { n: usize, limit: usize },
    #[error("eigensolver did not converge: {0}")]
    NoConvergence(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
