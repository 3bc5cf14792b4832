use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("no irreducible polynomial of degree {k} over F_{p}")]
    NoIrreducibleFound { p: u64, k: usize },
    #[error("division by the zero polynomial")]
    DivisionByZeroPoly,
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("zero element")]
    ZeroElement,
    #[error("zero input")]
    ZeroInput,
    #[error("scale exceeded: {what} ({value} > {limit})")]
    ScaleExceeded { what: &'static str, value: u128, limit: u128 },
    #[error("infinitely many periodic points (iterate is the identity)")]
    Infinite,
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("sigma is inseparable (zero constant term)")]
    InseparableSigma,
    #[error("p-adic precision exhausted at {0} digits")]
    PrecisionExhausted(u32),
    #[error("internal consistency failure: {0}")]
    Mismatch(String),
    #[error("invalid combination: {0}")]
    InvalidCombination(String),
    #[error("torsion count did not stabilise: {0}")]
    Incomplete(String),
    #[error("orbit count {num}/{den} is not an integer")]
    NonIntegerOrbitCount { num: String, den: u64 },
    #[error("map is not realizable: {0}")]
    NotRealizable(String),
    #[error("subadditive condition violated: {0}")]
    SubadditiveConditionViolated(String),
    #[error("zeta coefficient {index} is not an integer")]
    NonIntegerCoefficient { index: usize },
    #[error("prefix is not a root modulo t^{0}")]
    NotARoot(usize),
    #[error("root is too singular for Newton iteration: {0}")]
    SingularRoot(String),
    #[error("no admissible prime below {cap}: {constraint}")]
    NoAdmissibleEll { cap: u64, constraint: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
