use num_bigint::BigUint;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(BigUint),
    #[error("{q} is not a power of {p}")]
    NotPrimePower { q: u64, p: u64 },
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("level mismatch: {0}")]
    LevelMismatch(String),
    #[error("field level of degree {deg} exceeds the configured guard {max}")]
    LevelTooLarge { deg: u64, max: u64 },
    #[error("enumerating {size} exponents exceeds the configured guard {max}")]
    EnumerationTooLarge { size: BigUint, max: u64 },
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("no primitive prime divisor of {b}^{r} - 1")]
    ZsigmondyException { b: BigUint, r: u64 },
    #[error("invalid blow-up factor {a}: {reason}")]
    InvalidBlowUp { a: u64, reason: String },
    #[error("regularization lift failed verification: {0}")]
    OrderViolation(String),
    #[error("character is not inflated from the base level: {0}")]
    NotNormInflated(String),
    #[error("conjugates of the transferred orbit disagree: {0}")]
    AmbiguousTwist(String),
    #[error("ramification index {e} is divisible by p = {p}")]
    NotEssentiallyTame { e: u64, p: u64 },
    #[error("shape error: {0}")]
    ShapeError(String),
    #[error("descent route {descent} disagrees with rectifier route {closed_form}")]
    MismatchAgainstRectifier {
        descent: BigUint,
        closed_form: BigUint,
    },
    #[error("orbit representative {0} is not inflated from its field of definition")]
    NotInNormImage(BigUint),
    #[error("pair character is not regular: {0}")]
    NotAdmissible(String),
    #[error("character is not regular over the base field: {0}")]
    NotRegularCharacter(String),
    #[error("element is not regular over the base field: {0}")]
    NotRegularElement(String),
    #[error("could not completely factor {0}")]
    FactorizationIncomplete(BigUint),
}

impl Error {
    /// Stable name of the error variant, as reported by the CLI.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotPrime(_) => "NotPrime",
            Error::NotPrimePower { .. } => "NotPrimePower",
            Error::DegreeMismatch(_) => "DegreeMismatch",
            Error::LevelMismatch(_) => "LevelMismatch",
            Error::LevelTooLarge { .. } => "LevelTooLarge",
            Error::EnumerationTooLarge { .. } => "EnumerationTooLarge",
            Error::OutOfRange(_) => "OutOfRange",
            Error::ZsigmondyException { .. } => "ZsigmondyException",
            Error::InvalidBlowUp { .. } => "InvalidBlowUp",
            Error::OrderViolation(_) => "OrderViolation",
            Error::NotNormInflated(_) => "NotNormInflated",
            Error::AmbiguousTwist(_) => "AmbiguousTwist",
            Error::NotEssentiallyTame { .. } => "NotEssentiallyTame",
            Error::ShapeError(_) => "ShapeError",
            Error::MismatchAgainstRectifier { .. } => "MismatchAgainstRectifier",
            Error::NotInNormImage(_) => "NotInNormImage",
            Error::NotAdmissible(_) => "NotAdmissible",
            Error::NotRegularCharacter(_) => "NotRegularCharacter",
            Error::NotRegularElement(_) => "NotRegularElement",
            Error::FactorizationIncomplete(_) => "FactorizationIncomplete",
        }
    }
}
