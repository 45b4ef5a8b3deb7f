//! Error type shared across the crate.

use std::fmt;

/// Errors produced by substitution construction, structure analysis, the
/// joining tower and the arithmetic estimators.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    EmptyAlphabet,
    DuplicateSymbol(String),
    MissingRule(String),
    RuleLengthMismatch {
        symbol: String,
        expected: usize,
        got: usize,
    },
    UnknownSymbol {
        symbol: String,
        context: String,
    },
    BadLambda(usize),
    /// A requested word or table would exceed the configured size limit.
    Overflow {
        needed: u128,
        limit: usize,
    },
    /// Alphabet too large for set-based structure analysis.
    AlphabetTooLarge {
        len: usize,
        max: usize,
    },
    NotPrimitive,
    CertificationFailed,
    /// The identity c = h * c(pure base) failed; this signals a bug.
    IdentityViolation {
        c: usize,
        h: usize,
        c_pure: usize,
    },
    /// A theorem-backed postcondition failed; this signals a bug.
    InternalInvariantViolation(String),
    /// Column number / height bounds of a joining were violated; bug signal.
    BoundViolation(String),
    GroupTooLarge {
        size: usize,
        max: u128,
    },
    NotInGroup(String),
    IndexOutOfRange {
        index: usize,
        len: usize,
    },
    LengthMismatch {
        left: usize,
        right: usize,
    },
    EmptySeeds,
    NotPrime(u64),
    EqualPrimes(u64),
    BadModulus(u64),
    BadBlocks(String),
    BadObservable(String),
    Json(String),
    Io(String),
}

impl Error {
    /// True for failures of theorem-backed assertions, i.e. implementation
    /// bugs rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            Error::IdentityViolation { .. }
                | Error::InternalInvariantViolation(_)
                | Error::BoundViolation(_)
                | Error::GroupTooLarge { .. }
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyAlphabet => write!(f, "EmptyAlphabet: alphabet must be nonempty"),
            Error::DuplicateSymbol(s) => write!(f, "DuplicateSymbol: '{s}' appears twice"),
            Error::MissingRule(s) => write!(f, "MissingRule: no rule for letter '{s}'"),
            Error::RuleLengthMismatch {
                symbol,
                expected,
                got,
            } => write!(
                f,
                "RuleLengthMismatch: rule for '{symbol}' has {got} letters, expected {expected}"
            ),
            Error::UnknownSymbol { symbol, context } => {
                write!(f, "UnknownSymbol: '{symbol}' in {context}")
            }
            Error::BadLambda(l) => write!(f, "BadLambda: length {l} must be at least 2"),
            Error::Overflow { needed, limit } => {
                write!(f, "Overflow: needs {needed} letters, limit is {limit}")
            }
            Error::AlphabetTooLarge { len, max } => {
                write!(f, "AlphabetTooLarge: {len} letters, structure ops support {max}")
            }
            Error::NotPrimitive => write!(f, "NotPrimitive: operation requires a primitive substitution"),
            Error::CertificationFailed => {
                write!(f, "CertificationFailed: height certificate not found")
            }
            Error::IdentityViolation { c, h, c_pure } => write!(
                f,
                "IdentityViolation: c={c}, h={h}, c(pure base)={c_pure} but c != h*c(pure base)"
            ),
            Error::InternalInvariantViolation(msg) => {
                write!(f, "InternalInvariantViolation: {msg}")
            }
            Error::BoundViolation(msg) => write!(f, "BoundViolation: {msg}"),
            Error::GroupTooLarge { size, max } => {
                write!(f, "GroupTooLarge: closure reached {size} elements, max {max}")
            }
            Error::NotInGroup(p) => write!(f, "NotInGroup: permutation {p} not in G"),
            Error::IndexOutOfRange { index, len } => {
                write!(f, "IndexOutOfRange: index {index}, length {len}")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "LengthMismatch: sequence lengths {left} and {right}")
            }
            Error::EmptySeeds => write!(f, "EmptySeeds: a joining needs at least one seed pair"),
            Error::NotPrime(n) => write!(f, "NotPrime: {n}"),
            Error::EqualPrimes(p) => write!(f, "EqualPrimes: p and q must differ, got {p}"),
            Error::BadModulus(q) => write!(f, "BadModulus: {q}"),
            Error::BadBlocks(msg) => write!(f, "BadBlocks: {msg}"),
            Error::BadObservable(msg) => write!(f, "BadObservable: {msg}"),
            Error::Json(msg) => write!(f, "Json: {msg}"),
            Error::Io(msg) => write!(f, "Io: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
