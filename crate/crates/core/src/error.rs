use std::fmt;

/// Errors surfaced by market loading, oracles and solvers.
///
/// The CLI maps these onto its exit-code contract: `Parse`, `Validation` and
/// `Unsupported` are invalid input (2); `NonConvergence` and `BitBudget` are
/// budget exhaustion (3); `Verification` is an exact-phase gate failure (4).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Malformed input file or unparsable rational literal.
    Parse(String),
    /// Structurally invalid market or parameter set.
    Validation(String),
    /// Operation not defined for the given utility classes.
    Unsupported(String),
    /// The demand oracle returned values inconsistent with its contract.
    OracleInconsistent(String),
    /// Round budget exhausted before reaching the termination threshold.
    NonConvergence { rounds: u64, detail: String },
    /// A linear system expected to have full rank did not.
    RankDeficient(String),
    /// An exact-phase verification gate failed.
    Verification(String),
    /// Arbitrary-precision growth exceeded the configured bit cap.
    BitBudget(String),
    /// Filesystem error wrapped with the offending path.
    Io(String),
    /// Internal invariant violation; indicates a bug.
    Internal(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Parse(m) => write!(f, "parse error: {m}"),
            Error::Validation(m) => write!(f, "validation error: {m}"),
            Error::Unsupported(m) => write!(f, "unsupported: {m}"),
            Error::OracleInconsistent(m) => write!(f, "oracle inconsistency: {m}"),
            Error::NonConvergence { rounds, detail } => {
                write!(f, "no convergence within {rounds} rounds: {detail}")
            }
            Error::RankDeficient(m) => write!(f, "rank-deficient system: {m}"),
            Error::Verification(m) => write!(f, "verification failed: {m}"),
            Error::BitBudget(m) => write!(f, "bit budget exceeded: {m}"),
            Error::Io(m) => write!(f, "io error: {m}"),
            Error::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for Error {}
