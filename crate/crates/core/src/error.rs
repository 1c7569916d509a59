//! Error type shared by all modules.

use std::fmt;

/// Everything that can go wrong outside of programmer error.
///
/// `Domain` is a violated precondition (wrong prime, argument outside a
/// convergence ball, a non-permutation generator). `Precision` means the
/// requested computation ran out of tracked p-adic digits, `Convergence`
/// that an iteration stagnated above tolerance. `Integrity` flags corrupted
/// structures (a cached table that is not a bijection), `CapExceeded`
/// enumeration limits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    Domain(String),
    Precision(String),
    Convergence(String),
    Integrity(String),
    CapExceeded(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(m) => write!(f, "domain error: {m}"),
            Error::Precision(m) => write!(f, "precision error: {m}"),
            Error::Convergence(m) => write!(f, "convergence error: {m}"),
            Error::Integrity(m) => write!(f, "integrity error: {m}"),
            Error::CapExceeded(m) => write!(f, "cap exceeded: {m}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line tool: 2 for domain-like
    /// failures, 3 for precision/convergence failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Integrity(_) | Error::CapExceeded(_) => 2,
            Error::Precision(_) | Error::Convergence(_) => 3,
        }
    }
}
