use thiserror::Error;

/// Errors raised by the permutation engine.
///
/// The variants map one-to-one onto the CLI exit codes: parse and domain
/// problems are input errors, cap violations and precondition failures
/// get their own codes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error at token {position} ({token:?}): {reason}")]
    Parse {
        position: usize,
        token: String,
        reason: String,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what}: n = {n} exceeds the cap of {cap} (raise it with {flag})")]
    CapExceeded {
        what: &'static str,
        n: usize,
        cap: usize,
        flag: &'static str,
    },

    #[error("precondition failed: index {index} is in I but not a left descent of w (J(w) = {{{descents}}})")]
    NotSubsetOfDescents { index: usize, descents: String },
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Domain(_) => 2,
            Error::CapExceeded { .. } => 3,
            Error::NotSubsetOfDescents { .. } => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Flag name quoted in cap-violation messages.
pub const CAP_OVERRIDE_FLAG: &str = "--cap-override";
