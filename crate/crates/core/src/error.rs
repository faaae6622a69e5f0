use thiserror::Error;

/// Failure modes of the numerical pipeline.
///
/// The variants split into two families: domain errors, where the requested
/// quantity is mathematically undefined at the given parameters, and
/// numerical errors, where a linear-algebra step could not deliver a
/// trustworthy answer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    #[error("singular quantity `{quantity}`: {reason}")]
    Singular {
        quantity: &'static str,
        reason: &'static str,
    },

    #[error("null space has dimension {found}, expected 1")]
    Rank { found: usize },

    #[error("dominant eigenvalue is ambiguous at chi = {chi:e} (real-part gap {gap:e})")]
    BranchCrossing { chi: f64, gap: f64 },

    #[error("`{quantity}` has imaginary residue {residue:e}")]
    NonReal { quantity: &'static str, residue: f64 },

    #[error("{operation} failed: {reason}")]
    Decomposition {
        operation: &'static str,
        reason: &'static str,
    },

    #[error("`{quantity}` is not finite (intermediate overflow)")]
    NonFinite { quantity: &'static str },

    #[error("finite-difference estimates disagree: {0}")]
    Unconverged(String),
}

/// Passes `value` through if finite, else reports it as overflowed.
pub(crate) fn finite(quantity: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { quantity })
    }
}

impl Error {
    /// `true` for errors caused by the parameters themselves rather than by
    /// a failed numerical step.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::Degenerate(_) | Error::Singular { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
