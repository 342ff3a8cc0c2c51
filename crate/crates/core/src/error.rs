use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration invariant failed; the message names it.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// An argument fell outside the domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// Transmit power must be strictly positive.
    #[error("domain error: transmit power must be positive, got {0}")]
    NonPositivePower(f64),

    #[error("threshold undefined: zero communication bandwidth")]
    ZeroBandwidth,

    #[error("asymptote undefined: {0}")]
    AsymptoteUndefined(String),

    #[error("dimension bound exceeded: {0}")]
    DimensionBound(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_power(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositivePower(p))
    }
}
