use thiserror::Error;

/// Errors raised by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported parameterization: {0}")]
    Unsupported(String),

    #[error("numeric overflow: {0}")]
    NumericOverflow(String),

    #[error("precision loss: {0}")]
    Precision(String),

    #[error("memory budget exceeded: {requested} bytes requested, budget is {budget} bytes")]
    Resource { requested: u64, budget: u64 },
}

impl Error {
    /// True for errors caused by resource limits rather than by the inputs.
    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource { .. })
    }

    /// Stable snake_case tag, used in machine-readable error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Domain(_) => "domain",
            Error::Unsupported(_) => "unsupported",
            Error::NumericOverflow(_) => "numeric_overflow",
            Error::Precision(_) => "precision",
            Error::Resource { .. } => "resource",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
