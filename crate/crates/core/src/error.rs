use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Error {
    /// A physical parameter or derived quantity is outside its domain
    /// (non-positive resistance, zero denominator, ...).
    ParameterDomain(&'static str),
    /// A configuration is internally inconsistent (frequency ratios, lengths).
    InvalidConfig(&'static str),
    /// A numerical routine produced a non-finite or otherwise unusable result.
    Numeric(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ParameterDomain(msg) => write!(f, "parameter out of domain: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::Numeric(msg) => write!(f, "numeric failure: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
