use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// The exponent tuple violates `1 < p_i <= q <= gamma`, `r_i >= 1` or `s > 1`.
    #[error("invalid exponents: {0}")]
    InvalidExponents(String),
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Grid or model configuration is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),
    /// A ball or sub-box does not fit the grid.
    #[error("geometry error: {0}")]
    Geometry(String),
    /// The exponents fail one of the three admissibility conditions.
    #[error("inadmissible exponents: {0}")]
    Inadmissible(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! bail {
    ($kind:ident, $($arg:tt)*) => {
        return Err($crate::error::Error::$kind(alloc::format!($($arg)*)))
    };
}
pub(crate) use bail;
