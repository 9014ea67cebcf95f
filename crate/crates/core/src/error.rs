use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("{what} = {value} outside [{min}, {max}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("quadrature did not converge: achieved error {achieved:e}, requested {requested:e}")]
    Convergence { achieved: f64, requested: f64 },

    #[error("singular: {0}")]
    Singular(String),

    #[error("no degenerate pair on the zero-phase branch (found {roots} root(s))")]
    NoPair { roots: usize },

    #[error("no bifurcation: zero-phase root count constant ({roots}) over the range")]
    NoBifurcation { roots: usize },

    #[error("classification ambiguous: {0}")]
    Ambiguous(String),
}

impl Error {
    /// True for failures of a numerical method as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Convergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
