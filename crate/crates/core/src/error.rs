use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// Malformed descriptor or expression text. `position` is a byte offset into the input.
    #[error("parse error at column {}: {message}", position + 1)]
    Parse { position: usize, message: String },

    /// The input does not satisfy an operation's precondition.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// The criterion requested is not established for the given spectral set.
    #[error("criterion not established for this set: {0}")]
    OutOfScope(String),

    #[error("bandwidth {bandwidth} aliases on the grid; grid exponent q >= {required_q} is required")]
    Aliasing { bandwidth: i64, required_q: u32 },

    #[error("quadrature not converged at q = {q}: {coarse:.17e} vs {fine:.17e}")]
    QuadratureNotConverged { q: u32, coarse: f64, fine: f64 },

    #[error("ill-conditioned root cluster near {re:+.6e}{im:+.6e}i (multiplicity {multiplicity}, radius {radius:.3e}, residual {residual:.3e})")]
    IllConditionedRoots {
        re: f64,
        im: f64,
        multiplicity: usize,
        radius: f64,
        residual: f64,
    },

    /// Something that should be impossible mathematically happened numerically.
    #[error("numerical anomaly: {0}")]
    Anomaly(String),
}

impl Error {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }

    pub(crate) fn pre(message: impl Into<String>) -> Self {
        Error::Precondition(message.into())
    }

    /// True for failures that signal a numerical pathology rather than bad input.
    pub fn is_anomaly(&self) -> bool {
        matches!(
            self,
            Error::QuadratureNotConverged { .. } | Error::IllConditionedRoots { .. } | Error::Anomaly(_)
        )
    }
}
