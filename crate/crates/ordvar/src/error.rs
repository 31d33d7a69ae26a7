use thiserror::Error;

/// Errors produced by the estimation, quadrature, and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A root could not be bracketed even after geometric expansion.
    #[error(
        "bracketing failure: f({lo}) = {f_lo} and f({hi}) = {f_hi} have the same sign \
         after {expansions} expansions"
    )]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
        expansions: u32,
    },

    /// The root iteration cap was reached before the tolerance was met.
    #[error("root solver hit the iteration cap; best estimate {best} with f = {f_best}")]
    RootIterationCap { best: f64, f_best: f64 },

    /// Adaptive quadrature could not reach the requested tolerance.
    #[error("quadrature did not converge; best estimate {best} with error bound {error_bound}")]
    QuadratureCap { best: f64, error_bound: f64 },

    /// An estimator variant was requested for a target or loss it is not defined for.
    #[error("incompatible request: {0}")]
    Incompatible(String),

    /// A data file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A data file contained no usable values.
    #[error("empty input: {0}")]
    EmptyInput(String),

    /// A user-supplied loss failed the bowl-shape validation.
    #[error("invalid loss: {0}")]
    InvalidLoss(String),

    /// A failure inside a Monte Carlo replicate, tagged with the replicate index.
    #[error("replicate {index}: {source}")]
    InReplicate {
        index: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn in_replicate(index: u64, source: Error) -> Self {
        Error::InReplicate {
            index,
            source: Box::new(source),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
