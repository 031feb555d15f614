use thiserror::Error;

/// Errors raised by the library. CLI exit codes are derived from the variant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error(
        "stationary distribution is not unique: closed communicating classes {closed:?} \
         (all communicating classes {classes:?})"
    )]
    Reducible {
        classes: Vec<Vec<usize>>,
        closed: Vec<Vec<usize>>,
    },

    #[error("resource budget exceeded: enumeration needs {alphabet}^{length} words ({words}) but the budget is {budget}")]
    Budget {
        alphabet: usize,
        length: usize,
        words: String,
        budget: u64,
    },

    #[error("outside hypothesis: {0}")]
    OutOfHypothesis(String),

    #[error("unsupported method: {0}")]
    Unsupported(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("stage {stage}: {source}")]
    Stage { stage: usize, source: Box<Error> },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    /// Prefixes the message with the location it was raised at, e.g. a
    /// scenario file key path.
    pub fn at(self, location: &str) -> Self {
        match self {
            Error::Validation(m) => Error::Validation(format!("{location}: {m}")),
            Error::Parse(m) => Error::Parse(format!("{location}: {m}")),
            Error::Domain(m) => Error::Domain(format!("{location}: {m}")),
            Error::OutOfHypothesis(m) => Error::OutOfHypothesis(format!("{location}: {m}")),
            Error::Unsupported(m) => Error::Unsupported(format!("{location}: {m}")),
            other => other,
        }
    }

    /// The innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_resource(&self) -> bool {
        matches!(self.root(), Error::Budget { .. })
    }
}
