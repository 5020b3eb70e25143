use thiserror::Error;

/// Errors raised by the symbolic, dynamical and estimation layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid Bernoulli weights: {0}")]
    InvalidWeights(String),

    #[error("symbol {symbol} is outside the alphabet 1..={alphabet}")]
    InvalidSymbol { symbol: u32, alphabet: u32 },

    #[error("cannot shift {steps} symbols off a word of length {len}")]
    StepsExceedLength { steps: usize, len: usize },

    #[error("word over alphabet {found} where alphabet {expected} was required")]
    AlphabetMismatch { expected: u32, found: u32 },

    #[error("alphabet size {base}^{power} does not fit in a symbol")]
    AlphabetOverflow { base: u32, power: u32 },

    #[error("word of length {len} is too short, {needed} symbols needed")]
    WordTooShort { needed: usize, len: usize },

    #[error("Bowen window k must be at least 1")]
    KZero,

    #[error("skew step requires a non-empty word")]
    EmptyWord,

    #[error("binary point of depth {depth} has no coordinate {needed}")]
    DepthExhausted { needed: usize, depth: usize },

    #[error("odometer carry runs past depth {depth}")]
    CarryOverflow { depth: usize },

    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),

    #[error("ball centre is not one of the sample points")]
    CenterNotInSample,

    #[error("window holds {rows} rows, at least 3 are required")]
    WindowTooSmall { rows: usize },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("config field `{field}`: {reason}")]
    ConfigInvalid { field: String, reason: String },

    #[error("unknown system `{0}`")]
    SystemUnknown(String),

    #[error("unknown estimator `{0}`")]
    EstimatorUnknown(String),

    #[error("i/o failure: {0}")]
    IoFailure(String),
}

impl Error {
    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::ConfigInvalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by the experiment description rather than the run.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::ConfigInvalid { .. } | Error::SystemUnknown(_) | Error::EstimatorUnknown(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::IoFailure(err.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
