use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("world already terminated at t = {time:.3} s")]
    Terminated { time: f64 },

    #[error("observation has {got} features but the network expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("replay buffer holds {size} transitions, a batch needs {needed}")]
    InsufficientBuffer { size: usize, needed: usize },

    #[error("non-finite loss {loss} at training step {step}")]
    Diverged { loss: f64, step: u64 },

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("scenario file line {line}: {message}")]
    ScenarioFormat { line: usize, message: String },

    #[error("result sets cover different scenario ids")]
    MismatchedScenarios,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}
