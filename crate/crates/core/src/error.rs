use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid mesh: {0}")]
    Mesh(String),

    #[error("kernel evaluated at coincident source and field points")]
    CoincidentPoints,

    #[error("zero-length edge")]
    ZeroLengthEdge,

    #[error("degenerate quadrilateral: {0}")]
    DegenerateQuad(String),

    #[error("history ledger holds {available} increments but step {requested} needs them all")]
    HistoryTooShort { available: usize, requested: usize },

    #[error("fractional power of negative concentration {value} (exponent {exponent})")]
    NegativeBase { value: f64, exponent: f64 },

    #[error("singular update in iterative inverse (|1 + trace| = {0:e})")]
    SingularUpdate(f64),

    #[error("singular matrix (suspect dof {dof})")]
    SingularMatrix { dof: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("nonlinear iteration did not converge after {iterations} iterations (last relative change {change:e})")]
    NonConvergence { iterations: usize, change: f64 },

    #[error("accuracy target not reached: {0}")]
    Accuracy(String),

    #[error("configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
