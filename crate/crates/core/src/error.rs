use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user input: bad parameters, unknown catalog entries, malformed files.
    #[error("configuration error: {0}")]
    Config(String),

    /// Argument outside the region where a function is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A linear solve, factorization or eigen-solve broke down.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The operation is well-formed but meaningless for this input
    /// (e.g. a convex conjugate of an affine function).
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// Time step could not be completed.
    #[error("step failure at t={t}: {reason}")]
    Step {
        t: f64,
        reason: String,
        residuals: Vec<f64>,
    },

    /// Envelope calibration or rate fit failed on the supplied data.
    #[error("fit failure: {0}")]
    Fit(String),

    #[error("data error: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
