use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes shared by every stage of the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A precondition on the inputs was violated.
    InvalidArgument(String),
    /// An iterative solver stopped before meeting its tolerance.
    ConvergenceFailure {
        stage: &'static str,
        iterations: usize,
        /// Last energy or residual measure, whichever the stage tracks.
        last: f64,
    },
    /// The moment (Hankel) matrix is singular or too ill-conditioned.
    DegenerateMoments { condition: f64 },
    /// The moment polynomial has no real root.
    RootFailure,
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::ConvergenceFailure {
                stage,
                iterations,
                last,
            } => write!(
                f,
                "{stage} did not converge after {iterations} iterations (last = {last:.3e})"
            ),
            Error::DegenerateMoments { condition } => write!(
                f,
                "moment matrix is degenerate (condition number {condition:.3e})"
            ),
            Error::RootFailure => write!(f, "moment polynomial has no real root"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
