use thiserror::Error;

/// Errors produced by measure construction, evaluation, and the operators
/// built on top of them.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A constructor rejected its arguments.
    #[error("validation: {0}")]
    Validation(String),

    /// An evaluation point lies outside the admissible set.
    #[error("{what} = {value} outside {bounds}")]
    Domain {
        what: &'static str,
        value: f64,
        bounds: String,
    },

    /// An iteration or recursion budget ran out before the requested
    /// tolerance was reached. `achieved` is the bound that was attained.
    #[error("requested tolerance {requested:e} not reached, achieved {achieved:e}")]
    Precision { requested: f64, achieved: f64 },

    /// No bracketing pair with the requested mass increment exists around x.
    #[error("no bracket with mass increment >= {h:e} around x = {x}")]
    DegenerateBracket { x: f64, h: f64 },

    /// The operation is only defined for a different measure variant.
    #[error("operation requires a {required} measure, got {got}")]
    UnsupportedVariant {
        required: &'static str,
        got: &'static str,
    },

    /// The eigenfunction index is not admissible for the boundary condition.
    #[error("index n = {n} is invalid under {bc} boundary conditions")]
    InvalidIndex { n: u32, bc: &'static str },

    /// A fixed-point iteration did not converge within its cap.
    #[error("no convergence after {iterations} iterations")]
    IterationLimit { iterations: u32 },

    /// The value cannot be written in the interchange format.
    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn domain(what: &'static str, value: f64, bounds: impl Into<String>) -> Self {
        Error::Domain {
            what,
            value,
            bounds: bounds.into(),
        }
    }
}
