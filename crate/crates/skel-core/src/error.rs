use alloc::string::String;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// Errors raised by the solver pipeline. Each variant names the stage that
/// failed so drivers can report where a run went wrong.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Invalid run or module parameter.
    Config(String),
    /// The second-order coefficient matrix is not positive definite at a point.
    Coefficient { x: f64, y: f64, detail: String },
    /// Degenerate geometry (coincident knots, empty arcs, points off a disc).
    Geometry(String),
    /// The cover violates a covering or ownership requirement.
    CoverValidity(String),
    /// RBF or trigonometric interpolant could not be built or evaluated.
    Interpolation(String),
    /// A field or cardinal function was evaluated outside its support.
    Evaluation(String),
    /// A dense or banded factorization found a (numerically) singular matrix.
    Factorization(String),
    /// A trajectory did not leave its subdomain within the step cap.
    Trajectory { knot: Option<usize>, steps: usize },
    /// Krylov or direct solver failure.
    Solver(String),
    /// A local block of the Schwarz preconditioner could not be factorized.
    Preconditioner { part: usize, detail: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Config(m) => write!(f, "configuration error: {m}"),
            Error::Coefficient { x, y, detail } => {
                write!(f, "coefficient error at ({x}, {y}): {detail}")
            }
            Error::Geometry(m) => write!(f, "geometry error: {m}"),
            Error::CoverValidity(m) => write!(f, "cover validity error: {m}"),
            Error::Interpolation(m) => write!(f, "interpolation error: {m}"),
            Error::Evaluation(m) => write!(f, "evaluation error: {m}"),
            Error::Factorization(m) => write!(f, "factorization error: {m}"),
            Error::Trajectory { knot: Some(k), steps } => write!(
                f,
                "trajectory error: knot {k} did not exit within {steps} steps"
            ),
            Error::Trajectory { knot: None, steps } => {
                write!(f, "trajectory error: no exit within {steps} steps")
            }
            Error::Solver(m) => write!(f, "solver error: {m}"),
            Error::Preconditioner { part, detail } => {
                write!(f, "preconditioner error in part {part}: {detail}")
            }
        }
    }
}

impl core::error::Error for Error {}
