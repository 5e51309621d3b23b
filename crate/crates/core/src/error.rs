use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("{what} requires d >= {required}, got d = {got}")]
    DimensionTooSmall {
        what: &'static str,
        required: usize,
        got: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("degenerate polytope: {0}")]
    DegeneratePolytope(String),
    #[error("parts of a disjoint union overlap or cannot be separated: {0}")]
    NotDisjoint(String),
    #[error("unsupported body for {0}")]
    UnsupportedBody(&'static str),
    #[error("quadrature tolerance not met: achieved relative error {achieved:.3e}, requested {requested:.3e} after {subdivisions} subdivisions")]
    ToleranceNotMet {
        achieved: f64,
        requested: f64,
        subdivisions: usize,
    },
    #[error("enclosing ellipsoid input is degenerate: {0}")]
    MveeDegenerate(String),
    #[error("enclosing ellipsoid did not converge after {iterations} iterations (gap {gap:.3e})")]
    MveeNoConvergence { iterations: usize, gap: f64 },
    #[error("convex hull failed: {0}")]
    Hull(String),
    #[error("linear program failed: {0}")]
    LinearProgram(String),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("malformed body document: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub(crate) fn require_newtonian(what: &'static str, d: usize) -> Result<()> {
    if d < 3 {
        return Err(Error::DimensionTooSmall {
            what,
            required: 3,
            got: d,
        });
    }
    Ok(())
}
