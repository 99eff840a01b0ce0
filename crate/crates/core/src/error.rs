use std::path::PathBuf;

use crate::rootfind::RootFindReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("evaluation point coincides with pole {index}")]
    PoleHit { index: usize },

    #[error("root finder did not converge: {} of {} roots unconverged after {} iterations",
        .0.unconverged(), .0.roots.len(), .0.iterations)]
    DidNotConverge(Box<RootFindReport>),

    #[error("degree {degree} exceeds the limit {limit}")]
    DegreeTooLarge { degree: usize, limit: usize },

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("root sets differ in size ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },

    #[error("radii must be positive and strictly increasing")]
    InvalidRadii,

    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("empty atom set")]
    EmptySet,

    #[error("{pairs} atom pairs exceed the exact transport limit {limit}; use w1_sliced")]
    TooLarge { pairs: usize, limit: usize },

    #[error("measure has an atom at the origin")]
    AtomAtOrigin,

    #[error("polynomial has a zero constant or leading coefficient")]
    ZeroEndCoefficient,

    #[error("grids do not match")]
    GridMismatch,

    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    #[error("zero or pole within {distance:e} of the integration circle")]
    SingularityOnCircle { distance: f64 },

    #[error("evaluation point is a zero or pole")]
    ZeroAtEvaluationPoint,

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    /// Numeric failures (as opposed to bad input) map to CLI exit code 2.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::DidNotConverge(_)
                | Error::QuadratureFailure(_)
                | Error::PoleHit { .. }
                | Error::ZeroAtEvaluationPoint
                | Error::SingularityOnCircle { .. }
        )
    }
}
