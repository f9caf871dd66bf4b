use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Variants are grouped by the module that raises them; [`Error::module`]
/// names that module so that front ends can report where a pipeline broke.
#[derive(Debug, Error)]
pub enum Error {
    #[error("geometry: {0}")]
    Geometry(String),

    #[error("geometry: point {x} + {y}i lies within {distance:e} of the boundary")]
    AmbiguousMembership { x: f64, y: f64, distance: f64 },

    #[error("geometry: empty grid ({0})")]
    EmptyGrid(String),

    #[error("moments: quadrature did not converge ({0})")]
    Accuracy(String),

    #[error("bergman: invalid basis ({0})")]
    BasisValidity(String),

    #[error("bergman: Gram factorization failed (condition estimate {condition:e})")]
    Conditioning { condition: f64 },

    #[error("bergman: cannot evaluate at {x} + {y}i ({reason})")]
    Evaluation { x: f64, y: f64, reason: String },

    #[error("bergman: logarithm branch cut crosses the boundary ({0})")]
    Branch(String),

    #[error("tracer: no closed zero crossings in window")]
    EmptyTrace,

    #[error("content: Cauchy transform point {x} + {y}i lies within {distance:e} of the boundary")]
    NearBoundary { x: f64, y: f64, distance: f64 },

    #[error("poisson: solver stalled at relative residual {residual:e} after {iterations} iterations")]
    Solver { residual: f64, iterations: usize },

    #[error("input: {0}")]
    Input(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Name of the module that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Geometry(_) | Error::AmbiguousMembership { .. } | Error::EmptyGrid(_) => {
                "geometry"
            }
            Error::Accuracy(_) => "moments",
            Error::BasisValidity(_)
            | Error::Conditioning { .. }
            | Error::Evaluation { .. }
            | Error::Branch(_) => "bergman",
            Error::EmptyTrace => "tracer",
            Error::Solver { .. } => "poisson",
            Error::NearBoundary { .. } => "content",
            Error::Input(_) | Error::Io(_) => "input",
        }
    }

    /// True for failures caused by malformed or out-of-range input, as
    /// opposed to numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Geometry(_)
                | Error::AmbiguousMembership { .. }
                | Error::EmptyGrid(_)
                | Error::BasisValidity(_)
                | Error::Input(_)
                | Error::Io(_)
        )
    }
}
