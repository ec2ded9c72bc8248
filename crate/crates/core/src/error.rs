use thiserror::Error;

/// Errors raised by manifold operations, energies, solvers and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("manifold mismatch: expected {expected}, found {found}")]
    ManifoldMismatch { expected: String, found: String },

    #[error("tangent vector is not based at the given point")]
    BaseMismatch,

    #[error("point is in the cut locus: {0}")]
    CutLocus(String),

    #[error("conjugate point along geodesic (|sin sqrt(kappa)| = {0:e})")]
    ConjugatePoint(f64),

    #[error("midpoint is ambiguous for antipodal endpoints")]
    AmbiguousMidpoint,

    #[error("manifold {0} is not a Lie group")]
    NotLieGroup(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("cannot project the zero vector")]
    ZeroVector,

    #[error("membership violation: {0}")]
    Membership(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ladder step {step} failed: {source}")]
    Ladder { step: u8, source: Box<Error> },

    #[error("at pixel {pixel}: {source}")]
    AtPixel { pixel: usize, source: Box<Error> },

    #[error("unknown name: {0}")]
    UnknownName(String),

    #[error("bad magic bytes")]
    BadMagic,

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn at_pixel(self, pixel: usize) -> Error {
        match self {
            e @ Error::AtPixel { .. } => e,
            e => Error::AtPixel { pixel, source: Box::new(e) },
        }
    }

    pub fn in_ladder_step(self, step: u8) -> Error {
        Error::Ladder { step, source: Box::new(self) }
    }

    /// Strips pixel and ladder annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtPixel { source, .. } | Error::Ladder { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
