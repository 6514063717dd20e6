use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid body: {0}")]
    InvalidBody(String),
    #[error("body has no measurable volume (estimate {volume} with stderr {stderr})")]
    EmptyBody { volume: f64, stderr: f64 },
    #[error("rejection sampling gave up after {0} consecutive misses")]
    RejectionOverflow(u64),
    #[error("bodies `{0}` and `{1}` share a boundary")]
    SharedBoundary(String, String),
    #[error("duplicate body id `{0}`")]
    DuplicateId(String),
    #[error("scene parse error: {0}")]
    Parse(String),
    #[error("scene must contain at least one body")]
    EmptyScene,
    #[error("body `{0}` overlaps more than one other body")]
    UnsupportedOverlapChain(String),
    #[error("scene contains overlapping bodies `{0}` and `{1}`")]
    OverlappingScene(String, String),
    #[error("negative value {0} cannot be binned")]
    NegativeValue(f64),
    #[error("histograms have different binning")]
    BinningMismatch,
    #[error("invalid binning: {0}")]
    InvalidBinning(String),
    #[error("body index {index} out of range for scene with {n} bodies")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("kernel `{0}` is singular at zero distance; the direct route refuses diagonal pairs")]
    SingularDiagonal(String),
    #[error("body `{0}` has zero mass")]
    ZeroMass(String),
    #[error("quadrature did not converge on [{a}, {b}] (error estimate {error})")]
    QuadratureFailure { a: f64, b: f64, error: f64 },
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
    #[error("invalid kernel spec `{0}`")]
    InvalidKernel(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
