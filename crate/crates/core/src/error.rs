use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("matrix [[{a},{b}],[{c},{d}]] does not have determinant 1")]
    NotUnimodular { a: i64, b: i64, c: i64, d: i64 },
    #[error("invalid triple ({p},{q},{r}): every entry must be at least 2")]
    InvalidTriple { p: i64, q: i64, r: i64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported singularity ({p},{q},{r}): neither simple elliptic nor cusp")]
    UnsupportedSingularity { p: i64, q: i64, r: i64 },
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("missing derivative data for exterior derivative")]
    MissingDerivative,
    #[error("grid too coarse: axis {axis} has {samples} samples (need at least 4)")]
    GridTooCoarse { axis: usize, samples: usize },
    #[error("frame size mismatch: expected {expected} vectors, got {got}")]
    FrameMismatch { expected: usize, got: usize },
    #[error("degenerate contact form at {0:?}")]
    DegenerateContact(Vec<f64>),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("profile constraint violated: {0}")]
    Constraint(String),
    #[error("parity mismatch: {0}")]
    Parity(String),
    #[error("gluing unavailable: {0}")]
    GluingUnavailable(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
