use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("curve is trivial after cyclic reduction")]
    TrivialCurve,
    #[error("multi-curves live on different surfaces ({0} vs {1})")]
    PresentationMismatch(String, String),
    #[error("unknown generator '{0}'")]
    UnknownGenerator(char),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("unknown surface '{0}'")]
    UnknownSurface(String),

    #[error("element is not hyperbolic (|trace| = {0})")]
    NotHyperbolic(f64),
    #[error("degenerate configuration: ideal points closer than {0}")]
    DegenerateConfiguration(f64),
    #[error("value {0} outside the domain of {1}")]
    OutOfDomain(f64, &'static str),
    #[error("long segment {length} is not above the threshold {threshold}")]
    BelowThreshold { length: f64, threshold: f64 },
    #[error("no convergence after {0} compositions")]
    NoConvergence(usize),
    #[error("invalid representation: {0}")]
    InvalidRepresentation(String),

    #[error("no holonomy representation configured for surface '{0}'")]
    NoRepresentation(String),
    #[error("smoothing needs equal weights, found {0} and {1}")]
    WeightMismatch(String, String),
    #[error("crossing does not belong to this multi-curve: {0}")]
    InvalidCrossing(String),
    #[error("count not stable: {at_radius} at radius {radius}, {at_next} at radius {next}")]
    Unstable {
        radius: usize,
        at_radius: usize,
        next: usize,
        at_next: usize,
    },

    #[error("generating set does not generate within radius {0}")]
    NotGenerating(usize),
    #[error("functional '{0}' is not homogeneous; rational weights are undefined")]
    NotHomogeneous(String),
    #[error("word of length {length} exceeds budget {budget}")]
    BudgetExceeded { length: usize, budget: usize },
    #[error("functional '{0}' does not claim {1}")]
    MissingAxiom(String, &'static str),

    #[error("graph embedding is not filling within radius {0}")]
    NotFilling(usize),
    #[error("no lift of the curve found up to combinatorial length {0}")]
    NoLiftFound(usize),
    #[error("edge mismatch: {0}")]
    EdgeMismatch(String),
    #[error("exponent p = {0} is below 1")]
    BadExponent(f64),
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("gcd({0}, {1}) != 1")]
    NotCoprime(u64, u64),
    #[error("grid is degenerate: {0}")]
    DegenerateGrid(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
