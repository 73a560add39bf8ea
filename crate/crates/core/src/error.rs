use thiserror::Error;

use crate::complex::{Simplex, Vertex};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("facet #{0} is empty")]
    EmptyFacet(usize),

    #[error("simplex {0} is not in the complex")]
    SimplexNotInComplex(Simplex),

    #[error("vertex {0} is not in the graph")]
    VertexNotInGraph(Vertex),

    #[error("graph has a loop at vertex {0}")]
    GraphLoop(Vertex),

    #[error("dimension {k} out of range (complex has maximal dimension {max:?})")]
    DimensionOutOfRange { k: usize, max: Option<usize> },

    #[error("the {k}-simplices do not cover the complex; uncovered: {}", fmt_simplices(.witnesses))]
    CoverViolation { k: usize, witnesses: Vec<Simplex> },

    #[error("not a 2-manifold")]
    NotA2Manifold,

    #[error("not a 3-manifold")]
    NotA3Manifold,

    #[error("function is not locally injective: {first} and {second} share the value {value}")]
    NotLocallyInjective {
        first: Simplex,
        second: Simplex,
        value: f64,
    },

    #[error("function has {got} values but the complex has {expected} {k}-simplices")]
    FunctionDomain { k: usize, expected: usize, got: usize },

    #[error("sample size must be positive")]
    EmptySample,

    #[error("spectral radius condition violated: c*|D| = {0} >= 1")]
    SpectralRadiusExceeded(f64),

    #[error("eigenvalue drift {drift:e} exceeds tolerance {tolerance:e}; reduce the step size")]
    StepSizeTooLarge { drift: f64, tolerance: f64 },

    #[error("{requested} edges requested but a graph on {vertices} vertices has at most {max}")]
    TooManyEdges {
        vertices: usize,
        requested: usize,
        max: usize,
    },

    #[error("complex exceeds the simplex budget of {0}")]
    SimplexBudgetExceeded(usize),

    #[error("data integrity check failed: {0}")]
    DataIntegrity(String),

    #[error("unknown complex '{0}'")]
    UnknownComplex(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("identity check failed: {0}")]
    IdentityViolated(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn fmt_simplices(s: &[Simplex]) -> String {
    const SHOWN: usize = 8;
    let mut out: Vec<String> = s.iter().take(SHOWN).map(|x| x.to_string()).collect();
    if s.len() > SHOWN {
        out.push(format!("... ({} total)", s.len()));
    }
    out.join(", ")
}
