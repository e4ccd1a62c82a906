use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("vertex index {index} out of range for graph on {n} vertices")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("self-loop on vertex {0} is not allowed")]
    SelfLoop(usize),

    #[error("weight {w} outside [0, {w_max}]")]
    WeightOutOfRange { w: f64, w_max: f64 },

    #[error("pair ({i}, {j}) cannot take weight {delta}: headroom is {headroom}")]
    SaturationOverflow {
        i: usize,
        j: usize,
        delta: f64,
        headroom: f64,
    },

    #[error("exact isoperimetric enumeration limited to n <= {max}, got n = {n}")]
    ExactSizeLimit { n: usize, max: usize },

    #[error("vertex subset has zero minimum volume")]
    ZeroVolume,

    #[error("invalid vertex subset: must be a proper non-empty subset")]
    InvalidSubset,

    #[error("graph must have at least {min} vertices, got {n}")]
    TooFewVertices { n: usize, min: usize },

    #[error("vertices {i} and {j} do not share identical weighted neighborhoods")]
    NotTwins { i: usize, j: usize },

    #[error("perturbation step must be positive, got {0}")]
    NonPositiveDelta(f64),

    #[error("{0} heuristic requires innate opinions")]
    OpinionsRequired(&'static str),

    #[error("graph has no edges")]
    NoEdges,

    #[error("linear solve failed to reach the requested residual")]
    SolveFailure,

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
