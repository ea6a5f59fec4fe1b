use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("edge {edge}: inverse {inverse} does not exist")]
    DanglingInverse { edge: String, inverse: String },

    #[error("edge {edge}: unknown vertex {vertex}")]
    UnknownVertex { edge: String, vertex: String },

    #[error("{what}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        what: String,
        expected: usize,
        found: usize,
    },

    #[error("graph failed validation:\n{0}")]
    Invalid(crate::lattice::ValidationReport),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("inconsistent system: residual {residual:e} ({context})")]
    Inconsistent { context: String, residual: f64 },

    #[error("no return to the base state found within {horizon} steps")]
    NoReturn { horizon: usize },

    #[error("label conflict at {state}: period {period} is inconsistent with the lifted walk")]
    LabelConflict { state: String, period: usize },

    #[error("rank deficient: return lattice has rank {rank} < {dim} within radius {radius}")]
    RankDeficient {
        rank: usize,
        dim: usize,
        radius: i64,
    },

    #[error("Gram matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("negative probability {value:e} on edge {edge}")]
    NegativeProbability { edge: String, value: f64 },

    #[error("branch ambiguity: {count} eigenvalues within {tol:e} of the tracked branch")]
    BranchAmbiguity { count: usize, tol: f64 },

    #[error("state space of {states} cells exceeds the cap of {cap}")]
    MemoryBudget { states: u128, cap: u128 },

    #[error("Gaussian term vanishes: n={n} is not in the admissible residue class")]
    ZeroGaussian { n: usize },

    #[error("{0}")]
    Argument(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    /// The innermost error, skipping stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}
