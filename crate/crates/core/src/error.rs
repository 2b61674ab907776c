use crate::index::WaveletIndex;
use thiserror::Error;

/// Errors produced by index, tree, solver and quadrature operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid wavelet index ({j},{k}): translation must satisfy k <= max(0, 2^j - 1)")]
    InvalidIndex { j: u32, k: u64 },

    #[error("level {j} exceeds the structural level cap {cap}")]
    LevelCapExceeded { j: u32, cap: u32 },

    #[error("index {0} out of bounds (j_max={1}, p_max={2})")]
    OutOfBounds(String, u32, u32),

    #[error("node {0} is not a leaf")]
    NotALeaf(WaveletIndex),

    #[error("node {0} is not in the tree")]
    NotInTree(WaveletIndex),

    #[error("index set is not a valid complete tree")]
    InvalidTree,

    #[error("leaf degree assignment does not match the tree leaves")]
    LeafMismatch,

    #[error("{0} is not a subtree of the refined tree")]
    NotASubtree(WaveletIndex),

    #[error("step budget {requested} exceeds the {capacity} subdivisions representable below level {j_max}")]
    StepBudget {
        requested: usize,
        capacity: usize,
        j_max: u32,
    },

    #[error("search budget exhausted after {visited} tree shapes (budget {budget})")]
    SearchBudget { visited: usize, budget: usize },

    #[error("certificate requires 1 <= n <= N, got n={n}, N={steps}")]
    CertificateRange { n: usize, steps: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("damping {omega} outside the stable range (0, {limit})")]
    DampingOutOfRange { omega: f64, limit: f64 },

    #[error("residual norm increased during a relaxation sweep (iteration {iteration})")]
    ResidualIncrease { iteration: usize },

    #[error("quadrature did not converge on [{lo}, {hi}]{}", context_suffix(.context))]
    QuadratureFailure {
        lo: f64,
        hi: f64,
        context: Option<String>,
    },

    #[error("rate fit needs at least {needed} records with positive error, got {got}")]
    TooFewRecords { needed: usize, got: usize },

    #[error("rate fit input is degenerate (zero or constant errors)")]
    DegenerateFit,

    #[error("malformed coefficient row {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn context_suffix(context: &Option<String>) -> String {
    match context {
        Some(c) => format!(" while integrating {c}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;
