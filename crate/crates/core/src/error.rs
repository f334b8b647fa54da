use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("node id out of range: {node} not in [0, {n})")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("feature matrix has {rows} rows, graph has {n} nodes")]
    FeatureRows { rows: usize, n: usize },
    #[error("feature dimension {found} does not match {expected}")]
    FeatureDim { expected: usize, found: usize },
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("lambda2 undefined for single node")]
    SingleNode,
    #[error("oracle limited to small graphs (n = {0}, max 20)")]
    OracleTooLarge(usize),
    #[error("graph is disconnected")]
    Disconnected,
    #[error("empty edge set")]
    EmptyEdgeSet,
    #[error("Cheeger dimension must be >= 2 (got {0})")]
    CheegerDim(usize),
    #[error("Hodge dimension must be >= 1")]
    HodgeDim,
    #[error("negative Hodge eigenvalue {0}")]
    NegativeHodgeEigenvalue(f64),
    #[error("triangle ({0}, {1}, {2}) references a non-edge")]
    NotAClique(usize, usize, usize),
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("degenerate embedding (zero norm) at batch index {0}")]
    DegenerateEmbedding(usize),
    #[error("non-finite gradient in {0}")]
    NonFiniteGradient(String),
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("need at least two classes, found {0}")]
    TooFewClasses(usize),
    #[error("class {class} has {count} samples, fewer than {folds} folds")]
    TooFewSamples {
        class: usize,
        count: usize,
        folds: usize,
    },
}
