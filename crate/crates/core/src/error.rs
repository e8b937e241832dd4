use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph must have at least one node")]
    EmptyGraph,
    #[error("edge list is empty")]
    EmptyEdgeList,
    #[error("edge {edge} references node {node}, but the graph has {node_count} nodes")]
    NodeOutOfRange {
        edge: usize,
        node: usize,
        node_count: usize,
    },
    #[error("edge {edge} is a self loop on node {node}")]
    SelfLoop { edge: usize, node: usize },
    #[error("edge {edge} duplicates edge {first} between nodes {i} and {j}")]
    DuplicateEdge {
        edge: usize,
        first: usize,
        i: usize,
        j: usize,
    },
    #[error("edge {edge} has non-positive weight {weight}")]
    NonPositiveWeight { edge: usize, weight: f64 },
    #[error("graph is disconnected: node {unreachable} is not reachable from node 0")]
    Disconnected { unreachable: usize },
    #[error("subgraph induced by cluster {cluster} is disconnected")]
    ClusterDisconnected { cluster: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("edge id {edge} is not an edge of the graph ({edge_count} edges)")]
    EdgeNotInGraph { edge: usize, edge_count: usize },
    #[error("signal has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("node set is empty")]
    EmptySet,
    #[error("node {node} is out of range for a graph with {node_count} nodes")]
    InvalidNode { node: usize, node_count: usize },
    #[error("incidence matrix has numerical rank {rank}, expected {expected}")]
    NumericalRankDeficiency { rank: usize, expected: usize },
    #[error("pseudo-inverse column {column} has norm {norm}, above the bound {bound}")]
    ColumnBoundViolated {
        column: usize,
        norm: f64,
        bound: f64,
    },
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training set size {size} outside 1..={node_count}")]
    SizeOutOfRange { size: usize, node_count: usize },
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("non-finite iterate at iteration {iteration}")]
    NonFiniteIterate { iteration: usize },
    #[error("no positive L is certifiable for K = {k}")]
    NoFeasibleL { k: f64 },
    #[error("condition number needs L > 3, got L = {l}")]
    LTooSmall { l: f64 },
    #[error("Theorem 1 hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("could not draw a connected clustered graph in {retries} attempts")]
    GeneratorExhausted { retries: usize },
    #[error("no trial records to write")]
    EmptyRecords,
    #[error("config field `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("{path}: {reason}")]
    Format { path: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
