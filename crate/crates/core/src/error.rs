use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid topology: {0}")]
    Topology(String),
    #[error("no route from node {from} to node {to}")]
    RoutingInfeasible { from: u32, to: u32 },
    #[error("demand {demand} Gbps exceeds the {cap} Gbps achievable-rate cap")]
    DemandCap { demand: f64, cap: f64 },
    #[error("invalid workload: {0}")]
    Workload(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("episode has no demand slots")]
    EmptyEpisode,
    #[error("episode exhausted after {0} slots")]
    EpisodeExhausted(usize),
    #[error("joint action space has {cardinality} actions, limit is {limit}")]
    OracleTooLarge { cardinality: u128, limit: u128 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("backward called without a preceding training forward pass")]
    NoForwardPass,
    #[error("non-finite gradient at parameter {0}")]
    NonFiniteGradient(usize),
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("checkpoint mismatch: {0}")]
    Checkpoint(String),
}
