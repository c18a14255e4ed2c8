use thiserror::Error;

/// Errors produced by scenario construction, evaluation and the solvers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid config: {0}")]
    Config(String),

    #[error("disconnected node {0}: no link to the base station")]
    DisconnectedNode(usize),

    #[error("duplicate link between nodes {0} and {1}")]
    DuplicateLink(usize, usize),

    #[error("non-positive {what}: {value}")]
    NonPositive { what: &'static str, value: f64 },

    #[error("zero bandwidth")]
    ZeroBandwidth,

    #[error("no neighbor caches the content")]
    NoCachingNeighbor,

    #[error("infeasible placement: node {node} stores {load} Mbit, capacity {capacity} Mbit")]
    InfeasiblePlacement { node: usize, load: f64, capacity: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("assignment is already integral")]
    AlreadyIntegral,

    #[error("oracle budget exceeded: estimated {estimate} enumerations, budget {budget}")]
    BudgetExceeded { estimate: f64, budget: u64 },

    #[error("intractable: {0}")]
    Intractable(String),

    #[error("problem is infeasible")]
    Infeasible,

    #[error("solver limit reached: {0}")]
    SolverLimit(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
