use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("{0}")]
    Domain(String),

    /// λ = 0 reduces the problem to per-user top-k; the scaling reduction is undefined.
    #[error("lambda is zero: the objective is pure preference, use the per-user top-k solver")]
    ZeroLambda,

    #[error("instance has no size/teleportation parameters")]
    MissingSt,

    #[error("configuration is infeasible ({} violation(s))", .0.len())]
    Infeasible(Vec<crate::model::Violation>),

    #[error("no feasible configuration exists for this instance")]
    NoFeasibleConfiguration,

    #[error("search space of {count} configurations exceeds the oracle limit of {limit}")]
    SearchSpaceTooLarge { count: f64, limit: f64 },

    #[error("replay sequence exhausted with {} unfilled cell(s): {unfilled:?}", .unfilled.len())]
    IncompleteReplay { unfilled: Vec<(usize, usize)> },

    #[error("lp: {0}")]
    Lp(String),

    #[error("lp file parse error at line {line}: {msg}")]
    LpParse { line: usize, msg: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
