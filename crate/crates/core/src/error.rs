use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A density, bound or mass that must be non-negative was not.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Marginals with different total mass in exact mode.
    #[error("unbalanced marginals: sum(f) = {f_total}, sum(g) = {g_total}")]
    Unbalanced { f_total: String, g_total: String },

    #[error("grid size {n} must be divisible by {divisor}")]
    Divisibility { n: usize, divisor: usize },

    /// Exact arithmetic grew past the configured size limit.
    #[error("exact arithmetic exceeded {limit} bits (magnitude reached {bits} bits)")]
    Resource { bits: u64, limit: u64 },

    #[error("solver failure: {0}")]
    SolverFailure(String),

    #[error("instance too large for the dense oracle: {cells} cells (limit {limit})")]
    InstanceTooLarge { cells: usize, limit: usize },

    #[error("problem is infeasible (deficit {deficit})")]
    Infeasible { deficit: String },

    /// A plan handed to a check that requires membership in the feasible set.
    #[error("plan is not feasible: {0}")]
    InfeasiblePlan(String),

    #[error("certificate infeasible at ({i}, {j}): {reason}")]
    InfeasibleCertificate { i: usize, j: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
