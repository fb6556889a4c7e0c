use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty table")]
    EmptyTable,

    #[error("cell {index} is negative: {value}")]
    NegativeCell { index: usize, value: f64 },

    #[error("cell {index} is not finite")]
    NonFiniteCell { index: usize },

    #[error("probability table sums to {sum:.17}, expected 1")]
    ProbabilitySum { sum: f64 },

    #[error("zero cell: odds ratio undefined")]
    ZeroCell,

    #[error("IPF requires strictly positive table")]
    IpfZeroCell,

    #[error("solver start table must be strictly positive")]
    NonPositiveStart,

    #[error("omega must be positive and finite, got {value}")]
    InvalidOmega { value: f64 },

    #[error("odds-ratio target {name} must be positive and finite, got {value}")]
    InvalidTarget { name: &'static str, value: f64 },

    #[error("invalid solver configuration: {reason}")]
    InvalidConfig { reason: &'static str },

    #[error("solver did not converge within {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("degenerate system: singular Jacobian at iteration {iteration}")]
    SingularJacobian { iteration: usize },

    #[error("solver disagreement: IPF and Newton solutions differ by {max_diff:.3e} (allowed {allowed:.1e})")]
    SolverDisagreement { max_diff: f64, allowed: f64 },

    #[error("free parameters infeasible: {reason}")]
    InfeasibleFreeParameters { reason: String },

    #[error("no solution on this fiber: no feasible root completes the table")]
    NoFeasibleRoot,

    #[error("feasible region too thin for omega: no feasible point in {proposals} proposals")]
    FeasibleRegionTooThin { proposals: usize },

    #[error("internal consistency violation: {reason}")]
    Inconsistency { reason: String },
}
