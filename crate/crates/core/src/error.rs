use crate::grid::EigenResult;
use crate::subsuper::VerificationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("grid needs at least 8 interior nodes, got {0}")]
    InvalidGrid(usize),

    #[error("Robin coefficient must be finite and nonnegative, got {0}")]
    InvalidCoefficient(f64),

    #[error("fields live on different grids ({left} vs {right} interior nodes)")]
    GridMismatch { left: usize, right: usize },

    #[error("Neumann system is singular for a right-hand side with nonzero mean ({mean:e})")]
    SingularSystem { mean: f64 },

    #[error("inverse iteration did not converge after {iterations} iterations (last Rayleigh quotient {})", last.sigma)]
    EigenNotConverged {
        iterations: usize,
        last: Box<EigenResult>,
    },

    #[error("no sign change of sigma(tau*sqrt(K)) - K below K = {k_cap:e} (value there {value_at_cap:e})")]
    BracketNotFound { k_cap: f64, value_at_cap: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("example family needs alpha > k > 0, got k = {k}, alpha = {alpha}")]
    ParameterOrder { k: f64, alpha: f64 },

    #[error("degenerate argument: {label}({at}) = {value}, ratio undefined")]
    DegenerateArgument { label: String, at: f64, value: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parameter regime: {0}")]
    ParameterRegime(String),

    #[error("could not construct {what}: {reason}")]
    ConstructionFailure {
        what: &'static str,
        reason: String,
        report: Option<Box<VerificationReport>>,
    },

    #[error(
        "{label} is not strictly concave: second difference {second_difference:e} at s = {at}"
    )]
    ConcavityViolation {
        label: String,
        at: f64,
        second_difference: f64,
    },

    #[error("supersolution amplitude {amplitude} leaves the concavity region (r = {r}); move lambda + mu closer to A1")]
    RegionExceeded { amplitude: f64, r: f64 },

    #[error(
        "iterates lost monotonicity at iteration {iteration}, node {node} (defect {defect:e})"
    )]
    MonotonicityBreach {
        iteration: usize,
        node: usize,
        defect: f64,
    },

    #[error("monotone iteration stopped after {iterations} iterations (last change {last_change:e}, residual {residual:e})")]
    NonConvergence {
        iterations: usize,
        last_change: f64,
        residual: f64,
        trace: Vec<f64>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
