//! One module per subcommand, plus the bracket-and-solve path they share.

pub mod eigs;
pub mod enumerate;
pub mod example;
pub mod multiplicity;
pub mod solve;
pub mod sweep;
pub mod verify;

use anyhow::Result;
use robin_rd::monotone::{iterate_down, iterate_up, SolutionRecord};
use robin_rd::shooting::{default_box_max, enumerate_solutions, Enumeration};
use robin_rd::subsuper::{
    eigen_subsolution, supersolution, Certified, OrderInterval, SuperCase, VerificationReport,
};
use robin_rd::Error;
use serde::Serialize;

use crate::Session;

/// A verified sub/supersolution bracket and the two extreme solutions in it.
pub struct Solved {
    pub sub: Certified,
    pub sup: Certified,
    pub case: SuperCase,
    pub minimal: SolutionRecord,
    pub maximal: SolutionRecord,
}

/// Builds the bracket for `(λ, μ)` and iterates from both ends.
pub fn bracket_and_solve(session: &Session, lambda: f64, mu: f64) -> Result<Solved, Error> {
    let (grid, quad) = (session.grid, &session.quad);
    let sub = eigen_subsolution(grid, lambda, mu, quad)?;
    let (case, sup) = supersolution(
        grid,
        lambda,
        mu,
        quad,
        session.config.supersolution,
        Some(&sub.pair),
    )?;
    let interval = OrderInterval::new(sub.pair.clone(), sup.pair.clone())?;
    let options = session.config.tolerances.iteration();
    let minimal = iterate_up(grid, lambda, mu, quad, &interval, &options)?;
    let maximal = iterate_down(grid, lambda, mu, quad, &interval, &options)?;
    Ok(Solved {
        sub,
        sup,
        case,
        minimal,
        maximal,
    })
}

/// Remediation text for the errors a solve can end with.
pub fn hint(err: &Error) -> &'static str {
    match err {
        Error::ParameterRegime(_) => {
            "positive solutions are only constructed for lambda + mu above A1; raise lambda or mu"
        }
        Error::ConstructionFailure { .. } => {
            "no verified pair was found; try another \"supersolution\" case in the config, \
             a finer grid, or run `enumerate` to see whether a positive solution exists here"
        }
        Error::NonConvergence { .. } => {
            "raise tolerances.max_iterations or loosen tolerances.change"
        }
        Error::MonotonicityBreach { .. } => {
            "the reaction terms may not be nondecreasing on the bracket; check H1"
        }
        _ => "",
    }
}

/// Runs the oracle with the configured box, or one derived from `super_amplitude`.
pub fn run_oracle(
    session: &Session,
    lambda: f64,
    mu: f64,
    super_amplitude: Option<f64>,
) -> Result<Enumeration, Error> {
    let shooting = &session.config.shooting;
    let box_max = shooting
        .box_max
        .unwrap_or_else(|| default_box_max(lambda, mu, super_amplitude));
    enumerate_solutions(
        session.grid,
        lambda,
        mu,
        &session.quad,
        box_max,
        shooting.density,
        &shooting.options(),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateSummary {
    pub amplitude: f64,
    pub ladder_steps: usize,
    pub report: VerificationReport,
}

impl From<&Certified> for CertificateSummary {
    fn from(c: &Certified) -> Self {
        Self {
            amplitude: c.amplitude,
            ladder_steps: c.ladder.len(),
            report: c.report.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionSummary {
    pub u_sup: f64,
    pub v_sup: f64,
    pub min_value: f64,
    pub residual_interior: f64,
    pub residual_boundary: f64,
    pub iterations: usize,
    pub converged: bool,
    pub positive: bool,
}

impl From<&SolutionRecord> for SolutionSummary {
    fn from(r: &SolutionRecord) -> Self {
        Self {
            u_sup: r.u_sup(),
            v_sup: r.v_sup(),
            min_value: r.pair.min(),
            residual_interior: r.residual_interior,
            residual_boundary: r.residual_boundary,
            iterations: r.iterations,
            converged: r.converged,
            positive: r.is_positive(),
        }
    }
}

/// Sup-norm distance from a solver solution to the closest oracle root.
#[derive(Clone, Debug, Serialize)]
pub struct OracleMatch {
    pub distance: Option<f64>,
    pub root_u0: Option<f64>,
    pub root_v0: Option<f64>,
    pub matched: bool,
}

impl OracleMatch {
    pub fn find(enumeration: &Enumeration, record: &SolutionRecord, tol: f64) -> Self {
        match enumeration.closest_positive(&record.pair) {
            Some((root, d)) => Self {
                distance: Some(d),
                root_u0: Some(root.candidate.u0),
                root_v0: Some(root.candidate.v0),
                matched: d < tol,
            },
            None => Self {
                distance: None,
                root_u0: None,
                root_v0: None,
                matched: false,
            },
        }
    }
}

/// Serializable view of one enumerated root.
#[derive(Clone, Debug, Serialize)]
pub struct RootSummary {
    pub u0: f64,
    pub v0: f64,
    pub u_sup: f64,
    pub v_sup: f64,
    pub min_value: f64,
    pub boundary_residual: [f64; 2],
    pub fd_residual_interior: f64,
    pub fd_residual_boundary: f64,
    pub newton_iterations: usize,
    pub positive: bool,
}

impl From<&robin_rd::shooting::EnumeratedRoot> for RootSummary {
    fn from(r: &robin_rd::shooting::EnumeratedRoot) -> Self {
        Self {
            u0: r.candidate.u0,
            v0: r.candidate.v0,
            u_sup: r.record.u_sup(),
            v_sup: r.record.v_sup(),
            min_value: r.record.pair.min(),
            boundary_residual: r.candidate.boundary_residual,
            fd_residual_interior: r.record.residual_interior,
            fd_residual_boundary: r.record.residual_boundary,
            newton_iterations: r.candidate.newton_iterations,
            positive: r.positive,
        }
    }
}
