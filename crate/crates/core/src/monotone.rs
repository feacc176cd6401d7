//! Monotone (Picard) iteration inside an order interval.
//!
//! One step solves two Robin problems with the previous iterate on the right:
//!
//! ```text
//! (L + σ) u_{k+1} = λ f(v_k) + μ h(u_k) + σ u_k
//! (L + σ) v_{k+1} = λ g(u_k) + μ q(v_k) + σ v_k
//! ```
//!
//! With nondecreasing reaction terms the map is order preserving for `σ = 0`;
//! a positive shift restores that for terms that decrease on a subrange.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{assemble_robin_operator, Grid1D, RobinCoefficient, ScalarField};
use crate::nonlinearity::ReactionQuad;
use crate::subsuper::{defect_rows, reaction, OrderInterval, PairField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    FromSub,
    FromSuper,
    Shooting,
}

impl Origin {
    pub fn tag(&self) -> &'static str {
        match self {
            Origin::FromSub => "min",
            Origin::FromSuper => "max",
            Origin::Shooting => "shoot",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Nondecreasing,
    Nonincreasing,
}

/// Sup-norm change of every step and the direction the iterates moved.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub changes: Vec<f64>,
    pub direction: Option<Direction>,
}

/// A discrete solution with its defect.
#[derive(Clone, Debug)]
pub struct SolutionRecord {
    pub pair: PairField,
    pub lambda: f64,
    pub mu: f64,
    pub residual_interior: f64,
    pub residual_boundary: f64,
    pub iterations: usize,
    pub origin: Origin,
    pub converged: bool,
    pub trace: IterationTrace,
}

impl SolutionRecord {
    pub fn u_sup(&self) -> f64 {
        self.pair.u.sup_norm()
    }

    pub fn v_sup(&self) -> f64 {
        self.pair.v.sup_norm()
    }

    pub fn is_positive(&self) -> bool {
        self.pair.min() > 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IterationOptions {
    pub change_tol: f64,
    pub residual_tol: f64,
    pub max_iterations: usize,
    pub shift: f64,
}

impl Default for IterationOptions {
    fn default() -> Self {
        Self {
            change_tol: 1e-10,
            residual_tol: 1e-6,
            max_iterations: 10_000,
            shift: 0.0,
        }
    }
}

/// Sup-norms of the interior rows and of the boundary rows.
///
/// Boundary rows are `(u_0 − u_1)/h + c u_0 − (h/2) F_0`, the same rows the
/// verifier reads.
pub fn residual(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
    pair: &PairField,
) -> Result<(f64, f64)> {
    let rows = defect_rows(grid, lambda, mu, quad, pair)?;
    let last = grid.len() - 1;
    let mut interior = 0.0_f64;
    let mut boundary = 0.0_f64;
    for r in &rows {
        for (i, &value) in r.iter().enumerate() {
            if i == 0 || i == last {
                boundary = boundary.max(value.abs());
            } else {
                interior = interior.max(value.abs());
            }
        }
    }
    Ok((interior, boundary))
}

/// One Jacobi step of the monotone scheme.
pub fn picard_step(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
    pair: &PairField,
    shift: f64,
) -> Result<PairField> {
    let op = assemble_robin_operator(grid, RobinCoefficient::for_parameters(lambda, mu)?);
    let (mut fu, mut fv) = reaction(quad, lambda, mu, pair);
    if shift != 0.0 {
        fu.iter_mut()
            .zip(pair.u.values())
            .for_each(|(r, &w)| *r += shift * w);
        fv.iter_mut()
            .zip(pair.v.values())
            .for_each(|(r, &w)| *r += shift * w);
    }
    let u = op.solve_shifted(&ScalarField::from_values(grid, fu)?, shift)?;
    let v = op.solve_shifted(&ScalarField::from_values(grid, fv)?, shift)?;
    PairField::new(u, v)
}

fn order_slack(pair: &PairField) -> f64 {
    1e-9 * pair.sup_norm().max(1.0)
}

// First node where `next` moved against `direction`, with the size of the move.
fn breach(prev: &PairField, next: &PairField, direction: Direction) -> Option<(usize, f64)> {
    let tol = order_slack(next);
    let pairs = prev
        .u
        .values()
        .iter()
        .zip(next.u.values())
        .chain(prev.v.values().iter().zip(next.v.values()));
    let len = prev.u.values().len();
    for (idx, (a, b)) in pairs.enumerate() {
        let defect = match direction {
            Direction::Nondecreasing => a - b,
            Direction::Nonincreasing => b - a,
        };
        if defect > tol {
            return Some((idx % len, defect));
        }
    }
    None
}

fn iterate(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
    interval: &OrderInterval,
    direction: Direction,
    options: &IterationOptions,
) -> Result<SolutionRecord> {
    let origin = match direction {
        Direction::Nondecreasing => Origin::FromSub,
        Direction::Nonincreasing => Origin::FromSuper,
    };
    let mut current = match direction {
        Direction::Nondecreasing => interval.lower().clone(),
        Direction::Nonincreasing => interval.upper().clone(),
    };
    let mut trace = IterationTrace {
        changes: Vec::new(),
        direction: Some(direction),
    };
    let mut last_residual = f64::INFINITY;
    for iteration in 1..=options.max_iterations {
        let next = picard_step(grid, lambda, mu, quad, &current, options.shift)?;
        if let Some((node, defect)) = breach(&current, &next, direction) {
            return Err(Error::MonotonicityBreach {
                iteration,
                node,
                defect,
            });
        }
        if !interval.contains(&next, order_slack(&next)) {
            let node = first_escape(interval, &next);
            return Err(Error::MonotonicityBreach {
                iteration,
                node,
                defect: f64::NAN,
            });
        }
        let change = next.distance(&current)?;
        trace.changes.push(change);
        current = next;
        if change < options.change_tol {
            let (interior, boundary) = residual(grid, lambda, mu, quad, &current)?;
            last_residual = interior.max(boundary);
            if interior < options.residual_tol && boundary < options.residual_tol {
                return Ok(SolutionRecord {
                    pair: current,
                    lambda,
                    mu,
                    residual_interior: interior,
                    residual_boundary: boundary,
                    iterations: iteration,
                    origin,
                    converged: true,
                    trace,
                });
            }
        }
    }
    if last_residual.is_infinite() {
        let (interior, boundary) = residual(grid, lambda, mu, quad, &current)?;
        last_residual = interior.max(boundary);
    }
    Err(Error::NonConvergence {
        iterations: options.max_iterations,
        last_change: trace.changes.last().copied().unwrap_or(f64::NAN),
        residual: last_residual,
        trace: trace.changes,
    })
}

fn first_escape(interval: &OrderInterval, pair: &PairField) -> usize {
    let len = pair.u.values().len();
    (0..len)
        .find(|&i| {
            let lo = interval.lower();
            let hi = interval.upper();
            pair.u.get(i) < lo.u.get(i)
                || pair.v.get(i) < lo.v.get(i)
                || pair.u.get(i) > hi.u.get(i)
                || pair.v.get(i) > hi.v.get(i)
        })
        .unwrap_or(0)
}

/// Minimal solution: iterate upward from the lower end of `interval`.
pub fn iterate_up(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
    interval: &OrderInterval,
    options: &IterationOptions,
) -> Result<SolutionRecord> {
    iterate(
        grid,
        lambda,
        mu,
        quad,
        interval,
        Direction::Nondecreasing,
        options,
    )
}

/// Maximal solution: iterate downward from the upper end of `interval`.
pub fn iterate_down(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
    interval: &OrderInterval,
    options: &IterationOptions,
) -> Result<SolutionRecord> {
    iterate(
        grid,
        lambda,
        mu,
        quad,
        interval,
        Direction::Nonincreasing,
        options,
    )
}

/// Wraps an externally produced pair (e.g. from shooting) in a record.
pub fn record_for(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
    pair: PairField,
    origin: Origin,
    iterations: usize,
    tolerance: f64,
) -> Result<SolutionRecord> {
    let (interior, boundary) = residual(grid, lambda, mu, quad, &pair)?;
    Ok(SolutionRecord {
        pair,
        lambda,
        mu,
        residual_interior: interior,
        residual_boundary: boundary,
        iterations,
        origin,
        converged: interior < tolerance && boundary < tolerance,
        trace: IterationTrace::default(),
    })
}
