//! Sub- and supersolution pairs: the discrete verifier and the constructors
//! that produce certified pairs.
//!
//! Every row is measured with the same discrete operator the solvers use. At
//! an interior node the row is `(L u)_i − F_i`, where `F` is the reaction
//! (`λ f(v) + μ h(u)` for the first equation, `λ g(u) + μ q(v)` for the second).
//! At a boundary node the row is the ghost-node row multiplied by `h/2`:
//!
//! ```text
//! (u_0 − u_1)/h + c u_0 − (h/2) F_0
//! ```
//!
//! which is the one-sided normal derivative plus `c` times the trace, with
//! the half-cell reaction that keeps the closure second order. A subsolution
//! has every row `<= 0`, a supersolution every row `>= 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{
    assemble_robin_operator, compute_a1, compute_rho, principal_eigenpair, unit_load_solution,
    Grid1D, RobinCoefficient, ScalarField,
};
use crate::nonlinearity::{
    concavity_bound_m, default_f_samples, looks_bounded, q1, validate_f, FCase, Hypothesis,
    ReactionQuad,
};
use crate::shooting::{self, ShootingOptions};

/// Margin a strict inequality must clear.
pub const STRICT_MARGIN: f64 = 1e-10;

/// A `(u, v)` pair on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PairField {
    pub u: ScalarField,
    pub v: ScalarField,
}

impl PairField {
    pub fn new(u: ScalarField, v: ScalarField) -> Result<Self> {
        u.grid().ensure_same(&v.grid())?;
        Ok(Self { u, v })
    }

    /// Both components equal to `w`.
    pub fn diagonal(w: ScalarField) -> Self {
        Self { u: w.clone(), v: w }
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self::diagonal(ScalarField::zeros(grid))
    }

    pub fn grid(&self) -> Grid1D {
        self.u.grid()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            u: self.u.scaled(factor),
            v: self.v.scaled(factor),
        }
    }

    /// Componentwise `self <= other + tol` at every node.
    pub fn le(&self, other: &PairField, tol: f64) -> bool {
        self.u.le(&other.u, tol) && self.v.le(&other.v, tol)
    }

    pub fn distance(&self, other: &PairField) -> Result<f64> {
        Ok(self.u.distance(&other.u)?.max(self.v.distance(&other.v)?))
    }

    pub fn sup_norm(&self) -> f64 {
        self.u.sup_norm().max(self.v.sup_norm())
    }

    pub fn min(&self) -> f64 {
        self.u.min().min(self.v.min())
    }
}

/// An ordered pair of pairs, `lower <= upper` nodewise.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderInterval {
    lower: PairField,
    upper: PairField,
}

impl OrderInterval {
    pub fn new(lower: PairField, upper: PairField) -> Result<Self> {
        lower.grid().ensure_same(&upper.grid())?;
        if !lower.le(&upper, 0.0) {
            return Err(Error::InvalidInput(
                "order interval requires lower <= upper at every node".into(),
            ));
        }
        Ok(Self { lower, upper })
    }

    pub fn lower(&self) -> &PairField {
        &self.lower
    }

    pub fn upper(&self) -> &PairField {
        &self.upper
    }

    pub fn contains(&self, pair: &PairField, tol: f64) -> bool {
        self.lower.le(pair, tol) && pair.le(&self.upper, tol)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairKind {
    Sub,
    Super,
}

/// Which boundary condition the rows were measured against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryRows {
    #[default]
    Robin,
    /// Boundary entries hold the traces, which must vanish (non-strictly).
    Dirichlet,
}

/// The worst row of one kind and where it sits.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowExtreme {
    /// Signed worst value: the maximum row for a subsolution, the minimum for a supersolution.
    pub value: f64,
    pub node: usize,
    pub x: f64,
    /// Rounding allowance for this row family.
    pub allowance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquationCheck {
    pub interior: RowExtreme,
    pub boundary: RowExtreme,
}

/// Outcome of checking the sub/super inequalities on a pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub kind: PairKind,
    pub strict: bool,
    pub lambda: f64,
    pub mu: f64,
    #[serde(default)]
    pub boundary_rows: BoundaryRows,
    pub u: EquationCheck,
    pub v: EquationCheck,
    pub pass: bool,
}

impl VerificationReport {
    fn row_ok(&self, row: &RowExtreme, strict: bool) -> bool {
        let oriented = match self.kind {
            PairKind::Sub => -row.value,
            PairKind::Super => row.value,
        };
        if !oriented.is_finite() {
            return false;
        }
        if strict {
            oriented > STRICT_MARGIN.max(row.allowance)
        } else {
            oriented >= -row.allowance
        }
    }

    /// Re-evaluates the pass flag for the requested strictness.
    pub fn passes(&self, strict: bool) -> bool {
        let boundary_strict = strict && self.boundary_rows == BoundaryRows::Robin;
        [&self.u, &self.v].iter().all(|eq| {
            self.row_ok(&eq.interior, strict) && self.row_ok(&eq.boundary, boundary_strict)
        })
    }

    pub fn worst_interior(&self) -> [f64; 2] {
        [self.u.interior.value, self.v.interior.value]
    }

    pub fn worst_boundary(&self) -> [f64; 2] {
        [self.u.boundary.value, self.v.boundary.value]
    }

    /// First failing row, labelled by equation and row family.
    pub fn witness(&self) -> Option<(&'static str, &RowExtreme)> {
        let boundary_strict = self.strict && self.boundary_rows == BoundaryRows::Robin;
        [
            ("u interior", &self.u.interior, self.strict),
            ("u boundary", &self.u.boundary, boundary_strict),
            ("v interior", &self.v.interior, self.strict),
            ("v boundary", &self.v.boundary, boundary_strict),
        ]
        .into_iter()
        .find(|(_, row, strict)| !self.row_ok(row, *strict))
        .map(|(label, row, _)| (label, row))
    }
}

pub(crate) fn check_parameters(lambda: f64, mu: f64) -> Result<()> {
    if !(lambda.is_finite() && mu.is_finite() && lambda >= 0.0 && mu >= 0.0 && lambda + mu > 0.0) {
        return Err(Error::InvalidInput(format!(
            "need lambda, mu >= 0 with lambda + mu > 0, got ({lambda}, {mu})"
        )));
    }
    Ok(())
}

/// Right-hand sides `(λ f(v) + μ h(u), λ g(u) + μ q(v))` at every node.
pub fn reaction(
    quad: &ReactionQuad,
    lambda: f64,
    mu: f64,
    pair: &PairField,
) -> (Vec<f64>, Vec<f64>) {
    let (u, v) = (pair.u.values(), pair.v.values());
    let fu = u
        .iter()
        .zip(v)
        .map(|(&a, &b)| lambda * quad.f.eval(b) + mu * quad.h.eval(a))
        .collect();
    let fv = u
        .iter()
        .zip(v)
        .map(|(&a, &b)| lambda * quad.g.eval(a) + mu * quad.q.eval(b))
        .collect();
    (fu, fv)
}

/// Signed rows of both equations, boundary rows already scaled by `h/2`.
pub fn defect_rows(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
    pair: &PairField,
) -> Result<[Vec<f64>; 2]> {
    check_parameters(lambda, mu)?;
    grid.ensure_same(&pair.grid())?;
    let op = assemble_robin_operator(grid, RobinCoefficient::for_parameters(lambda, mu)?);
    let (fu, fv) = reaction(quad, lambda, mu, pair);
    let half_h = 0.5 * grid.spacing();
    let last = grid.len() - 1;
    let rows = |w: &ScalarField, rhs: Vec<f64>| -> Vec<f64> {
        let lw = op.matrix().apply(w.values());
        lw.iter()
            .zip(rhs)
            .enumerate()
            .map(|(i, (a, b))| {
                let r = a - b;
                if i == 0 || i == last {
                    half_h * r
                } else {
                    r
                }
            })
            .collect()
    };
    Ok([rows(&pair.u, fu), rows(&pair.v, fv)])
}

fn extreme(
    grid: Grid1D,
    rows: &[f64],
    nodes: impl Iterator<Item = usize>,
    kind: PairKind,
    allowance: f64,
) -> RowExtreme {
    let mut best: Option<(f64, usize)> = None;
    for i in nodes {
        let r = rows[i];
        let worse = match best {
            None => true,
            Some((b, _)) => {
                r.is_nan()
                    || match kind {
                        PairKind::Sub => r > b,
                        PairKind::Super => r < b,
                    }
            }
        };
        if worse {
            best = Some((r, i));
            if r.is_nan() {
                break;
            }
        }
    }
    let (value, node) = best.unwrap_or((0.0, 0));
    RowExtreme {
        value,
        node,
        x: grid.x(node),
        allowance,
    }
}

fn interior_allowance(grid: Grid1D, w: &ScalarField, rhs_scale: f64) -> f64 {
    let h = grid.spacing();
    8.0 * f64::EPSILON * (4.0 * w.sup_norm() / (h * h) + rhs_scale)
}

fn sup(values: &[f64]) -> f64 {
    values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Checks the discrete sub- or supersolution inequalities for `pair`.
pub fn verify_pair(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
    pair: &PairField,
    kind: PairKind,
    strict: bool,
) -> Result<VerificationReport> {
    let [ru, rv] = defect_rows(grid, lambda, mu, quad, pair)?;
    let (fu, fv) = reaction(quad, lambda, mu, pair);
    let last = grid.len() - 1;
    let half_h = 0.5 * grid.spacing();
    let check = |rows: &[f64], w: &ScalarField, rhs: &[f64]| {
        let allow = interior_allowance(grid, w, sup(rhs));
        EquationCheck {
            interior: extreme(grid, rows, 1..last, kind, allow),
            boundary: extreme(grid, rows, [0, last].into_iter(), kind, half_h * allow),
        }
    };
    let mut report = VerificationReport {
        kind,
        strict,
        lambda,
        mu,
        boundary_rows: BoundaryRows::Robin,
        u: check(&ru, &pair.u, &fu),
        v: check(&rv, &pair.v, &fv),
        pass: false,
    };
    report.pass = report.passes(strict);
    Ok(report)
}

/// Checks the Dirichlet system `-u'' = λ f(v)`, `-v'' = λ g(u)`, `u = v = 0`
/// on the boundary, as a subsolution. Strictness applies to interior rows.
pub fn verify_dirichlet_sub(
    grid: Grid1D,
    lambda: f64,
    quad: &ReactionQuad,
    pair: &PairField,
    strict: bool,
) -> Result<VerificationReport> {
    check_parameters(lambda, 0.0)?;
    grid.ensure_same(&pair.grid())?;
    let h = grid.spacing();
    let last = grid.len() - 1;
    let rows = |w: &[f64], other: &[f64], func: &crate::nonlinearity::Nonlinearity| -> Vec<f64> {
        (0..=last)
            .map(|i| {
                if i == 0 || i == last {
                    w[i]
                } else {
                    (2.0 * w[i] - w[i - 1] - w[i + 1]) / (h * h) - lambda * func.eval(other[i])
                }
            })
            .collect()
    };
    let (u, v) = (pair.u.values(), pair.v.values());
    let ru = rows(u, v, &quad.f);
    let rv = rows(v, u, &quad.g);
    let rhs_u: Vec<f64> = v.iter().map(|&s| lambda * quad.f.eval(s)).collect();
    let rhs_v: Vec<f64> = u.iter().map(|&s| lambda * quad.g.eval(s)).collect();
    let check = |rows: &[f64], w: &ScalarField, rhs: &[f64]| EquationCheck {
        interior: extreme(
            grid,
            rows,
            1..last,
            PairKind::Sub,
            interior_allowance(grid, w, sup(rhs)),
        ),
        boundary: extreme(grid, rows, [0, last].into_iter(), PairKind::Sub, 0.0),
    };
    let mut report = VerificationReport {
        kind: PairKind::Sub,
        strict,
        lambda,
        mu: 0.0,
        boundary_rows: BoundaryRows::Dirichlet,
        u: check(&ru, &pair.u, &rhs_u),
        v: check(&rv, &pair.v, &rhs_v),
        pass: false,
    };
    report.pass = report.passes(strict);
    Ok(report)
}

/// One rung of a verifier-gated amplitude search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderStep {
    pub amplitude: f64,
    pub pass: bool,
}

/// A pair together with the report that certifies it and the search that found it.
#[derive(Clone, Debug)]
pub struct Certified {
    pub pair: PairField,
    pub amplitude: f64,
    pub report: VerificationReport,
    pub ladder: Vec<LadderStep>,
}

fn ladder_search(
    what: &'static str,
    amplitudes: impl Iterator<Item = f64>,
    build: impl Fn(f64) -> Result<PairField>,
    verify: impl Fn(&PairField) -> Result<VerificationReport>,
) -> Result<Certified> {
    let mut ladder = Vec::new();
    let mut last_report = None;
    for amplitude in amplitudes {
        let pair = build(amplitude)?;
        let report = verify(&pair)?;
        ladder.push(LadderStep {
            amplitude,
            pass: report.pass,
        });
        if report.pass {
            return Ok(Certified {
                pair,
                amplitude,
                report,
                ladder,
            });
        }
        last_report = Some(report);
    }
    Err(Error::ConstructionFailure {
        what,
        reason: format!(
            "no amplitude passed in {} ladder steps (last tried {:e})",
            ladder.len(),
            ladder.last().map_or(f64::NAN, |s| s.amplitude)
        ),
        report: last_report.map(Box::new),
    })
}

fn principal_for(grid: Grid1D, lambda: f64, mu: f64) -> Result<ScalarField> {
    Ok(principal_eigenpair(grid, RobinCoefficient::for_parameters(lambda, mu)?)?.phi)
}

/// `ζ`: solution of `-ζ'' = 1` with coefficient `sqrt(λ + μ)`.
pub fn zeta(grid: Grid1D, lambda: f64, mu: f64) -> Result<ScalarField> {
    unit_load_solution(grid, RobinCoefficient::for_parameters(lambda, mu)?)
}

/// `ξ`: solution of `-ξ'' = 1` with coefficient 1.
pub fn xi(grid: Grid1D) -> Result<ScalarField> {
    unit_load_solution(grid, RobinCoefficient::new(1.0)?)
}

fn regime_above_a1(grid: Grid1D, lambda: f64, mu: f64, quad: &ReactionQuad) -> Result<f64> {
    check_parameters(lambda, mu)?;
    let g0 = quad.g.deriv0();
    let rho = compute_rho(grid, lambda + mu, g0)?;
    if rho >= 0.0 {
        let a1 = compute_a1(grid, g0)?;
        return Err(Error::ParameterRegime(format!(
            "lambda + mu = {} must exceed A1 = {a1:.6} (rho = {rho:.3e} >= 0)",
            lambda + mu
        )));
    }
    Ok(rho)
}

/// Smallest geometric amplitude tried by the subsolution ladder.
pub const SUB_LADDER_FLOOR: f64 = 1e-12;

/// `(m φ, m φ)` with `φ` the principal eigenfunction for `sqrt(λ + μ)`
/// and `m` the largest power of 1/2 (at most 1) that verifies.
pub fn eigen_subsolution(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
) -> Result<Certified> {
    regime_above_a1(grid, lambda, mu, quad)?;
    let phi = principal_for(grid, lambda, mu)?;
    ladder_search(
        "eigenfunction subsolution",
        (0..)
            .map(|j| 0.5f64.powi(j))
            .take_while(|&m| m >= SUB_LADDER_FLOOR),
        |m| Ok(PairField::diagonal(phi.scaled(m))),
        |p| verify_pair(grid, lambda, mu, quad, p, PairKind::Sub, false),
    )
}

const SUPER_DOUBLINGS: i32 = 60;

fn doubling() -> impl Iterator<Item = f64> {
    (0..=SUPER_DOUBLINGS).map(|j| 2f64.powi(j))
}

fn verify_super(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
) -> impl Fn(&PairField) -> Result<VerificationReport> + '_ {
    move |p| verify_pair(grid, lambda, mu, quad, p, PairKind::Super, false)
}

/// Bounded reaction terms: `((λ+μ) M ζ/‖ζ‖∞, (λ+μ) M ζ/‖ζ‖∞)` with `M` doubled from 1.
pub fn supersolution_bounded(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
) -> Result<Certified> {
    check_parameters(lambda, mu)?;
    let z = zeta(grid, lambda, mu)?;
    let shape = z.scaled((lambda + mu) / z.apex_sup_norm());
    ladder_search(
        "bounded-case supersolution",
        doubling(),
        |m| Ok(PairField::diagonal(shape.scaled(m))),
        verify_super(grid, lambda, mu, quad),
    )
}

/// Sublinear `h` with power-bounded `g`, `q`: `(M ζ, λ g(M(‖ζ‖∞ + 1)) ζ)`.
pub fn supersolution_f2(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
) -> Result<Certified> {
    check_parameters(lambda, mu)?;
    let z = zeta(grid, lambda, mu)?;
    let zs = z.apex_sup_norm();
    ladder_search(
        "F2 supersolution",
        doubling(),
        |m| {
            let second = lambda * quad.g.eval(m * (zs + 1.0));
            PairField::new(z.scaled(m), z.scaled(second))
        },
        verify_super(grid, lambda, mu, quad),
    )
}

/// Mirror of [`supersolution_f2`]: `(λ f(M(‖ζ‖∞ + 1)) ζ, M ζ)`.
pub fn supersolution_f3(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
) -> Result<Certified> {
    check_parameters(lambda, mu)?;
    let z = zeta(grid, lambda, mu)?;
    let zs = z.apex_sup_norm();
    ladder_search(
        "F3 supersolution",
        doubling(),
        |m| {
            let first = lambda * quad.f.eval(m * (zs + 1.0));
            PairField::new(z.scaled(first), z.scaled(m))
        },
        verify_super(grid, lambda, mu, quad),
    )
}

/// Unbounded `f`, `g` with bounded `h`, `q`: `(λ f(M‖ζ‖∞) ζ, λ g(M‖ζ‖∞) ζ)`.
pub fn supersolution_unbounded(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
) -> Result<Certified> {
    check_parameters(lambda, mu)?;
    let samples = default_f_samples();
    for (func, want_bounded) in [
        (&quad.f, false),
        (&quad.g, false),
        (&quad.h, true),
        (&quad.q, true),
    ] {
        if looks_bounded(func, &samples).is_none() != want_bounded {
            return Err(Error::HypothesisViolation(format!(
                "unbounded-case construction needs f, g unbounded and h, q bounded; {} is {}",
                func.label(),
                if want_bounded { "unbounded" } else { "bounded" }
            )));
        }
    }
    let z = zeta(grid, lambda, mu)?;
    let zs = z.apex_sup_norm();
    ladder_search(
        "unbounded-case supersolution",
        doubling(),
        |m| {
            PairField::new(
                z.scaled(lambda * quad.f.eval(m * zs)),
                z.scaled(lambda * quad.g.eval(m * zs)),
            )
        },
        verify_super(grid, lambda, mu, quad),
    )
}

/// `(A φ, A φ)` with `A` on a geometric ladder of ratio `2^(1/8)` starting at
/// `floor`; the smallest verifying amplitude is returned. Used when no tail
/// hypothesis applies but the reaction bends below the eigenvalue line.
pub fn eigen_supersolution(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
    floor: f64,
) -> Result<Certified> {
    check_parameters(lambda, mu)?;
    let phi = principal_for(grid, lambda, mu)?;
    let floor = floor.max(SUB_LADDER_FLOOR);
    ladder_search(
        "eigenfunction supersolution",
        (0..=8 * 48).map(|j| floor * 2f64.powf(j as f64 / 8.0)),
        |a| Ok(PairField::diagonal(phi.scaled(a))),
        verify_super(grid, lambda, mu, quad),
    )
}

/// Which supersolution shape to build.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuperCase {
    #[default]
    Auto,
    Bounded,
    F2,
    F3,
    Unbounded,
    Eigen,
}

/// Growth exponent of `func` over the last decade of `samples`.
fn tail_exponent(func: &crate::nonlinearity::Nonlinearity, samples: &[f64]) -> f64 {
    let top = *samples.last().unwrap();
    let (a, b) = (func.eval(top / 10.0), func.eval(top));
    if a > 0.0 && b > 0.0 {
        (b / a).log10()
    } else {
        f64::INFINITY
    }
}

/// Picks a supersolution shape from sampled tail evidence. Falls back to
/// [`SuperCase::Eigen`] when no tail hypothesis holds.
pub fn select_super_case(quad: &ReactionQuad) -> SuperCase {
    let samples = default_f_samples();
    let passes = |case: FCase, gamma: f64, beta: f64| {
        validate_f(quad, case, gamma, beta, &samples)
            .map(|r| r.all_passed())
            .unwrap_or(false)
    };
    if passes(FCase::F1, 0.0, 0.0) {
        return SuperCase::Bounded;
    }
    let bounded = |f| looks_bounded(f, &samples).is_none();
    if !bounded(&quad.f) && !bounded(&quad.g) && bounded(&quad.h) && bounded(&quad.q) {
        return SuperCase::Unbounded;
    }
    let slack = 0.05;
    let (eg, eq) = (
        tail_exponent(&quad.g, &samples),
        tail_exponent(&quad.q, &samples),
    );
    if passes(FCase::F2, eg.max(0.0) + slack, eq.max(0.0) + slack) {
        return SuperCase::F2;
    }
    let (ef, eh) = (
        tail_exponent(&quad.f, &samples),
        tail_exponent(&quad.h, &samples),
    );
    if passes(FCase::F3, ef.max(0.0) + slack, eh.max(0.0) + slack) {
        return SuperCase::F3;
    }
    SuperCase::Eigen
}

/// Builds a supersolution of the requested shape that also dominates `below`.
///
/// The amplitude ladders only stop once the verifier passes, so for the
/// non-eigen shapes the ladder continues until the pair also lies above `below`.
pub fn supersolution(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
    case: SuperCase,
    below: Option<&PairField>,
) -> Result<(SuperCase, Certified)> {
    let case = match case {
        SuperCase::Auto => select_super_case(quad),
        other => other,
    };
    let floor = below.map_or(SUB_LADDER_FLOOR, |p| p.sup_norm());
    let built = match case {
        SuperCase::Eigen => {
            let phi_floor = below.map_or(SUB_LADDER_FLOOR, |p| {
                // (Aφ, Aφ) dominates (mφ, mφ) exactly when A >= m.
                let phi = principal_for(grid, lambda, mu).ok();
                phi.map_or(floor, |phi| amplitude_ratio(p, &phi))
            });
            eigen_supersolution(grid, lambda, mu, quad, phi_floor)?
        }
        SuperCase::Bounded => supersolution_bounded(grid, lambda, mu, quad)?,
        SuperCase::F2 => supersolution_f2(grid, lambda, mu, quad)?,
        SuperCase::F3 => supersolution_f3(grid, lambda, mu, quad)?,
        SuperCase::Unbounded => supersolution_unbounded(grid, lambda, mu, quad)?,
        SuperCase::Auto => unreachable!(),
    };
    if let Some(lower) = below {
        if !lower.le(&built.pair, 0.0) {
            return dominate(grid, lambda, mu, quad, case, built, lower);
        }
    }
    Ok((case, built))
}

/// Largest nodewise ratio `max(p.u/φ, p.v/φ)`.
fn amplitude_ratio(p: &PairField, phi: &ScalarField) -> f64 {
    p.u.values()
        .iter()
        .chain(p.v.values())
        .zip(phi.values().iter().chain(phi.values()))
        .map(|(a, b)| a / b)
        .fold(SUB_LADDER_FLOOR, f64::max)
}

// Continue the doubling past the first verified rung until the pair sits above `lower`.
fn dominate(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
    case: SuperCase,
    first: Certified,
    lower: &PairField,
) -> Result<(SuperCase, Certified)> {
    let mut ladder = first.ladder.clone();
    let start = first.amplitude;
    let z = zeta(grid, lambda, mu)?;
    let zs = z.apex_sup_norm();
    for j in 1..=SUPER_DOUBLINGS {
        let m = start * 2f64.powi(j);
        let pair = match case {
            SuperCase::Bounded => PairField::diagonal(z.scaled((lambda + mu) * m / zs)),
            SuperCase::F2 => {
                PairField::new(z.scaled(m), z.scaled(lambda * quad.g.eval(m * (zs + 1.0))))?
            }
            SuperCase::F3 => {
                PairField::new(z.scaled(lambda * quad.f.eval(m * (zs + 1.0))), z.scaled(m))?
            }
            SuperCase::Unbounded => PairField::new(
                z.scaled(lambda * quad.f.eval(m * zs)),
                z.scaled(lambda * quad.g.eval(m * zs)),
            )?,
            _ => break,
        };
        let report = verify_pair(grid, lambda, mu, quad, &pair, PairKind::Super, false)?;
        ladder.push(LadderStep {
            amplitude: m,
            pass: report.pass,
        });
        if report.pass && lower.le(&pair, 0.0) {
            return Ok((
                case,
                Certified {
                    pair,
                    amplitude: m,
                    report,
                    ladder,
                },
            ));
        }
    }
    Err(Error::ConstructionFailure {
        what: "supersolution above the subsolution",
        reason: "no verified amplitude dominates the lower pair".into(),
        report: Some(Box::new(first.report)),
    })
}

/// `(a ξ/‖ξ‖∞, a ξ/‖ξ‖∞)` without any parameter gate.
pub fn xi_pair(grid: Grid1D, a: f64) -> Result<PairField> {
    let x = xi(grid)?;
    Ok(PairField::diagonal(x.scaled(a / x.apex_sup_norm())))
}

/// The strict supersolution `(a ξ/‖ξ‖∞, a ξ/‖ξ‖∞)`, admitted only for
/// `λ, μ ∈ (1, Q₁(a)/(2‖ξ‖∞))`.
pub fn strict_supersolution_xi(
    grid: Grid1D,
    quad: &ReactionQuad,
    a: f64,
    lambda: f64,
    mu: f64,
) -> Result<Certified> {
    let x = xi(grid)?;
    let upper = q1(quad, a)? / (2.0 * x.apex_sup_norm());
    for (name, value) in [("lambda", lambda), ("mu", mu)] {
        if !(value > 1.0 && value < upper) {
            return Err(Error::ParameterRegime(format!(
                "{name} = {value} outside the open gate (1, {upper:.6})"
            )));
        }
    }
    let pair = PairField::diagonal(x.scaled(a / x.apex_sup_norm()));
    let report = verify_pair(grid, lambda, mu, quad, &pair, PairKind::Super, true)?;
    if !report.pass {
        return Err(Error::ConstructionFailure {
            what: "strict supersolution",
            reason: "verifier rejected the scaled torsion pair".into(),
            report: Some(Box::new(report)),
        });
    }
    Ok(Certified {
        pair,
        amplitude: a,
        report,
        ladder: vec![LadderStep {
            amplitude: a,
            pass: true,
        }],
    })
}

/// A strict subsolution of the Dirichlet system, large in sup-norm.
#[derive(Clone, Debug)]
pub struct DirichletSubsolution {
    pub pair: PairField,
    pub report: VerificationReport,
    pub u_sup: f64,
    pub v_sup: f64,
    /// Initial slopes of the Dirichlet solution that was scaled down.
    pub slopes: (f64, f64),
}

/// Scale applied to the shooting solution to make it strict.
pub const DIRICHLET_SCALE: f64 = 0.99;

/// Finds a positive Dirichlet solution by shooting, scales it by 0.99 and
/// verifies it as a strict Dirichlet subsolution with both sup-norms `>= b`.
pub fn dirichlet_large_subsolution(
    grid: Grid1D,
    lambda: f64,
    quad: &ReactionQuad,
    b: f64,
    c1: f64,
    options: &ShootingOptions,
) -> Result<DirichletSubsolution> {
    let fb = quad.f.eval(b);
    let gb = quad.g.eval(b);
    if !(fb > 0.0 && gb > 0.0) {
        return Err(Error::DegenerateArgument {
            label: if fb > 0.0 { "g".into() } else { "f".into() },
            at: b,
            value: fb.min(gb),
        });
    }
    let threshold = c1 * (b / fb).max(b / gb);
    if !(lambda >= threshold) {
        return Err(Error::ParameterRegime(format!(
            "lambda = {lambda} below C1 max(b/f(b), b/g(b)) = {threshold:.6}"
        )));
    }
    let roots = shooting::dirichlet_roots(grid, lambda, quad, 16.0 * b.max(1.0), options)?;
    let mut best: Option<DirichletSubsolution> = None;
    let mut last_report = None;
    for (slopes, pair) in roots {
        let scaled = pair.scaled(DIRICHLET_SCALE);
        let (us, vs) = (scaled.u.sup_norm(), scaled.v.sup_norm());
        if us < b || vs < b {
            continue;
        }
        let report = verify_dirichlet_sub(grid, lambda, quad, &scaled, true)?;
        if !report.pass {
            last_report = Some(report);
            continue;
        }
        if best
            .as_ref()
            .map_or(true, |d| us.min(vs) > d.u_sup.min(d.v_sup))
        {
            best = Some(DirichletSubsolution {
                pair: scaled,
                report,
                u_sup: us,
                v_sup: vs,
                slopes,
            });
        }
    }
    best.ok_or_else(|| Error::ConstructionFailure {
        what: "Dirichlet subsolution",
        reason: format!("no positive Dirichlet solution with sup-norms >= {b} verified strictly"),
        report: last_report.map(Box::new),
    })
}

/// One monotone step from a Dirichlet subsolution, with the Robin
/// coefficient `sqrt(λ + μ)`; the result must verify as a strict subsolution.
pub fn strict_subsolution_lift(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
    dirichlet_pair: &PairField,
) -> Result<Certified> {
    check_parameters(lambda, mu)?;
    if dirichlet_pair.min() < 0.0 {
        return Err(Error::InvalidInput(
            "Dirichlet pair must be nonnegative".into(),
        ));
    }
    let lifted = crate::monotone::picard_step(grid, lambda, mu, quad, dirichlet_pair, 0.0)?;
    let report = verify_pair(grid, lambda, mu, quad, &lifted, PairKind::Sub, true)?;
    let dominates = dirichlet_pair.le(&lifted, 0.0);
    if !report.pass || !dominates {
        let reason = if dominates {
            "lifted pair is not a strict subsolution".to_string()
        } else {
            "lifted pair fails to dominate its input".to_string()
        };
        return Err(Error::ConstructionFailure {
            what: "strict subsolution",
            reason,
            report: Some(Box::new(report)),
        });
    }
    Ok(Certified {
        amplitude: lifted.sup_norm(),
        pair: lifted,
        report,
        ladder: Vec::new(),
    })
}

/// Supersolution shrinking to zero as `λ + μ` decreases to `A₁`.
#[derive(Clone, Debug)]
pub struct NearThresholdSupersolution {
    pub certified: Certified,
    pub theta: f64,
    pub concavity: f64,
    pub phi_min: f64,
    pub rho: f64,
}

/// `(ϑ φ, ϑ φ)` with `ϑ = −2ϱ / ((λ+μ) M min φ)`, where `M` bounds the
/// concavity of all four terms on `(0, r)`.
pub fn near_threshold_supersolution(
    grid: Grid1D,
    lambda: f64,
    mu: f64,
    quad: &ReactionQuad,
    r: f64,
) -> Result<NearThresholdSupersolution> {
    let rho = regime_above_a1(grid, lambda, mu, quad)?;
    let concavity = concavity_bound_m(quad, r)?;
    let phi = principal_for(grid, lambda, mu)?;
    let phi_min = phi.min();
    let theta = -2.0 * rho / ((lambda + mu) * concavity * phi_min);
    let amplitude = theta * phi.sup_norm();
    if amplitude > r {
        return Err(Error::RegionExceeded { amplitude, r });
    }
    let pair = PairField::diagonal(phi.scaled(theta));
    let report = verify_pair(grid, lambda, mu, quad, &pair, PairKind::Super, false)?;
    if !report.pass {
        return Err(Error::ConstructionFailure {
            what: "near-threshold supersolution",
            reason: format!("theta = {theta:e} did not verify"),
            report: Some(Box::new(report)),
        });
    }
    Ok(NearThresholdSupersolution {
        certified: Certified {
            pair,
            amplitude: theta,
            report,
            ladder: vec![LadderStep {
                amplitude: theta,
                pass: true,
            }],
        },
        theta,
        concavity,
        phi_min,
        rho,
    })
}

/// Nodewise orderings among the four pairs of the three-solution argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderingCheck {
    pub sub_below_strict_super: bool,
    pub strict_super_below_super: bool,
    pub sub_below_strict_sub: bool,
    pub strict_sub_below_super: bool,
    /// The strict subsolution must not lie below the strict supersolution.
    pub strict_pair_unordered: bool,
}

impl OrderingCheck {
    pub fn new(
        sub: &PairField,
        strict_super: &PairField,
        strict_sub: &PairField,
        sup: &PairField,
    ) -> Self {
        Self {
            sub_below_strict_super: sub.le(strict_super, 0.0),
            strict_super_below_super: strict_super.le(sup, 0.0),
            sub_below_strict_sub: sub.le(strict_sub, 0.0),
            strict_sub_below_super: strict_sub.le(sup, 0.0),
            strict_pair_unordered: !strict_sub.le(strict_super, 0.0),
        }
    }

    pub fn all(&self) -> bool {
        self.sub_below_strict_super
            && self.strict_super_below_super
            && self.sub_below_strict_sub
            && self.strict_sub_below_super
            && self.strict_pair_unordered
    }
}

/// Hypothesis key for a supersolution case, where one exists.
pub fn case_hypothesis(case: SuperCase) -> Option<Hypothesis> {
    match case {
        SuperCase::Bounded => Some(Hypothesis::F1),
        SuperCase::F2 => Some(Hypothesis::F2),
        SuperCase::F3 => Some(Hypothesis::F3),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::{example_family, Nonlinearity};

    fn grid(n: usize) -> Grid1D {
        Grid1D::new(n).unwrap()
    }

    fn family() -> ReactionQuad {
        example_family(1.0, 10.0).unwrap()
    }

    #[test]
    fn zero_pair_is_an_equilibrium() {
        let g = grid(64);
        let report = verify_pair(
            g,
            2.0,
            3.0,
            &family(),
            &PairField::zeros(g),
            PairKind::Sub,
            false,
        )
        .unwrap();
        assert!(report.pass);
        assert_eq!(report.worst_interior(), [0.0, 0.0]);
        assert_eq!(report.worst_boundary(), [0.0, 0.0]);
        assert!(!report.passes(true));
    }

    #[test]
    fn xi_pair_margins() {
        let g = grid(1024);
        let quad = family();
        let a = 1.0;
        let x = xi(g).unwrap();
        let upper = q1(&quad, a).unwrap() / (2.0 * x.apex_sup_norm());
        // Below the lower gate, so checked directly rather than through the constructor.
        let lam = 0.9 * upper;
        let pair = xi_pair(g, a).unwrap();
        let report = verify_pair(g, lam, lam, &quad, &pair, PairKind::Super, true).unwrap();
        assert!(report.pass, "{report:?}");
        assert!(report.worst_interior().iter().all(|&r| r > 0.0));
        let c = (2.0 * lam).sqrt();
        let continuum_margin = (a / x.apex_sup_norm()) * (c - 1.0) * x.get(0);
        for b in report.worst_boundary() {
            assert!(b >= continuum_margin, "{b} vs {continuum_margin}");
            assert!(b - continuum_margin < g.spacing());
        }
        let report =
            verify_pair(g, 1.2 * upper, lam, &quad, &pair, PairKind::Super, false).unwrap();
        assert!(!report.pass);
        let (label, row) = report.witness().unwrap();
        assert!(label.ends_with("interior"));
        assert!((row.x - 0.5).abs() < 0.1);
    }

    #[test]
    fn xi_constructor_gates() {
        let g = grid(64);
        let quad = family();
        let upper = q1(&quad, 1.0).unwrap() / (2.0 * xi(g).unwrap().apex_sup_norm());
        assert!(matches!(
            strict_supersolution_xi(g, &quad, 1.0, upper, upper),
            Err(Error::ParameterRegime(_))
        ));
        assert!(matches!(
            strict_supersolution_xi(g, &quad, 1.0, 0.5, 0.5),
            Err(Error::ParameterRegime(_))
        ));
    }

    #[test]
    fn eigen_subsolution_regimes() {
        let g = grid(256);
        let quad = family();
        let a1 = compute_a1(g, 1.0).unwrap();
        let sub = eigen_subsolution(g, 0.5 * a1 + 0.01, 0.5 * a1 + 0.01, &quad).unwrap();
        assert!(sub.report.pass);
        assert!(sub.pair.min() > 0.0);
        assert!(matches!(
            eigen_subsolution(g, a1 / 4.0, a1 / 4.0, &quad),
            Err(Error::ParameterRegime(_))
        ));
    }

    #[test]
    fn bounded_supersolution_and_monotone_in_m() {
        let g = grid(128);
        let cap = 3.0;
        let capped = Nonlinearity::new("b", move |s: f64| s.min(cap));
        let quad = ReactionQuad::new(capped.clone(), capped.clone(), capped.clone(), capped);
        let (lam, mu) = (2.0, 1.5);
        let sup = supersolution_bounded(g, lam, mu, &quad).unwrap();
        assert!(sup.report.pass);
        let doubled = sup.pair.scaled(2.0);
        let report = verify_pair(g, lam, mu, &quad, &doubled, PairKind::Super, false).unwrap();
        assert!(report.pass);
        // M >= B ‖ζ‖∞ is enough on its own.
        let z = zeta(g, lam, mu).unwrap();
        let m = cap * z.apex_sup_norm();
        let pair = PairField::diagonal(z.scaled((lam + mu) * m / z.apex_sup_norm()));
        assert!(
            verify_pair(g, lam, mu, &quad, &pair, PairKind::Super, false)
                .unwrap()
                .pass
        );
    }

    #[test]
    fn f2_supersolution_with_power_tails() {
        let g = grid(128);
        let quad = ReactionQuad::new(
            Nonlinearity::new("f", |s: f64| 1.0 - (-s).exp()),
            Nonlinearity::new("g", |s: f64| (1.0 + s).sqrt() - 1.0),
            Nonlinearity::new("h", |s: f64| (1.0 + s).sqrt() - 1.0),
            Nonlinearity::new("q", |s: f64| (1.0 + s).cbrt() - 1.0),
        );
        let sup = supersolution_f2(g, 3.0, 2.0, &quad).unwrap();
        assert!(sup.report.pass);
        let f3 = supersolution_f3(g, 3.0, 2.0, &quad);
        if let Ok(c) = f3 {
            assert!(c.report.pass);
        }
    }

    #[test]
    fn f2_fails_for_linear_tails() {
        let g = grid(64);
        let quad = ReactionQuad::new(
            Nonlinearity::new("f", |s: f64| s),
            Nonlinearity::new("g", |s: f64| s),
            Nonlinearity::new("h", |s: f64| s),
            Nonlinearity::new("q", |s: f64| s),
        );
        assert!(matches!(
            supersolution_f2(g, 6.0, 6.0, &quad),
            Err(Error::ConstructionFailure { .. })
        ));
    }

    #[test]
    fn unbounded_case_guard() {
        let g = grid(128);
        let root = |s: f64| (1.0 + s).sqrt() - 1.0;
        let capped = |s: f64| s.min(1.0);
        let quad = ReactionQuad::new(
            Nonlinearity::new("f", root),
            Nonlinearity::new("g", root),
            Nonlinearity::new("h", capped),
            Nonlinearity::new("q", capped),
        );
        let sup = supersolution_unbounded(g, 2.0, 2.0, &quad).unwrap();
        assert!(sup.report.pass);
        let mut bad = quad.clone();
        bad.h = Nonlinearity::new("h", root);
        assert!(matches!(
            supersolution_unbounded(g, 2.0, 2.0, &bad),
            Err(Error::HypothesisViolation(_))
        ));
        assert_eq!(select_super_case(&quad), SuperCase::Unbounded);
    }

    #[test]
    fn family_falls_back_to_eigen_shape() {
        assert_eq!(select_super_case(&family()), SuperCase::Eigen);
    }

    #[test]
    fn orderings() {
        let g = grid(16);
        let one = PairField::diagonal(ScalarField::constant(g, 1.0));
        let two = one.scaled(2.0);
        let three = one.scaled(3.0);
        let check = OrderingCheck::new(&one, &two, &three, &three.scaled(2.0));
        assert!(check.all());
        let check = OrderingCheck::new(&one, &two, &one, &three);
        assert!(!check.strict_pair_unordered);
        assert!(!check.all());
    }
}
