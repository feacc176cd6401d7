//! `multiplicity`: the three-solution window, its gates, and oracle counts
//! at certified points inside it.

use anyhow::{bail, Result};
use rayon::prelude::*;
use robin_rd::nonlinearity::{multiplicity_window, C1Interpretation, MultiplicityWindow};
use robin_rd::shooting::count_positive_solutions;
use robin_rd::subsuper::{
    dirichlet_large_subsolution, eigen_subsolution, strict_subsolution_lift,
    strict_supersolution_xi, supersolution, xi, OrderingCheck,
};
use serde::Serialize;

use crate::{Session, Status};

/// Lattice points per axis inside the window.
pub const LATTICE: usize = 3;

/// Whether one of the four pairs verified, and why not if it did not.
#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub verified: bool,
    pub amplitude: Option<f64>,
    pub error: Option<String>,
}

impl Certificate {
    fn from<T>(r: &robin_rd::Result<T>, amplitude: impl Fn(&T) -> f64) -> Self {
        match r {
            Ok(c) => Self {
                verified: true,
                amplitude: Some(amplitude(c)),
                error: None,
            },
            Err(e) => Self {
                verified: false,
                amplitude: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WindowPoint {
    pub lambda: f64,
    pub mu: f64,
    pub subsolution: Certificate,
    pub strict_supersolution: Certificate,
    pub strict_subsolution: Certificate,
    pub supersolution: Certificate,
    pub ordering: Option<OrderingCheck>,
    /// All four pairs verified and ordered as the three-solution argument needs.
    pub certified: bool,
    pub count: Option<usize>,
    pub count_error: Option<String>,
    /// False only when a certified point has fewer than three positive solutions.
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiplicityReport {
    pub status: &'static str,
    pub c1_interpretation: C1Interpretation,
    pub window: MultiplicityWindow,
    pub interval: Option<(f64, f64)>,
    pub points: Vec<WindowPoint>,
    pub certified_points: usize,
}

/// `a = k`, `b = α` for the built-in family unless the config says otherwise.
pub fn choose_ab(session: &Session) -> Result<(f64, f64)> {
    let choice = session.config.multiplicity;
    let family = session.quad_spec.family_parameters();
    match (
        choice.a.or(family.map(|p| p.0)),
        choice.b.or(family.map(|p| p.1)),
    ) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => bail!("set multiplicity.a and multiplicity.b in the config for a custom quadruple"),
    }
}

pub fn lattice(left: f64, right: f64) -> Vec<f64> {
    (1..=LATTICE)
        .map(|i| left + (right - left) * i as f64 / (LATTICE + 1) as f64)
        .collect()
}

fn examine(session: &Session, window: &MultiplicityWindow, lambda: f64, mu: f64) -> WindowPoint {
    let (grid, quad) = (session.grid, &session.quad);
    let options = session.config.shooting.options();
    let sub = eigen_subsolution(grid, lambda, mu, quad);
    let strict_super = strict_supersolution_xi(grid, quad, window.a, lambda, mu);
    let strict_sub = dirichlet_large_subsolution(grid, lambda, quad, window.b, window.c1, &options)
        .and_then(|d| strict_subsolution_lift(grid, lambda, mu, quad, &d.pair));
    let below = strict_sub.as_ref().ok().map(|c| &c.pair);
    let sup = supersolution(grid, lambda, mu, quad, session.config.supersolution, below);
    let ordering = match (&sub, &strict_super, &strict_sub, &sup) {
        (Ok(a), Ok(b), Ok(c), Ok((_, d))) => {
            Some(OrderingCheck::new(&a.pair, &b.pair, &c.pair, &d.pair))
        }
        _ => None,
    };
    let certified = ordering.map_or(false, |o| o.all());
    let box_max = session.config.shooting.box_max.unwrap_or_else(|| {
        robin_rd::shooting::default_box_max(lambda, mu, sup.as_ref().ok().map(|(_, c)| c.amplitude))
    });
    let counted = count_positive_solutions(
        grid,
        lambda,
        mu,
        quad,
        box_max,
        session.config.shooting.density,
        &options,
    );
    let count = counted.as_ref().ok().copied();
    WindowPoint {
        lambda,
        mu,
        subsolution: Certificate::from(&sub, |c| c.amplitude),
        strict_supersolution: Certificate::from(&strict_super, |c| c.amplitude),
        strict_subsolution: Certificate::from(&strict_sub, |c| c.amplitude),
        supersolution: Certificate::from(&sup, |(_, c)| c.amplitude),
        ordering,
        certified,
        consistent: !certified || count.map_or(false, |c| c >= 3),
        count,
        count_error: counted.err().map(|e| e.to_string()),
    }
}

pub fn run(session: &Session) -> Result<(MultiplicityReport, Status)> {
    let (report, status) = compute(session)?;
    session.write_report(&report)?;
    Ok((report, status))
}

/// The window report without writing it.
pub fn compute(session: &Session) -> Result<(MultiplicityReport, Status)> {
    let (a, b) = choose_ab(session)?;
    let a1 = session.a1()?;
    let xi_sup = xi(session.grid)?.apex_sup_norm();
    let window = multiplicity_window(&session.quad, a, b, a1, xi_sup, session.c1())?;
    let interval = window.interval();
    let points: Vec<WindowPoint> = match interval {
        Some((left, right)) => {
            let axis = lattice(left, right);
            let grid: Vec<(f64, f64)> = axis
                .iter()
                .flat_map(|&l| axis.iter().map(move |&m| (l, m)))
                .collect();
            grid.par_iter()
                .map(|&(l, m)| examine(session, &window, l, m))
                .collect()
        }
        None => Vec::new(),
    };
    let certified_points = points.iter().filter(|p| p.certified).count();
    let (status, label) = if points.iter().any(|p| !p.consistent) {
        (Status::ChecksFailed, "violation")
    } else if certified_points > 0 {
        (Status::Success, "certified")
    } else {
        (Status::NoCertifiedWitness, "no-certified-witness")
    };
    let report = MultiplicityReport {
        status: label,
        c1_interpretation: session.config.c1_interpretation,
        window,
        interval,
        points,
        certified_points,
    };
    Ok((report, status))
}

pub fn print(report: &MultiplicityReport) {
    let w = &report.window;
    println!("a = {}  b = {}", w.a, w.b);
    println!("Q1(a) = {:.9}  Q2(b) = {:.9e}", w.q1, w.q2);
    println!(
        "A1 = {:.9}  |xi|_inf = {:.9}  C1 = {:.9}",
        w.a1, w.xi_sup, w.c1
    );
    println!(
        "ratio gate     Q1/Q2 = {:.6e} > 2 C1 |xi| = {:.6e}: {}",
        w.ratio_gate.lhs,
        w.ratio_gate.rhs,
        if w.ratio_gate.holds { "holds" } else { "fails" }
    );
    println!(
        "threshold gate Q1 = {:.6e} > 2 max(A1, 1) |xi| = {:.6e}: {}",
        w.threshold_gate.lhs,
        w.threshold_gate.rhs,
        if w.threshold_gate.holds {
            "holds"
        } else {
            "fails"
        }
    );
    match report.interval {
        Some((l, r)) => println!("window: ({l:.9}, {r:.9})"),
        None => println!("window: empty (left {:.9} >= right {:.9})", w.left, w.right),
    }
    for p in &report.points {
        println!(
            "  ({:.6}, {:.6}): certified {} count {}",
            p.lambda,
            p.mu,
            p.certified,
            p.count.map_or("-".into(), |c| c.to_string())
        );
    }
    println!("status: {}", report.status);
}
